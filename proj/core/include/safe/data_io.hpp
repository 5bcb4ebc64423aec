#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "safe/engine.hpp"
#include "safe/report_format.hpp"
#include "safe/stats.hpp"

namespace safe {

// One dataset row: incidence counts of one AE variable in one SA, both arms.
struct SafetyRow {
  std::string sa_id;
  std::string ae_id;
  ArmCounts arm1;
  ArmCounts arm2;
};

// AE incidence table for two arms, grouped later by sa_id in first-appearance
// order. (sa_id, ae_id) pairs are unique; labels are compared byte-exact.
struct SafetyDataset {
  std::vector<SafetyRow> rows;
  std::array<std::string, 2> arm_labels{"arm_1", "arm_2"};
};

// Delimiter-separated input. Canonical column names are
// sa, ae, events_1, subjects_1, events_2, subjects_2; extra columns are
// ignored. Comma is the canonical delimiter, tab is accepted through this
// descriptor.
struct DatasetFormat {
  char delimiter = ',';
};

// Parses and validates a dataset. Header row required. `#` lines before the
// header may carry arm labels (`# arm_1 = <label>`); later `#` lines are
// comments. Throws ParseError with the offending line number for a missing
// column, non-integer counts, events > subjects, or duplicate (sa, ae).
SafetyDataset parse_dataset(std::istream& in, const DatasetFormat& format = {});

// Inverse of parse_dataset on valid datasets.
std::string serialize_dataset(const SafetyDataset& dataset,
                              const DatasetFormat& format = {});

// Groups rows by sa_id (first-appearance order) and computes each AE's raw
// p-value with the two-group proportion test.
std::vector<SaGroup> dataset_to_groups(const SafetyDataset& dataset,
                                       Sidedness sidedness);

// records: JSON lines (config, one record per SA, one per AE, warnings) at
// full precision; parsing them back reproduces the numbers exactly.
// table: aligned columns rounded to 4 significant digits, flagged SAs marked,
// warnings section only when warnings exist.
void emit_report(const SafeResult& result, ReportFormat format, std::ostream& out);

// Side-by-side view of the two-layer pipeline against the pooled direct
// methods on the same dataset.
void emit_comparison(const SafeResult& safe_result, const DirectResult& direct_holm,
                     const DirectResult& direct_bh, ReportFormat format,
                     std::ostream& out);

struct PlotRow {
  std::string sa_id;
  double log10_p1 = 0.0;  // log10 of the smallest Holm-adjusted p in the SA
  double log10_p2 = 0.0;  // log10 of the second smallest
  double q_value = 1.0;
  bool flagged = false;
};

struct PlotTable {
  std::vector<PlotRow> rows;  // one per SA, same order as SafeResult.per_sa
  std::vector<std::string> warnings;
};

// Plot-ready projection of a result: per SA the log10 of the first and second
// smallest Holm-adjusted p-values plus the q-value and flag. Zero p-values
// (underflow) are floored at 1e-300 before the log; an SA with a single AE
// gets log10_p2 = 0 and a warning.
PlotTable emit_plot_table(const SafeResult& result);

// Tab-separated: sa, log10_p1, log10_p2, q_value, flagged.
void write_plot_table(const PlotTable& table, std::ostream& out);

}  // namespace safe
