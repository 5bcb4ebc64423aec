#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace safe {

// One synergy area: a clinically defined cluster of adverse-event variables
// (for example a MedDRA System Organ Class) with their raw p-values.
struct SaGroup {
  std::string sa_id;
  std::vector<std::string> ae_ids;
  std::vector<double> raw_p;  // aligned with ae_ids
};

enum class CrossSaMethod { bh, by };
enum class WithinSaMethod { holm };

// Policy for synergy areas with fewer AE variables than the synergy count l:
// such an area can never exhibit l concurrent findings, so `pvalue_one`
// assigns it a synergy p-value of 1 (with a warning) while `error` aborts.
enum class SmallSaPolicy { pvalue_one, error };

struct SafeConfig {
  int l = 2;              // findings required within an SA to call it a signal
  double alpha = 0.05;    // nominal FDR level across SAs
  CrossSaMethod cross_sa_method = CrossSaMethod::bh;
  WithinSaMethod within_sa_method = WithinSaMethod::holm;
  SmallSaPolicy small_sa_policy = SmallSaPolicy::pvalue_one;
};

struct AeRecord {
  std::string sa_id;
  std::string ae_id;
  double raw_p = 1.0;
  double holm_adjusted_p = 1.0;
};

struct SaRecord {
  std::string sa_id;
  double sa_pvalue = 1.0;  // l-th smallest Holm-adjusted p within the SA
  double q_value = 1.0;
  bool flagged = false;    // q_value <= alpha
};

struct SafeResult {
  std::vector<AeRecord> per_ae;
  std::vector<SaRecord> per_sa;  // one row per input group, input order
  SafeConfig config;
  std::vector<std::string> warnings;
};

enum class DirectMethod { holm_direct, bh_direct };

struct DirectRecord {
  std::string sa_id;
  std::string ae_id;
  double raw_p = 1.0;
  double adjusted_p = 1.0;  // Holm-adjusted p or BH q-value, by method
  bool flagged = false;
};

struct DirectResult {
  std::vector<DirectRecord> per_ae;
  DirectMethod method = DirectMethod::holm_direct;
  double alpha = 0.05;
};

// First-layer decision for one synergy area: true iff the l-th smallest
// adjusted p-value is <= alpha_tilde, i.e. at least l adjusted p-values clear
// the level. Areas with fewer than l values cannot show l concurrent findings
// and yield false.
bool sa_decision(std::span<const double> adjusted, int l, double alpha_tilde);

// Two-layer screening pipeline. Step 1: Holm-adjust raw p-values within each
// SA and take the l-th smallest adjusted value as the SA-level p-value.
// Step 2: q-values across SAs by BH or BY. Step 3: flag SAs with q <= alpha.
// Output ordering matches input ordering. Throws InvalidInput (naming the
// sa_id) for invalid groups, or for small SAs under SmallSaPolicy::error.
SafeResult safe_analyze(std::span<const SaGroup> groups, const SafeConfig& config);

// Single-layer baseline: pools every raw p-value across all SAs and applies
// one adjustment (Holm or BH), flagging individual AE variables. No synergy
// requirement, so a single extreme AE can be flagged.
DirectResult direct_analyze(std::span<const SaGroup> groups, DirectMethod method,
                            double alpha);

// Adaptive synergy count for an SA with n_ae variables: max(2, round(0.2 * n_ae)).
int adaptive_synergy_count(std::size_t n_ae);

}  // namespace safe
