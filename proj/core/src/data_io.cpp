#include "safe/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "safe/errors.hpp"
#include "safe/multiplicity.hpp"

namespace safe {

namespace {

constexpr double kLogFloor = 1e-300;

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' ||
                         text[end - 1] == '\r')) {
    --end;
  }
  return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

std::int64_t parse_count(const std::string& text, std::size_t line,
                         const std::string& column) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || value < 0) {
    throw ParseError(line, "column '" + column + "': expected a nonnegative integer, got '" +
                               text + "'");
  }
  return value;
}

std::string sig4(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", value);
  return buf;
}

const char* method_name(CrossSaMethod method) {
  return method == CrossSaMethod::bh ? "bh" : "by";
}

const char* policy_name(SmallSaPolicy policy) {
  return policy == SmallSaPolicy::pvalue_one ? "pvalue_one" : "error";
}

}  // namespace

SafetyDataset parse_dataset(std::istream& in, const DatasetFormat& format) {
  static constexpr std::array<const char*, 6> kColumns = {
      "sa", "ae", "events_1", "subjects_1", "events_2", "subjects_2"};

  SafetyDataset dataset;
  std::array<std::size_t, 6> column_index{};
  column_index.fill(std::string::npos);
  bool header_seen = false;
  std::set<std::pair<std::string, std::string>> seen_keys;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    if (stripped.front() == '#') {
      if (!header_seen) {
        // Optional arm-label metadata ahead of the header.
        const std::string body = trim(std::string_view(stripped).substr(1));
        const std::size_t eq = body.find('=');
        if (eq != std::string::npos) {
          const std::string key = trim(std::string_view(body).substr(0, eq));
          const std::string value = trim(std::string_view(body).substr(eq + 1));
          if (key == "arm_1") {
            dataset.arm_labels[0] = value;
          } else if (key == "arm_2") {
            dataset.arm_labels[1] = value;
          }
        }
      }
      continue;
    }

    const std::vector<std::string> fields = split_fields(line, format.delimiter);
    if (!header_seen) {
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        for (std::size_t f = 0; f < fields.size(); ++f) {
          if (fields[f] == kColumns[c]) {
            column_index[c] = f;
            break;
          }
        }
      }
      std::string missing;
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        if (column_index[c] == std::string::npos) {
          missing += missing.empty() ? kColumns[c] : std::string(", ") + kColumns[c];
        }
      }
      if (!missing.empty()) {
        throw ParseError(lineno, "missing required column(s): " + missing);
      }
      header_seen = true;
      continue;
    }

    const std::size_t needed =
        1 + *std::max_element(column_index.begin(), column_index.end());
    if (fields.size() < needed) {
      throw ParseError(lineno, "expected at least " + std::to_string(needed) +
                                   " fields, got " + std::to_string(fields.size()));
    }

    SafetyRow row;
    row.sa_id = fields[column_index[0]];
    row.ae_id = fields[column_index[1]];
    if (row.sa_id.empty() || row.ae_id.empty()) {
      throw ParseError(lineno, "sa and ae labels must be nonempty");
    }
    row.arm1.events = parse_count(fields[column_index[2]], lineno, "events_1");
    row.arm1.subjects = parse_count(fields[column_index[3]], lineno, "subjects_1");
    row.arm2.events = parse_count(fields[column_index[4]], lineno, "events_2");
    row.arm2.subjects = parse_count(fields[column_index[5]], lineno, "subjects_2");
    if (row.arm1.subjects < 1 || row.arm2.subjects < 1) {
      throw ParseError(lineno, "subjects must be >= 1 in both arms");
    }
    if (row.arm1.events > row.arm1.subjects) {
      throw ParseError(lineno, "events_1 exceeds subjects_1");
    }
    if (row.arm2.events > row.arm2.subjects) {
      throw ParseError(lineno, "events_2 exceeds subjects_2");
    }
    if (!seen_keys.insert({row.sa_id, row.ae_id}).second) {
      throw ParseError(lineno, "duplicate (sa, ae) pair ('" + row.sa_id + "', '" +
                                   row.ae_id + "')");
    }
    dataset.rows.push_back(std::move(row));
  }

  if (!header_seen) {
    throw ParseError(std::max<std::size_t>(lineno, 1), "missing header row");
  }
  if (dataset.rows.empty()) {
    throw ParseError(lineno, "dataset contains no data rows");
  }
  return dataset;
}

std::string serialize_dataset(const SafetyDataset& dataset, const DatasetFormat& format) {
  const char d = format.delimiter;
  std::string out;
  out += "# arm_1 = " + dataset.arm_labels[0] + "\n";
  out += "# arm_2 = " + dataset.arm_labels[1] + "\n";
  out += std::string("sa") + d + "ae" + d + "events_1" + d + "subjects_1" + d +
         "events_2" + d + "subjects_2\n";
  for (const SafetyRow& row : dataset.rows) {
    out += row.sa_id + d + row.ae_id + d + std::to_string(row.arm1.events) + d +
           std::to_string(row.arm1.subjects) + d + std::to_string(row.arm2.events) + d +
           std::to_string(row.arm2.subjects) + "\n";
  }
  return out;
}

std::vector<SaGroup> dataset_to_groups(const SafetyDataset& dataset, Sidedness sidedness) {
  std::vector<SaGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const SafetyRow& row : dataset.rows) {
    const auto [it, inserted] = index.try_emplace(row.sa_id, groups.size());
    if (inserted) {
      groups.push_back(SaGroup{row.sa_id, {}, {}});
    }
    SaGroup& group = groups[it->second];
    group.ae_ids.push_back(row.ae_id);
    group.raw_p.push_back(two_proportion_pvalue(row.arm1, row.arm2, sidedness));
  }
  return groups;
}

void emit_report(const SafeResult& result, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::records) {
    nlohmann::json config;
    config["record"] = "config";
    config["l"] = result.config.l;
    config["alpha"] = result.config.alpha;
    config["cross_sa_method"] = method_name(result.config.cross_sa_method);
    config["within_sa_method"] = "holm";
    config["small_sa_policy"] = policy_name(result.config.small_sa_policy);
    out << config.dump() << "\n";
    for (const SaRecord& sa : result.per_sa) {
      nlohmann::json record;
      record["record"] = "sa";
      record["sa"] = sa.sa_id;
      record["sa_pvalue"] = sa.sa_pvalue;
      record["q_value"] = sa.q_value;
      record["flagged"] = sa.flagged;
      out << record.dump() << "\n";
    }
    for (const AeRecord& ae : result.per_ae) {
      nlohmann::json record;
      record["record"] = "ae";
      record["sa"] = ae.sa_id;
      record["ae"] = ae.ae_id;
      record["raw_p"] = ae.raw_p;
      record["holm_adjusted_p"] = ae.holm_adjusted_p;
      out << record.dump() << "\n";
    }
    for (const std::string& warning : result.warnings) {
      nlohmann::json record;
      record["record"] = "warning";
      record["message"] = warning;
      out << record.dump() << "\n";
    }
    return;
  }

  out << "two-layer screening: l = " << result.config.l
      << ", alpha = " << sig4(result.config.alpha)
      << ", cross-SA method = " << method_name(result.config.cross_sa_method) << "\n\n";

  std::size_t sa_width = 2;
  for (const SaRecord& sa : result.per_sa) {
    sa_width = std::max(sa_width, sa.sa_id.size());
  }
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%-*s  %10s  %10s  %s\n",
                static_cast<int>(sa_width), "sa", "sa_pvalue", "q_value", "flag");
  out << buf;
  for (const SaRecord& sa : result.per_sa) {
    std::snprintf(buf, sizeof(buf), "%-*s  %10s  %10s  %s\n",
                  static_cast<int>(sa_width), sa.sa_id.c_str(),
                  sig4(sa.sa_pvalue).c_str(), sig4(sa.q_value).c_str(),
                  sa.flagged ? "*" : "");
    out << buf;
  }

  std::size_t ae_width = 2;
  for (const AeRecord& ae : result.per_ae) {
    ae_width = std::max(ae_width, ae.ae_id.size());
  }
  out << "\nper-AE detail:\n";
  std::snprintf(buf, sizeof(buf), "%-*s  %-*s  %10s  %s\n",
                static_cast<int>(sa_width), "sa", static_cast<int>(ae_width), "ae",
                "raw_p", "holm_adjusted_p");
  out << buf;
  for (const AeRecord& ae : result.per_ae) {
    std::snprintf(buf, sizeof(buf), "%-*s  %-*s  %10s  %s\n",
                  static_cast<int>(sa_width), ae.sa_id.c_str(),
                  static_cast<int>(ae_width), ae.ae_id.c_str(),
                  sig4(ae.raw_p).c_str(), sig4(ae.holm_adjusted_p).c_str());
    out << buf;
  }

  if (!result.warnings.empty()) {
    out << "\nwarnings:\n";
    for (const std::string& warning : result.warnings) {
      out << "  - " << warning << "\n";
    }
  }
}

void emit_comparison(const SafeResult& safe_result, const DirectResult& direct_holm,
                     const DirectResult& direct_bh, ReportFormat format,
                     std::ostream& out) {
  const std::size_t ae_count = safe_result.per_ae.size();
  if (direct_holm.per_ae.size() != ae_count || direct_bh.per_ae.size() != ae_count) {
    throw InvalidInput("emit_comparison: results cover different AE sets");
  }

  // Direct flags per SA, in the SA order of the two-layer result.
  std::unordered_map<std::string, std::pair<int, int>> direct_counts;
  for (std::size_t k = 0; k < ae_count; ++k) {
    auto& counts = direct_counts[direct_holm.per_ae[k].sa_id];
    counts.first += direct_holm.per_ae[k].flagged ? 1 : 0;
    counts.second += direct_bh.per_ae[k].flagged ? 1 : 0;
  }

  if (format == ReportFormat::records) {
    nlohmann::json config;
    config["record"] = "comparison_config";
    config["l"] = safe_result.config.l;
    config["alpha"] = safe_result.config.alpha;
    out << config.dump() << "\n";
    for (const SaRecord& sa : safe_result.per_sa) {
      const auto counts = direct_counts[sa.sa_id];
      nlohmann::json record;
      record["record"] = "sa_comparison";
      record["sa"] = sa.sa_id;
      record["safe_sa_pvalue"] = sa.sa_pvalue;
      record["safe_q_value"] = sa.q_value;
      record["safe_flagged"] = sa.flagged;
      record["direct_holm_flagged_aes"] = counts.first;
      record["direct_bh_flagged_aes"] = counts.second;
      out << record.dump() << "\n";
    }
    for (std::size_t k = 0; k < ae_count; ++k) {
      const AeRecord& ae = safe_result.per_ae[k];
      nlohmann::json record;
      record["record"] = "ae_comparison";
      record["sa"] = ae.sa_id;
      record["ae"] = ae.ae_id;
      record["raw_p"] = ae.raw_p;
      record["within_sa_holm_p"] = ae.holm_adjusted_p;
      record["direct_holm_p"] = direct_holm.per_ae[k].adjusted_p;
      record["direct_holm_flagged"] = direct_holm.per_ae[k].flagged;
      record["direct_bh_q"] = direct_bh.per_ae[k].adjusted_p;
      record["direct_bh_flagged"] = direct_bh.per_ae[k].flagged;
      out << record.dump() << "\n";
    }
    return;
  }

  out << "method comparison: alpha = " << sig4(safe_result.config.alpha)
      << ", two-layer l = " << safe_result.config.l << "\n\n";
  std::size_t sa_width = 2;
  for (const SaRecord& sa : safe_result.per_sa) {
    sa_width = std::max(sa_width, sa.sa_id.size());
  }
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%-*s  %10s  %10s  %9s  %16s  %14s\n",
                static_cast<int>(sa_width), "sa", "sa_pvalue", "q_value",
                "two-layer", "direct-holm AEs", "direct-bh AEs");
  out << buf;
  for (const SaRecord& sa : safe_result.per_sa) {
    const auto counts = direct_counts[sa.sa_id];
    std::snprintf(buf, sizeof(buf), "%-*s  %10s  %10s  %9s  %16d  %14d\n",
                  static_cast<int>(sa_width), sa.sa_id.c_str(),
                  sig4(sa.sa_pvalue).c_str(), sig4(sa.q_value).c_str(),
                  sa.flagged ? "*" : "", counts.first, counts.second);
    out << buf;
  }
}

PlotTable emit_plot_table(const SafeResult& result) {
  std::unordered_map<std::string, std::vector<double>> adjusted_by_sa;
  for (const AeRecord& ae : result.per_ae) {
    adjusted_by_sa[ae.sa_id].push_back(ae.holm_adjusted_p);
  }

  PlotTable table;
  table.rows.reserve(result.per_sa.size());
  for (const SaRecord& sa : result.per_sa) {
    const auto it = adjusted_by_sa.find(sa.sa_id);
    if (it == adjusted_by_sa.end() || it->second.empty()) {
      throw InvalidInput("emit_plot_table: SA '" + sa.sa_id + "' has no AE records");
    }
    const std::vector<double>& adjusted = it->second;
    const double p1 = kth_smallest(adjusted, 1);
    double p2 = 1.0;
    if (adjusted.size() >= 2) {
      p2 = kth_smallest(adjusted, 2);
    } else {
      table.warnings.push_back("SA '" + sa.sa_id +
                               "' has a single AE variable; second smallest adjusted "
                               "p-value set to 1");
    }
    PlotRow row;
    row.sa_id = sa.sa_id;
    row.log10_p1 = std::log10(std::max(p1, kLogFloor));
    row.log10_p2 = std::log10(std::max(p2, kLogFloor));
    row.q_value = sa.q_value;
    row.flagged = sa.flagged;
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_plot_table(const PlotTable& table, std::ostream& out) {
  out << "sa\tlog10_p1\tlog10_p2\tq_value\tflagged\n";
  for (const PlotRow& row : table.rows) {
    nlohmann::json q = row.q_value;      // shortest round-trip formatting
    nlohmann::json p1 = row.log10_p1;
    nlohmann::json p2 = row.log10_p2;
    out << row.sa_id << "\t" << p1.dump() << "\t" << p2.dump() << "\t" << q.dump()
        << "\t" << (row.flagged ? 1 : 0) << "\n";
  }
}

}  // namespace safe
