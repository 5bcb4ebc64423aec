#include "safe/engine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "safe/errors.hpp"
#include "safe/multiplicity.hpp"

namespace safe {

namespace {

void check_config(const SafeConfig& config) {
  if (config.l < 1) {
    throw InvalidInput("SafeConfig: l must be >= 1, got " + std::to_string(config.l));
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw InvalidInput("SafeConfig: alpha must lie in (0, 1), got " +
                       std::to_string(config.alpha));
  }
}

void check_group(const SaGroup& group) {
  if (group.ae_ids.empty()) {
    throw InvalidInput("SA '" + group.sa_id + "': must contain at least one AE variable");
  }
  if (group.ae_ids.size() != group.raw_p.size()) {
    throw InvalidInput("SA '" + group.sa_id + "': raw_p length " +
                       std::to_string(group.raw_p.size()) + " does not match AE count " +
                       std::to_string(group.ae_ids.size()));
  }
  std::unordered_set<std::string> seen;
  for (const std::string& ae : group.ae_ids) {
    if (!seen.insert(ae).second) {
      throw InvalidInput("SA '" + group.sa_id + "': duplicate AE id '" + ae + "'");
    }
  }
  for (std::size_t j = 0; j < group.raw_p.size(); ++j) {
    if (!(group.raw_p[j] >= 0.0 && group.raw_p[j] <= 1.0)) {
      throw InvalidInput("SA '" + group.sa_id + "': p-value for AE '" + group.ae_ids[j] +
                         "' is outside [0, 1]");
    }
  }
}

void check_groups(std::span<const SaGroup> groups) {
  if (groups.empty()) {
    throw InvalidInput("at least one SA group is required");
  }
  for (const SaGroup& group : groups) {
    check_group(group);
  }
}

}  // namespace

bool sa_decision(std::span<const double> adjusted, int l, double alpha_tilde) {
  if (l < 1) {
    throw InvalidInput("sa_decision: l must be >= 1");
  }
  if (!(alpha_tilde > 0.0 && alpha_tilde < 1.0)) {
    throw InvalidInput("sa_decision: alpha_tilde must lie in (0, 1)");
  }
  if (adjusted.size() < static_cast<std::size_t>(l)) {
    return false;
  }
  return kth_smallest(adjusted, static_cast<std::size_t>(l)) <= alpha_tilde;
}

SafeResult safe_analyze(std::span<const SaGroup> groups, const SafeConfig& config) {
  check_config(config);
  check_groups(groups);

  SafeResult result;
  result.config = config;
  result.per_ae.reserve(groups.size());
  result.per_sa.reserve(groups.size());

  const auto l = static_cast<std::size_t>(config.l);
  std::vector<double> sa_pvalues;
  sa_pvalues.reserve(groups.size());

  for (const SaGroup& group : groups) {
    const std::vector<double> adjusted = holm_adjust(group.raw_p);
    for (std::size_t j = 0; j < group.ae_ids.size(); ++j) {
      result.per_ae.push_back({group.sa_id, group.ae_ids[j], group.raw_p[j], adjusted[j]});
    }

    double sa_pvalue;
    if (adjusted.size() < l) {
      if (config.small_sa_policy == SmallSaPolicy::error) {
        throw InvalidInput("SA '" + group.sa_id + "': has " +
                           std::to_string(adjusted.size()) +
                           " AE variables, fewer than l = " + std::to_string(config.l));
      }
      sa_pvalue = 1.0;
      result.warnings.push_back("SA '" + group.sa_id + "' has " +
                                std::to_string(adjusted.size()) +
                                " AE variables, fewer than l = " + std::to_string(config.l) +
                                "; synergy p-value set to 1");
    } else {
      sa_pvalue = kth_smallest(adjusted, l);
    }
    sa_pvalues.push_back(sa_pvalue);
  }

  const std::vector<double> q = config.cross_sa_method == CrossSaMethod::bh
                                    ? bh_qvalues(sa_pvalues)
                                    : by_qvalues(sa_pvalues);

  for (std::size_t i = 0; i < groups.size(); ++i) {
    result.per_sa.push_back(
        {groups[i].sa_id, sa_pvalues[i], q[i], q[i] <= config.alpha});
  }
  return result;
}

DirectResult direct_analyze(std::span<const SaGroup> groups, DirectMethod method,
                            double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidInput("direct_analyze: alpha must lie in (0, 1)");
  }
  check_groups(groups);

  std::vector<double> pooled;
  for (const SaGroup& group : groups) {
    pooled.insert(pooled.end(), group.raw_p.begin(), group.raw_p.end());
  }

  const std::vector<double> adjusted =
      method == DirectMethod::holm_direct ? holm_adjust(pooled) : bh_qvalues(pooled);

  DirectResult result;
  result.method = method;
  result.alpha = alpha;
  result.per_ae.reserve(pooled.size());
  std::size_t offset = 0;
  for (const SaGroup& group : groups) {
    for (std::size_t j = 0; j < group.ae_ids.size(); ++j, ++offset) {
      result.per_ae.push_back({group.sa_id, group.ae_ids[j], group.raw_p[j],
                               adjusted[offset], adjusted[offset] <= alpha});
    }
  }
  return result;
}

int adaptive_synergy_count(std::size_t n_ae) {
  const long rounded = std::lround(0.2 * static_cast<double>(n_ae));
  return static_cast<int>(std::max(2L, rounded));
}

}  // namespace safe
