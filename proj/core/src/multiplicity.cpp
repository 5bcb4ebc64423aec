#include "safe/multiplicity.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "safe/errors.hpp"

namespace safe {

namespace {

void check_pvalues(std::span<const double> p, const char* op) {
  if (p.empty()) {
    throw InvalidInput(std::string(op) + ": p-value vector must be nonempty");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      throw InvalidInput(std::string(op) + ": p[" + std::to_string(i) +
                         "] = " + std::to_string(p[i]) + " is outside [0, 1]");
    }
  }
}

// Indices of `values` in ascending order; ties keep original index order so
// downstream decisions are tie-order independent.
std::vector<std::size_t> ascending_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

}  // namespace

std::vector<double> holm_adjust(std::span<const double> p) {
  check_pvalues(p, "holm_adjust");
  const std::size_t n = p.size();
  const std::vector<std::size_t> order = ascending_order(p);

  std::vector<double> adjusted(n);
  double running_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double scaled = static_cast<double>(n - k) * p[order[k]];
    running_max = std::max(running_max, scaled);
    adjusted[order[k]] = std::min(1.0, running_max);
  }
  return adjusted;
}

std::vector<double> bh_qvalues(std::span<const double> p) {
  check_pvalues(p, "bh_qvalues");
  const std::size_t m = p.size();
  const std::vector<std::size_t> order = ascending_order(p);

  std::vector<double> q(m);
  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = m; k-- > 0;) {
    const double scaled =
        (k + 1 == m) ? p[order[k]]
                     : p[order[k]] * static_cast<double>(m) / static_cast<double>(k + 1);
    running_min = std::min(running_min, scaled);
    q[order[k]] = std::min(1.0, running_min);
  }
  return q;
}

std::vector<double> by_qvalues(std::span<const double> p) {
  check_pvalues(p, "by_qvalues");
  const std::size_t m = p.size();
  double harmonic = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    harmonic += 1.0 / static_cast<double>(i);
  }
  std::vector<double> inflated(m);
  for (std::size_t i = 0; i < m; ++i) {
    inflated[i] = std::min(1.0, p[i] * harmonic);
  }
  return bh_qvalues(inflated);
}

double kth_smallest(std::span<const double> values, std::size_t k) {
  if (values.empty()) {
    throw InvalidInput("kth_smallest: vector must be nonempty");
  }
  if (k < 1 || k > values.size()) {
    throw InvalidInput("kth_smallest: k = " + std::to_string(k) + " is outside [1, " +
                       std::to_string(values.size()) + "]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   sorted.end());
  return sorted[k - 1];
}

}  // namespace safe
