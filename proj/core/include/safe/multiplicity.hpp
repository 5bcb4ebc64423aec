#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace safe {

// Holm (1979) step-down adjusted p-values.
//
// Sorting p ascending as p^(1) <= ... <= p^(n), the adjusted value at sorted
// rank k is min(1, max_{j <= k} (n - j + 1) * p^(j)); results are mapped back
// to the input order. Ties are broken by original index (stable sort), so
// equal inputs get equal adjusted values. Valid under arbitrary dependence.
// Throws InvalidInput for an empty vector or entries outside [0, 1].
std::vector<double> holm_adjust(std::span<const double> p);

// Benjamini-Hochberg q-values.
//
// Four steps: sort ascending; q^(m) = p^(m); backward recursion
// q^(i) = min(p^(i) * m / i, q^(i+1)); map back through the sorting index.
// Outputs are capped at 1. Thresholding the result at alpha reproduces the
// BH step-up rejection set at FDR level alpha.
std::vector<double> bh_qvalues(std::span<const double> p);

// Benjamini-Yekutieli q-values: BH applied to min(1, p * c(m)) with
// c(m) = sum_{i=1..m} 1/i. Controls FDR under arbitrary dependence.
std::vector<double> by_qvalues(std::span<const double> p);

// k-th order statistic of `values`, 1-based. Throws InvalidInput when k is
// out of [1, size].
double kth_smallest(std::span<const double> values, std::size_t k);

}  // namespace safe
