#include "safe/linalg.hpp"

#include <cmath>
#include <string>

#include "safe/errors.hpp"

namespace safe {

Matrix cholesky_lower(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n == 0 || a.cols() != n) {
    throw InvalidInput("cholesky_lower: matrix must be square and nonempty");
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) {
      if (a(r, c) != a(c, r)) {
        throw InvalidInput("cholesky_lower: matrix is not symmetric at (" +
                           std::to_string(r) + ", " + std::to_string(c) + ")");
      }
    }
  }

  double max_diag = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    max_diag = std::max(max_diag, std::fabs(a(j, j)));
  }
  // For a semidefinite matrix a zero pivot forces the residual column below
  // it to zero; entries beyond this bound mean the matrix is indefinite.
  const double column_tolerance =
      std::sqrt(kCholeskyPivotTolerance * std::max(max_diag, 1.0));

  Matrix lower(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) {
      pivot -= lower(j, k) * lower(j, k);
    }
    if (pivot < -kCholeskyPivotTolerance) {
      throw NotPositiveDefinite(j);
    }
    if (pivot <= kCholeskyPivotTolerance) {
      // Semidefinite boundary: zero pivot, and the residual column must
      // vanish with it.
      for (std::size_t i = j + 1; i < n; ++i) {
        double value = a(i, j);
        for (std::size_t k = 0; k < j; ++k) {
          value -= lower(i, k) * lower(j, k);
        }
        if (std::fabs(value) > column_tolerance) {
          throw NotPositiveDefinite(j);
        }
      }
      continue;
    }
    const double diag = std::sqrt(pivot);
    lower(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      double value = a(i, j);
      for (std::size_t k = 0; k < j; ++k) {
        value -= lower(i, k) * lower(j, k);
      }
      lower(i, j) = value / diag;
    }
  }
  return lower;
}

void lower_triangular_multiply(const Matrix& lower, std::span<const double> z,
                               std::span<double> y) {
  const std::size_t n = lower.rows();
  if (z.size() != n || y.size() != n) {
    throw InvalidInput("lower_triangular_multiply: dimension mismatch");
  }
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = lower.data() + r * n;
    double sum = 0.0;
    for (std::size_t k = 0; k <= r; ++k) {
      sum += row[k] * z[k];
    }
    y[r] = sum;
  }
}

}  // namespace safe
