#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace safe {

// Dense row-major matrix of doubles. Just enough surface for correlation
// matrices, Cholesky factors, and statistic/p-value grids.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Lower-triangular Cholesky factor L with L * L^T = a.
//
// Pivots within kCholeskyPivotTolerance of zero are treated as exact zeros and
// their columns are zeroed, which factors positive-semidefinite matrices at
// the boundary of admissibility (e.g. compound-symmetry correlation at
// rho = -1/(dim - 1)). A pivot below -kCholeskyPivotTolerance throws
// NotPositiveDefinite with the failing pivot index. Throws InvalidInput for a
// non-square or asymmetric input.
Matrix cholesky_lower(const Matrix& a);

inline constexpr double kCholeskyPivotTolerance = 1e-10;

// y = L * z for lower-triangular L, using only the triangle.
void lower_triangular_multiply(const Matrix& lower, std::span<const double> z,
                               std::span<double> y);

}  // namespace safe
