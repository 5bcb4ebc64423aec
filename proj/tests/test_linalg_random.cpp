#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "safe/errors.hpp"
#include "safe/linalg.hpp"
#include "safe/random.hpp"
#include "safe/stats.hpp"

using safe::CounterRng;
using safe::InvalidInput;
using safe::Matrix;
using safe::NotPositiveDefinite;

namespace {

double reconstruction_error(const Matrix& a, const Matrix& lower) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k <= std::min(i, j); ++k) {
        sum += lower(i, k) * lower(j, k);
      }
      worst = std::max(worst, std::fabs(sum - a(i, j)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("cholesky of the identity is the identity") {
  Matrix eye(4, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    eye(i, i) = 1.0;
  }
  CHECK(safe::cholesky_lower(eye) == eye);
}

TEST_CASE("cholesky worked 2x2 example") {
  Matrix a(2, 2);
  a(0, 0) = 4.0;
  a(0, 1) = 2.0;
  a(1, 0) = 2.0;
  a(1, 1) = 5.0;
  const Matrix lower = safe::cholesky_lower(a);
  CHECK(lower(0, 0) == 2.0);
  CHECK(lower(0, 1) == 0.0);
  CHECK(lower(1, 0) == 1.0);
  CHECK(lower(1, 1) == 2.0);
  CHECK(reconstruction_error(a, lower) <= 1e-10);
}

TEST_CASE("cholesky reconstructs random SPD matrices") {
  oracles::TestRng rng(97);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 40));
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        b(i, j) = rng.uniform(-1.0, 1.0);
      }
    }
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double sum = i == j ? 0.5 : 0.0;  // diagonal boost keeps it PD
        for (std::size_t k = 0; k < n; ++k) {
          sum += b(i, k) * b(j, k);
        }
        a(i, j) = sum;
      }
    }
    const Matrix lower = safe::cholesky_lower(a);
    CHECK(reconstruction_error(a, lower) <= 1e-10);
  }
}

TEST_CASE("cholesky rejects an indefinite matrix with the failing pivot") {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 1.0 + 1e-8;
  a(1, 0) = 1.0 + 1e-8;
  a(1, 1) = 1.0;
  try {
    safe::cholesky_lower(a);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("cholesky rejects non-square and asymmetric inputs") {
  CHECK_THROWS_AS(safe::cholesky_lower(Matrix(2, 3)), InvalidInput);
  Matrix a(2, 2, 1.0);
  a(0, 1) = 0.5;
  CHECK_THROWS_AS(safe::cholesky_lower(a), InvalidInput);
}

TEST_CASE("lower-triangular multiply uses only the triangle") {
  Matrix lower(3, 3);
  lower(0, 0) = 2.0;
  lower(1, 0) = 1.0;
  lower(1, 1) = 3.0;
  lower(2, 0) = 0.5;
  lower(2, 1) = -1.0;
  lower(2, 2) = 4.0;
  const std::vector<double> z = {1.0, 2.0, 3.0};
  std::vector<double> y(3);
  safe::lower_triangular_multiply(lower, z, y);
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 7.0);
  CHECK(y[2] == 10.5);
}

TEST_CASE("normal quantile hits standard critical values") {
  CHECK(safe::standard_normal_quantile(0.5) == 0.0);
  CHECK(std::fabs(safe::standard_normal_quantile(0.975) - 1.959963984540054) <= 1e-9);
  CHECK(std::fabs(safe::standard_normal_quantile(0.95) - 1.6448536269514722) <= 1e-9);
  CHECK(std::fabs(safe::standard_normal_quantile(0.25) + 0.6744897501960817) <= 1e-9);

  CHECK_THROWS_AS(safe::standard_normal_quantile(0.0), InvalidInput);
  CHECK_THROWS_AS(safe::standard_normal_quantile(1.0), InvalidInput);
  CHECK_THROWS_AS(safe::standard_normal_quantile(-0.2), InvalidInput);
}

TEST_CASE("normal quantile inverts the upper tail") {
  for (int i = 1; i < 200; ++i) {
    const double u = static_cast<double>(i) / 200.0;
    const double z = safe::standard_normal_quantile(u);
    // upper_tail(z) = 1 - u
    CHECK(std::fabs(safe::normal_upper_tail(z) - (1.0 - u)) <= 1e-12);
  }
  // deep tails keep relative accuracy
  for (const double u : {1e-12, 1e-9, 1e-6, 1.0 - 1e-6, 1.0 - 1e-9}) {
    const double z = safe::standard_normal_quantile(u);
    const double back = 1.0 - safe::normal_upper_tail(z);
    CHECK(std::fabs(back - u) <= 1e-12 + 1e-6 * u);
  }
}

TEST_CASE("counter stream is deterministic and well distributed") {
  const CounterRng rng(424242);
  CHECK(rng.uniform(0) == CounterRng(424242).uniform(0));
  CHECK(rng.uniform(1) != rng.uniform(2));
  CHECK(CounterRng(1).bits(0) != CounterRng(2).bits(0));

  const int draws = 200000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double u = rng.uniform(static_cast<std::uint64_t>(i));
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal(static_cast<std::uint64_t>(i) + 1000000);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  CHECK(std::fabs(mean) <= 4.0 / std::sqrt(draws));
  CHECK(std::fabs(var - 1.0) <= 4.0 * std::sqrt(2.0 / draws));
}
