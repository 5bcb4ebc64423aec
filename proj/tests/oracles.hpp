#pragma once

// Test-only reference implementations. These re-derive expected values along
// routes that are independent of the library code paths they check: direct
// quadrature of the normal density, the sequential/step-up formulations of
// the multiple-testing procedures, and a literal step-by-step rerun of the
// two-layer pipeline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature of the standard normal density
// ---------------------------------------------------------------------------

inline double normal_density(double t) {
  return 0.39894228040143267794 * std::exp(-0.5 * t * t);
}

template <typename F>
double adaptive_simpson_step(F&& f, double a, double b, double fa, double fm, double fb,
                             double whole, double eps, int depth) {
  const double mid = 0.5 * (a + b);
  const double lm = 0.5 * (a + mid);
  const double rm = 0.5 * (mid + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_step(f, a, mid, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson_step(f, mid, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double eps = 1e-15, int depth = 60) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_step(f, a, b, fa, fm, fb, whole, eps, depth);
}

// P(Z >= z) integrated directly over the tail (no cancellation against 1);
// mass beyond z + 45 is below 1e-300.
inline double upper_tail_by_quadrature(double z) {
  if (z >= 0.0) {
    return adaptive_simpson(normal_density, z, z + 45.0);
  }
  return 0.5 + adaptive_simpson(normal_density, z, 0.0);
}

// ---------------------------------------------------------------------------
// Classical rejection-set formulations
// ---------------------------------------------------------------------------

inline std::vector<std::size_t> sorted_indices(const std::vector<double>& p) {
  std::vector<std::pair<double, std::size_t>> pairs;
  pairs.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    pairs.emplace_back(p[i], i);
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::size_t> order;
  order.reserve(p.size());
  for (const auto& pair : pairs) {
    order.push_back(pair.second);
  }
  return order;
}

// Sequential Holm step-down: walk the sorted p-values and reject while
// (n - j + 1) * p^(j) <= alpha; stop at the first failure.
inline std::vector<bool> holm_rejections(const std::vector<double>& p, double alpha) {
  const auto order = sorted_indices(p);
  const std::size_t n = p.size();
  std::vector<bool> reject(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    if (static_cast<double>(n - j) * p[order[j]] > alpha) {
      break;
    }
    reject[order[j]] = true;
  }
  return reject;
}

// BH step-up: find the largest k with p^(k) * m / k <= alpha and reject the k
// smallest.
inline std::vector<bool> bh_rejections(const std::vector<double>& p, double alpha) {
  const auto order = sorted_indices(p);
  const std::size_t m = p.size();
  std::size_t k_max = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    const double scaled =
        (k == m) ? p[order[k - 1]]
                 : p[order[k - 1]] * static_cast<double>(m) / static_cast<double>(k);
    if (scaled <= alpha) {
      k_max = k;
    }
  }
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < k_max; ++k) {
    reject[order[k]] = true;
  }
  return reject;
}

// ---------------------------------------------------------------------------
// Literal two-layer pipeline rerun
// ---------------------------------------------------------------------------

inline std::vector<double> holm_reference(const std::vector<double>& p) {
  const auto order = sorted_indices(p);
  const std::size_t n = p.size();
  std::vector<double> adjusted(n);
  double running = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    running = std::max(running, static_cast<double>(n - j) * p[order[j]]);
    adjusted[order[j]] = std::min(1.0, running);
  }
  return adjusted;
}

inline std::vector<double> bh_reference(const std::vector<double>& p) {
  const auto order = sorted_indices(p);
  const std::size_t m = p.size();
  std::vector<double> q_sorted(m);
  q_sorted[m - 1] = p[order[m - 1]];
  for (std::size_t i = m - 1; i-- > 0;) {
    const double scaled =
        p[order[i]] * static_cast<double>(m) / static_cast<double>(i + 1);
    q_sorted[i] = std::min(scaled, q_sorted[i + 1]);
  }
  std::vector<double> q(m);
  for (std::size_t i = 0; i < m; ++i) {
    q[order[i]] = std::min(1.0, q_sorted[i]);
  }
  return q;
}

inline std::vector<double> by_reference(const std::vector<double>& p) {
  double harmonic = 0.0;
  for (std::size_t i = 1; i <= p.size(); ++i) {
    harmonic += 1.0 / static_cast<double>(i);
  }
  std::vector<double> inflated(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    inflated[i] = std::min(1.0, p[i] * harmonic);
  }
  return bh_reference(inflated);
}

struct PipelineReference {
  std::vector<double> sa_pvalues;
  std::vector<double> q_values;
  std::vector<bool> flagged;
};

inline PipelineReference two_layer_reference(const std::vector<std::vector<double>>& raw,
                                             int l, double alpha, bool use_by = false) {
  PipelineReference ref;
  for (const std::vector<double>& p : raw) {
    std::vector<double> adjusted = holm_reference(p);
    std::sort(adjusted.begin(), adjusted.end());
    ref.sa_pvalues.push_back(adjusted.size() >= static_cast<std::size_t>(l)
                                 ? adjusted[static_cast<std::size_t>(l) - 1]
                                 : 1.0);
  }
  ref.q_values = use_by ? by_reference(ref.sa_pvalues) : bh_reference(ref.sa_pvalues);
  for (const double q : ref.q_values) {
    ref.flagged.push_back(q <= alpha);
  }
  return ref;
}

// ---------------------------------------------------------------------------
// Deterministic test RNG (independent of the library's counter stream)
// ---------------------------------------------------------------------------

class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

  std::uint64_t next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace oracles
