#pragma once

#include <cstdint>

namespace safe {

// Incidence counts for one treatment arm: `events` subjects reported the
// adverse event out of `subjects` enrolled.
struct ArmCounts {
  std::int64_t events = 0;
  std::int64_t subjects = 1;
};

enum class Sidedness { two_sided, greater, less };

// Standard-normal upper tail P(Z >= z).
//
// Evaluated through erfc so the far tail keeps full absolute accuracy instead
// of cancelling against 1. Absolute error is below 1e-12 for |z| <= 8, the
// result is clamped to [0, 1], and the mapping is monotone nonincreasing.
// Throws InvalidInput for non-finite z.
double normal_upper_tail(double z);

// Two-group proportion test without continuity correction, pooled variance:
//
//   p_hat = (e1 + e2) / (n1 + n2)
//   z     = (e1/n1 - e2/n2) / sqrt(p_hat (1 - p_hat) (1/n1 + 1/n2))
//
// Returns the tail probability selected by `sidedness`; two_sided is
// 2 * min(upper, lower) capped at 1. When the pooled proportion is degenerate
// (no events at all, or events in every subject) the test carries no evidence
// of a rate difference and the p-value is 1.
double two_proportion_pvalue(const ArmCounts& arm1, const ArmCounts& arm2,
                             Sidedness sidedness);

}  // namespace safe
