#pragma once

#include <cstdint>

namespace safe {

// Quantile function of the standard normal distribution (Wichura's AS241,
// PPND16 variant; relative error around 1e-15). `u` must lie strictly in
// (0, 1); throws InvalidInput otherwise.
double standard_normal_quantile(double u);

// Stateless counter-based random stream built on SplitMix64.
//
// Output i of the stream is mix(seed + (i + 1) * gamma) with the SplitMix64
// mixing function, so any draw can be produced at any time on any thread from
// (seed, counter) alone. Uniforms are centered 53-bit values in the open
// interval (0, 1); normals are produced by quantile inversion, one uniform
// per normal. This makes simulation output bit-for-bit reproducible for a
// fixed seed regardless of worker count or scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const;
  double uniform(std::uint64_t counter) const;  // in (0, 1)
  double normal(std::uint64_t counter) const;   // standard normal

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace safe
