#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "safe/engine.hpp"
#include "safe/multiplicity.hpp"

namespace {

std::vector<double> uniform_pvalues(std::size_t n, std::uint64_t seed) {
  std::vector<double> p(n);
  std::uint64_t s = seed;
  for (double& v : p) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    v = static_cast<double>(s >> 11) * 0x1.0p-53;
  }
  return p;
}

void HolmAdjust(benchmark::State& state) {
  const auto p = uniform_pvalues(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::holm_adjust(p));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(HolmAdjust)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BhQvalues(benchmark::State& state) {
  const auto p = uniform_pvalues(static_cast<std::size_t>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::bh_qvalues(p));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BhQvalues)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

// Case-study-sized input: 23 SAs, 259 AE variables.
void SafeAnalyze(benchmark::State& state) {
  std::vector<safe::SaGroup> groups;
  std::uint64_t seed = 3;
  for (int i = 0; i < 23; ++i) {
    safe::SaGroup group;
    group.sa_id = "SA" + std::to_string(i);
    const std::size_t size = i < 6 ? 12 : 11;
    group.raw_p = uniform_pvalues(size, ++seed);
    for (std::size_t j = 0; j < size; ++j) {
      group.ae_ids.push_back("AE" + std::to_string(j));
    }
    groups.push_back(std::move(group));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::safe_analyze(groups, safe::SafeConfig{}));
  }
}
BENCHMARK(SafeAnalyze);

}  // namespace

BENCHMARK_MAIN();
