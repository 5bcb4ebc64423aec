#include <benchmark/benchmark.h>

#include "safe/linalg.hpp"
#include "safe/simulation.hpp"

namespace {

safe::Scenario grid_scenario(int m) {
  safe::Scenario sc;
  sc.m = m;
  sc.n = 15;
  sc.mu0.assign(15, 0.0);
  sc.mu0[0] = 6.0;
  sc.w.assign(static_cast<std::size_t>(m), 0.0);
  sc.rho_r = 0.0;
  sc.rho_v = 0.7;
  sc.seed = 5;
  return sc;
}

void CholeskyGridMatrix(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const safe::Matrix corr = safe::build_cs_correlation(m, 15, -1.0 / (15.0 * m - 1.0), 0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::cholesky_lower(corr));
  }
}
BENCHMARK(CholeskyGridMatrix)->Arg(5)->Arg(10);

void SampleStatistics(benchmark::State& state) {
  const safe::Scenario sc = grid_scenario(static_cast<int>(state.range(0)));
  const safe::Matrix lower =
      safe::cholesky_lower(safe::build_cs_correlation(sc.m, sc.n, sc.rho_r, sc.rho_v));
  std::uint64_t iteration = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::sample_statistics(sc, lower, iteration++));
  }
}
BENCHMARK(SampleStatistics)->Arg(5)->Arg(10);

// Full pipeline cost per Monte Carlo iteration, amortized over a small run.
void RunScenarioPerIteration(benchmark::State& state) {
  safe::Scenario sc = grid_scenario(static_cast<int>(state.range(0)));
  sc.iterations = 2000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe::run_scenario(sc, 1));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(sc.iterations));
}
BENCHMARK(RunScenarioPerIteration)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
