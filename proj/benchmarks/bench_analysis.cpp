#include <benchmark/benchmark.h>

#include "qsim/error_analysis.hpp"

namespace {

void BM_FidelityModel(benchmark::State& state) {
  double g = 100.0;
  for (auto _ : state) {
    auto budget = qsim::fidelity_model(g, 1e5, 1.0, qsim::FidelityVariant::switch3);
    benchmark::DoNotOptimize(budget.fidelity);
  }
}
BENCHMARK(BM_FidelityModel);

void BM_OptimalG(benchmark::State& state) {
  for (auto _ : state) {
    auto opt = qsim::optimal_g(1e5, 1.0, qsim::FidelityVariant::switch3);
    benchmark::DoNotOptimize(opt.g_star);
  }
}
BENCHMARK(BM_OptimalG);

void BM_Sweep(benchmark::State& state) {
  const auto lambdas = qsim::log_grid(1e3, 1e6, 8);
  const auto gs = qsim::log_grid(1e1, 1e5, 64);
  for (auto _ : state) {
    auto result = qsim::sweep(lambdas, gs, 1.0, qsim::FidelityVariant::chain5);
    benchmark::DoNotOptimize(result.rows.size());
  }
}
BENCHMARK(BM_Sweep);

}  // namespace

BENCHMARK_MAIN();
