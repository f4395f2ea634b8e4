#include <benchmark/benchmark.h>

#include "qsim/protocols.hpp"

namespace {

void BM_Generate2DTableau(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto graph = qsim::build_2d_lattice(m, 2.0);
  const auto plan =
      qsim::generate_2d(graph, qsim::Lattice2DMode::simultaneous, qsim::ScheduleMode::ideal_mode());
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    auto run = qsim::execute_tableau(plan.schedule, graph, qsim::RunPolicy::sample(rng));
    benchmark::DoNotOptimize(run.records.size());
  }
  state.counters["qubits"] = graph.num_qubits();
}
BENCHMARK(BM_Generate2DTableau)->Arg(4)->Arg(8)->Arg(12);

void BM_CertificateCheck(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto graph = qsim::build_2d_lattice(m, 2.0);
  const auto plan =
      qsim::generate_2d(graph, qsim::Lattice2DMode::simultaneous, qsim::ScheduleMode::ideal_mode());
  std::mt19937_64 rng(3);
  const auto run = qsim::execute_tableau(plan.schedule, graph, qsim::RunPolicy::sample(rng));
  for (auto _ : state) {
    auto report = qsim::check_certificate(run.tableau, plan.certificate);
    benchmark::DoNotOptimize(report.pass);
  }
}
BENCHMARK(BM_CertificateCheck)->Arg(4)->Arg(8);

void BM_TableauMeasure(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(5);
  for (auto _ : state) {
    state.PauseTiming();
    qsim::StabilizerTableau tab(n);
    for (int q = 0; q < n; ++q) tab.apply_h(q);
    for (int q = 0; q + 1 < n; ++q) tab.apply_cz(q, q + 1);
    state.ResumeTiming();
    for (int q = 0; q < n; ++q) {
      auto result = tab.measure(q, qsim::PauliBasis::Y, qsim::MeasurePolicy::sample(rng));
      benchmark::DoNotOptimize(result.outcome);
    }
  }
}
BENCHMARK(BM_TableauMeasure)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
