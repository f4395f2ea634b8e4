#include <benchmark/benchmark.h>

#include "qsim/protocols.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

qsim::DeviceGraph chain_for(int qubits) {
  // nearest main count giving at least `qubits` sites
  const int m = (qubits + 1) / 2 + (((qubits + 1) / 2) % 2);
  return qsim::build_chain(m, 2.0);
}

void BM_EvolveDiagonal(benchmark::State& state) {
  const auto graph = chain_for(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  auto psi = qsim::random_state(graph.num_qubits(), rng);
  for (auto _ : state) {
    qsim::evolve_diagonal(psi, graph, 0.37);
    benchmark::DoNotOptimize(psi.amp(0));
  }
  state.SetComplexityN(1 << graph.num_qubits());
}
BENCHMARK(BM_EvolveDiagonal)->Arg(9)->Arg(13)->Arg(17)->Complexity(benchmark::oN);

void BM_EvolveDriven(benchmark::State& state) {
  const auto graph = chain_for(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  auto psi = qsim::random_state(graph.num_qubits(), rng);
  const qsim::DrivePulse pulse{1, 50.0, kPi / 2.0, 0.05, 0.0};
  for (auto _ : state) {
    qsim::evolve_driven(psi, graph, pulse);
    benchmark::DoNotOptimize(psi.amp(0));
  }
  state.SetComplexityN(1 << graph.num_qubits());
}
BENCHMARK(BM_EvolveDriven)->Arg(9)->Arg(13)->Arg(17)->Complexity(benchmark::oN);

void BM_InstantGate(benchmark::State& state) {
  std::mt19937_64 rng(1);
  auto psi = qsim::random_state(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    qsim::apply_instant_gate(psi, 2, qsim::InstantGate::ry(0.3));
    benchmark::DoNotOptimize(psi.amp(0));
  }
}
BENCHMARK(BM_InstantGate)->Arg(10)->Arg(16)->Arg(20);

void BM_SwitchingProtocol(benchmark::State& state) {
  const auto graph = qsim::build_chain(2, 2.0);
  const auto schedule = qsim::switching_cz(graph, 0, 1, 2, qsim::ScheduleMode::ideal_mode());
  std::mt19937_64 rng(7);
  const auto phi = qsim::random_state(2, rng);
  const auto initial = qsim::embed_two_qubit_state(phi, 3, 0, 2);
  for (auto _ : state) {
    auto run = qsim::execute_dense(schedule, graph, initial, qsim::RunPolicy::force({+1}));
    benchmark::DoNotOptimize(run.state.amp(0));
  }
}
BENCHMARK(BM_SwitchingProtocol);

}  // namespace

BENCHMARK_MAIN();
