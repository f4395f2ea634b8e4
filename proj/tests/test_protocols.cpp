#include <doctest.h>

#include <cmath>

#include "qsim/protocols.hpp"
#include "support/oracles.hpp"

using namespace qsim;

namespace {

constexpr double kPi = 3.14159265358979323846;

StateVector cz_on(const StateVector& state, int a, int b) {
  StateVector out = state;
  const std::size_t ma = std::size_t{1} << a, mb = std::size_t{1} << b;
  for (std::size_t i = 0; i < out.dim(); ++i) {
    if ((i & ma) && (i & mb)) out.amp(i) = -out.amp(i);
  }
  return out;
}

DeviceGraph make_line5(const std::vector<double>& g) {
  std::vector<Qubit> qubits{{0, QubitRole::logical, 0.0}, {1, QubitRole::ancilla, 0.0},
                            {2, QubitRole::ancilla, 0.0}, {3, QubitRole::ancilla, 0.0},
                            {4, QubitRole::logical, 0.0}};
  std::vector<Edge> edges{{0, 1, g[0]}, {1, 2, g[1]}, {2, 3, g[2]}, {3, 4, g[3]}};
  return assign_frame(DeviceGraph(std::move(qubits), std::move(edges)));
}

/// Worst CZ infidelity over every supported outcome pattern, plus the
/// largest deviation between branches.
struct BranchCheck {
  double worst_fidelity = 1.0;
  double branch_gap = 0.0;
};

BranchCheck run_all_branches(const PulseSchedule& schedule, const DeviceGraph& graph,
                             const StateVector& initial, const StateVector& reference) {
  BranchCheck check;
  const auto patterns = enumerate_outcome_patterns(schedule, graph, initial);
  REQUIRE(!patterns.empty());
  bool have_first = false;
  StateVector first(graph.num_qubits());
  for (const auto& pattern : patterns) {
    auto run = execute_dense(schedule, graph, initial, RunPolicy::force(pattern));
    check.worst_fidelity = std::min(check.worst_fidelity, fidelity(run.state, reference));
    if (!have_first) {
      first = run.state;
      have_first = true;
    } else {
      check.branch_gap = std::max(check.branch_gap, 1.0 - fidelity(run.state, first));
    }
  }
  return check;
}

}  // namespace

TEST_CASE("switching_cz") {
  auto graph = build_chain(2, 2.0);
  const auto mode = ScheduleMode::ideal_mode();

  SUBCASE("ground input stays all-ground") {
    auto schedule = switching_cz(graph, 0, 1, 2, mode);
    auto run = execute_dense(schedule, graph, StateVector(3), RunPolicy::force({+1}));
    CHECK(std::norm(run.state.amp(0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("|+>|+> becomes the 2-qubit graph state") {
    auto phi = init_product_state(2, {{0, BasisInit::plus}, {1, BasisInit::plus}});
    auto initial = embed_two_qubit_state(phi, 3, 0, 2);
    auto schedule = switching_cz(graph, 0, 1, 2, mode);
    auto run = execute_dense(schedule, graph, initial, RunPolicy::force({-1}));
    CHECK(check_certificate_dense(run.state, GraphStateCertificate{{0, 2}, {{0, 2}}}).pass);
  }
  SUBCASE("exact CZ on random states, identical branches") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
      auto phi = random_state(2, rng);
      auto initial = embed_two_qubit_state(phi, 3, 0, 2);
      auto reference = cz_on(initial, 0, 2);
      auto check = run_all_branches(switching_cz(graph, 0, 1, 2, mode), graph, initial, reference);
      CHECK(check.worst_fidelity > 1.0 - 1e-10);
      CHECK(check.branch_gap < 1e-10);
    }
  }
  SUBCASE("ancilla ends deterministically ground") {
    std::mt19937_64 rng(103);
    auto initial = embed_two_qubit_state(random_state(2, rng), 3, 0, 2);
    auto run = execute_dense(switching_cz(graph, 0, 1, 2, mode), graph, initial,
                             RunPolicy::force({+1}));
    CHECK(pauli_expectation(run.state, 1, PauliBasis::Z) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("wrong topology rejected") {
    CHECK_THROWS_AS(switching_cz(graph, 1, 0, 2, mode), std::invalid_argument);
    CHECK_THROWS_AS(switching_cz(graph, 0, 1, 1, mode), std::invalid_argument);
  }
  SUBCASE("unequal couplings are routed to the echo variant") {
    auto uneven = build_chain(2, std::vector<double>{2.0, 1.0});
    CHECK_THROWS_WITH_AS(switching_cz(uneven, 0, 1, 2, mode),
                         doctest::Contains("echo"), std::invalid_argument);
  }
}

TEST_CASE("echo_cz_pair") {
  const auto mode = ScheduleMode::ideal_mode();
  SUBCASE("g1 = g2 degenerates to the switching evolution plus the pulse pair") {
    auto graph = build_chain(2, 2.0);
    auto echo = echo_cz_pair(graph, 0, 1, 2, mode);
    CHECK(echo.count_instants(GateKind::X) == 2);
    std::mt19937_64 rng(107);
    auto phi = random_state(2, rng);
    auto initial = embed_two_qubit_state(phi, 3, 0, 2);
    auto check = run_all_branches(echo, graph, initial, cz_on(initial, 0, 2));
    CHECK(check.worst_fidelity > 1.0 - 1e-10);
  }
  SUBCASE("exact CZ for random couplings and states, both orientations") {
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> dist(0.4, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
      auto graph = build_chain(2, std::vector<double>{dist(rng), dist(rng)});
      auto phi = random_state(2, rng);
      auto initial = embed_two_qubit_state(phi, 3, 0, 2);
      auto check = run_all_branches(echo_cz_pair(graph, 0, 1, 2, mode), graph, initial,
                                    cz_on(initial, 0, 2));
      CHECK(check.worst_fidelity > 1.0 - 1e-10);
      CHECK(check.branch_gap < 1e-10);
    }
  }
  SUBCASE("accumulated two-qubit phases satisfy the pi conditions") {
    auto timing = spin_echo_times(3.7, 1.2);
    CHECK(std::abs(3.7 * (timing.t1 - timing.t2) - kPi) < 1e-12);
    CHECK(std::abs(1.2 * (timing.t1 + timing.t2) - kPi) < 1e-12);
  }
  SUBCASE("the echo segment alone is exactly CZ CZ, for arbitrary 3-qubit states") {
    // evolve t1, pi-pulse, evolve t2, undo pulse, fix the leftover local
    // phase: the net unitary is CZ_ab CZ_bc even with b in superposition
    std::mt19937_64 rng(111);
    std::uniform_real_distribution<double> dist(0.4, 4.0);
    for (int trial = 0; trial < 10; ++trial) {
      const double g1 = dist(rng), g2 = dist(rng);
      auto graph = build_chain(2, std::vector<double>{g1, g2});
      const auto timing = spin_echo_times(g1, g2);
      const int pulsed = timing.swapped ? 2 : 0;

      auto state = random_state(3, rng);
      auto reference = cz_on(cz_on(state, 0, 1), 1, 2);

      evolve_diagonal(state, graph, timing.t1);
      apply_instant_gate(state, pulsed, InstantGate::x());
      evolve_diagonal(state, graph, timing.t2);
      apply_instant_gate(state, pulsed, InstantGate::x());
      apply_instant_gate(state, 1, InstantGate::phase(std::max(g1, g2) * timing.t2));
      CHECK(fidelity(state, reference) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("chain_cz_5") {
  const auto mode = ScheduleMode::ideal_mode();
  SUBCASE("all-ground input ends all-ground") {
    auto line = make_line5({1.0, 1.0, 1.0, 1.0});
    auto run = execute_dense(chain_cz_5(line, 0, 1, 2, 3, 4, mode), line, StateVector(5),
                             RunPolicy::force({+1, +1, +1}));
    CHECK(std::norm(run.state.amp(0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("CZ between the end mains with all branches identical") {
    std::mt19937_64 rng(113);
    std::uniform_real_distribution<double> dist(0.5, 3.0);
    for (int trial = 0; trial < 6; ++trial) {
      auto line = make_line5({dist(rng), dist(rng), dist(rng), dist(rng)});
      auto phi = random_state(2, rng);
      auto initial = embed_two_qubit_state(phi, 5, 0, 4);
      auto check = run_all_branches(chain_cz_5(line, 0, 1, 2, 3, 4, mode), line, initial,
                                    cz_on(initial, 0, 4));
      CHECK(check.worst_fidelity > 1.0 - 1e-10);
      CHECK(check.branch_gap < 1e-10);
    }
  }
  SUBCASE("the carrier ancilla is entangled after the second echo") {
    auto line = make_line5({1.0, 1.0, 1.0, 1.0});
    PulseSchedule partial;
    // prepare mains in |+>, carrier in |+>, run both echo blocks only
    partial.add_instant(InstantGate::ry(kPi / 2.0), 0);
    partial.add_instant(InstantGate::ry(kPi / 2.0), 4);
    auto full = chain_cz_5(line, 0, 1, 2, 3, 4, mode);
    // replay all steps up to (excluding) the final measurement of the carrier
    int measures_seen = 0;
    for (const auto& step : full.steps()) {
      if (std::holds_alternative<MeasureStep>(step)) ++measures_seen;
    }
    REQUIRE(measures_seen == 3);
    PulseSchedule truncated;
    truncated.add_instant(InstantGate::ry(kPi / 2.0), 0);
    truncated.add_instant(InstantGate::ry(kPi / 2.0), 4);
    int seen = 0;
    for (const auto& step : full.steps()) {
      if (std::holds_alternative<MeasureStep>(step)) {
        ++seen;
        if (seen == 3) break;  // stop before the carrier measurement
        truncated.add_measure(std::get<MeasureStep>(step).qubit,
                              std::get<MeasureStep>(step).basis);
        continue;
      }
      if (const auto* ff = std::get_if<FeedforwardStep>(&step)) {
        truncated.add_feedforward(*ff);
        continue;
      }
      if (const auto* fe = std::get_if<FreeEvolveStep>(&step)) {
        truncated.add_free_evolve(fe->duration);
        continue;
      }
      if (const auto* inst = std::get_if<InstantStep>(&step)) {
        truncated.add_instant(inst->gate, inst->qubit);
        continue;
      }
    }
    auto run = execute_dense(truncated, line, StateVector(5), RunPolicy::force({+1, +1}));
    auto rho_c = reduced_density(run.state, {2});
    CHECK(rho_c.purity() < 1.0 - 1e-6);
  }
  SUBCASE("topology is validated") {
    auto line = make_line5({1.0, 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(chain_cz_5(line, 0, 2, 1, 3, 4, mode), std::invalid_argument);
    CHECK_THROWS_AS(chain_cz_5(line, 1, 0, 2, 3, 4, mode), std::invalid_argument);
  }
}

TEST_CASE("cross_cz") {
  const auto mode = ScheduleMode::ideal_mode();
  auto bilayer = build_bilayer_unit(1, 2.0);
  auto cross = find_cross_shapes(bilayer).front();
  auto graph = extract_cross_subgraph(bilayer, cross);
  auto mains = graph.main_qubits();
  REQUIRE(mains.size() == 4);

  SUBCASE("all mains ground: identity") {
    auto schedule = cross_cz(graph, mains[0], mains[2], mode);
    std::mt19937_64 rng(127);
    auto run = execute_dense(schedule, graph, StateVector(graph.num_qubits()),
                             RunPolicy::sample(rng));
    CHECK(std::norm(run.state.amp(0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("every pair works and spectators are untouched") {
    std::mt19937_64 rng(131);
    for (std::size_t i = 0; i < mains.size(); ++i) {
      for (std::size_t j = i + 1; j < mains.size(); ++j) {
        // target pair random, spectators in |+>
        std::map<int, BasisInit> init;
        for (int q = 0; q < graph.num_qubits(); ++q) init[q] = BasisInit::ground;
        std::vector<int> spectators;
        for (int m : mains) {
          if (m != mains[i] && m != mains[j]) {
            init[m] = BasisInit::plus;
            spectators.push_back(m);
          }
        }
        auto base = init_product_state(graph.num_qubits(), init);
        auto phi = random_state(2, rng);
        // imprint phi on the target pair
        StateVector initial = base;
        for (std::size_t idx = 0; idx < initial.dim(); ++idx) initial.amp(idx) = 0.0;
        const std::size_t mi = std::size_t{1} << mains[i];
        const std::size_t mj = std::size_t{1} << mains[j];
        for (std::size_t idx = 0; idx < base.dim(); ++idx) {
          if (std::norm(base.amp(idx)) == 0.0) continue;
          for (std::size_t bits = 0; bits < 4; ++bits) {
            std::size_t target = idx;
            if (bits & 1) target |= mi;
            if (bits & 2) target |= mj;
            initial.amp(target) += base.amp(idx) * phi.amp(bits);
          }
        }
        auto reference = cz_on(initial, mains[i], mains[j]);
        auto spectator_before = reduced_density(initial, spectators);

        auto schedule = cross_cz(graph, mains[i], mains[j], mode);
        auto run = execute_dense(schedule, graph, initial, RunPolicy::sample(rng));
        CHECK(fidelity(run.state, reference) > 1.0 - 1e-10);
        auto spectator_after = reduced_density(run.state, spectators);
        CHECK(spectator_before.trace_distance(spectator_after) < 1e-10);
      }
    }
  }
  SUBCASE("pair not on a cross rejected") {
    CHECK_THROWS_AS(cross_cz(graph, mains[0], mains[0], mode), std::invalid_argument);
    auto chain = build_chain(2, 1.0);
    CHECK_THROWS_AS(cross_cz(chain, 0, 2, mode), std::invalid_argument);
  }
}

TEST_CASE("generate_1d") {
  const auto mode = ScheduleMode::ideal_mode();
  std::mt19937_64 rng(137);
  SUBCASE("m=2 is a single CZ pair") {
    auto g = build_chain(2, 2.0);
    auto plan = generate_1d(g, false, mode);
    auto run = execute_dense(plan.schedule, g, StateVector(3), RunPolicy::sample(rng));
    auto report = check_certificate_dense(run.state, plan.certificate);
    CHECK(report.pass);
    CHECK(report.stabilizers.size() == 2);
  }
  SUBCASE("m=4 uniform: full certificate") {
    auto g = build_chain(4, 2.0);
    auto plan = generate_1d(g, false, mode);
    auto run = execute_dense(plan.schedule, g, StateVector(7), RunPolicy::sample(rng));
    CHECK(check_certificate_dense(run.state, plan.certificate).pass);
    CHECK(fidelity(run.state, certificate_reference_state(plan.certificate, 7)) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("m=4 random asymmetric couplings: same certificate") {
    auto g = randomize_couplings(build_chain(4, 2.0), 2.0, 6.0, 41);
    auto plan = generate_1d(g, true, mode);
    auto run = execute_dense(plan.schedule, g, StateVector(7), RunPolicy::sample(rng));
    CHECK(check_certificate_dense(run.state, plan.certificate).pass);
  }
  SUBCASE("asymmetric and uniform schedules produce the same state") {
    auto gu = build_chain(4, 2.0);
    auto ga = randomize_couplings(gu, 1.0, 3.0, 43);
    auto pu = generate_1d(gu, false, mode);
    auto pa = generate_1d(ga, true, mode);
    auto ru = execute_dense(pu.schedule, gu, StateVector(7), RunPolicy::sample(rng));
    auto ra = execute_dense(pa.schedule, ga, StateVector(7), RunPolicy::sample(rng));
    CHECK(fidelity(ru.state, ra.state) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("pi-pulse count is linear in the chain length") {
    for (int m : {2, 4, 6, 8}) {
      auto g = randomize_couplings(build_chain(m, 2.0), 1.0, 3.0, 47);
      auto plan = generate_1d(g, true, mode);
      CHECK(plan.schedule.count_instants(GateKind::X) <= 3 * m);
    }
  }
  SUBCASE("odd chain rejected at build time") {
    CHECK_THROWS_AS(build_chain(5, 1.0), std::invalid_argument);
  }
}

TEST_CASE("generate_2d") {
  const auto mode = ScheduleMode::ideal_mode();
  std::mt19937_64 rng(139);
  SUBCASE("m=2 uniform simultaneous: one global evolution") {
    auto g = build_2d_lattice(2, 1.5);
    auto plan = generate_2d(g, Lattice2DMode::simultaneous, mode);
    int free_evolves = 0;
    for (const auto& step : plan.schedule.steps()) {
      if (std::holds_alternative<FreeEvolveStep>(step)) ++free_evolves;
    }
    CHECK(free_evolves == 1);
    auto run = execute_dense(plan.schedule, g, StateVector(8), RunPolicy::sample(rng));
    CHECK(check_certificate_dense(run.state, plan.certificate).pass);
    CHECK(fidelity(run.state, certificate_reference_state(plan.certificate, 8)) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("m=2 four-step asymmetric: same certificate") {
    auto g = randomize_couplings(build_2d_lattice(2, 1.5), 1.0, 4.0, 53);
    auto plan = generate_2d(g, Lattice2DMode::four_step, mode);
    auto run = execute_dense(plan.schedule, g, StateVector(8), RunPolicy::sample(rng));
    CHECK(check_certificate_dense(run.state, plan.certificate).pass);
  }
  SUBCASE("m=4 on the tableau backend: all 16 stabilizers") {
    auto g = build_2d_lattice(4, 1.5);
    auto plan = generate_2d(g, Lattice2DMode::simultaneous, mode);
    auto run = execute_tableau(plan.schedule, g, RunPolicy::sample(rng));
    auto report = check_certificate(run.tableau, plan.certificate);
    CHECK(report.pass);
    CHECK(report.stabilizers.size() == 16);
  }
  SUBCASE("m=6 crosses the 64-qubit word boundary on the tableau") {
    auto g = build_2d_lattice(6, 1.5);  // 96 qubits
    auto plan = generate_2d(g, Lattice2DMode::simultaneous, mode);
    auto run = execute_tableau(plan.schedule, g, RunPolicy::sample(rng));
    CHECK(check_certificate(run.tableau, plan.certificate).pass);
  }
  SUBCASE("simultaneous mode demands uniform couplings") {
    auto g = randomize_couplings(build_2d_lattice(2, 1.0), 1.0, 2.0, 59);
    CHECK_THROWS_AS(generate_2d(g, Lattice2DMode::simultaneous, mode), std::invalid_argument);
  }
}

TEST_CASE("generate_3d_bilayer") {
  const auto mode = ScheduleMode::ideal_mode();
  std::mt19937_64 rng(149);
  SUBCASE("single unit cell passes on the tableau backend") {
    auto g = build_bilayer_unit(1, 2.0);
    auto plan = generate_3d_bilayer(g, mode);
    auto run = execute_tableau(plan.schedule, g, RunPolicy::sample(rng));
    auto report = check_certificate(run.tableau, plan.certificate);
    CHECK(report.pass);
    CHECK(report.stabilizers.size() == 6);
  }
  SUBCASE("before the slant step the two layers are disjoint graph states") {
    auto g = build_bilayer_unit(1, 2.0);
    auto plan = generate_3d_bilayer(g, mode, 2);
    // the certificate splits into two components with no shared vertices
    std::vector<int> layer1{0, 1, 2}, layer2{3, 4, 5};
    for (const auto& [a, b] : plan.certificate.edges) {
      const bool in1 = std::find(layer1.begin(), layer1.end(), a) != layer1.end();
      const bool in2 = std::find(layer2.begin(), layer2.end(), a) != layer2.end();
      if (in1) CHECK(std::find(layer1.begin(), layer1.end(), b) != layer1.end());
      if (in2) CHECK(std::find(layer2.begin(), layer2.end(), b) != layer2.end());
    }
    auto run = execute_tableau(plan.schedule, g, RunPolicy::sample(rng));
    CHECK(check_certificate(run.tableau, plan.certificate).pass);
  }
  SUBCASE("two tiles with random couplings") {
    auto g = build_bilayer_unit_random(2, 1.0, 3.0, 61);
    auto plan = generate_3d_bilayer(g, mode);
    auto run = execute_tableau(plan.schedule, g, RunPolicy::sample(rng));
    auto report = check_certificate(run.tableau, plan.certificate);
    CHECK(report.pass);
    CHECK(report.stabilizers.size() == 12);
  }
  SUBCASE("re-running after measuring out a layer regenerates the bilayer") {
    auto g = build_bilayer_unit(1, 2.0);
    auto plan = generate_3d_bilayer(g, mode);
    auto first = execute_tableau(plan.schedule, g, RunPolicy::sample(rng));
    REQUIRE(check_certificate(first.tableau, plan.certificate).pass);
    // measure out the bit-flip layer in X (the readout direction)
    StabilizerTableau tab = first.tableau;
    for (int q : {0, 1, 2}) tab.measure(q, PauliBasis::X, MeasurePolicy::sample(rng));
    auto second = execute_tableau(plan.schedule, g, std::move(tab), RunPolicy::sample(rng));
    CHECK(check_certificate(second.tableau, plan.certificate).pass);
  }
}

TEST_CASE("excited-ancilla residual demonstrates the grounding choice") {
  // Feed the ancilla forward to excited instead of ground, then free-evolve
  // t' = pi/(2g): the extra phase degrades the CZ output.
  auto graph = build_chain(2, 2.0);
  auto phi = init_product_state(2, {{0, BasisInit::plus}, {1, BasisInit::plus}});
  auto initial = embed_two_qubit_state(phi, 3, 0, 2);

  PulseSchedule schedule;
  schedule.add_instant(InstantGate::ry(kPi / 2.0), 1);
  schedule.add_free_evolve(kPi / 2.0);
  const int ordinal = schedule.add_measure(1, PauliBasis::Y);
  FeedforwardStep ff;
  ff.measurements = {ordinal};
  // same local corrections, but the ancilla rotation targets excited
  ff.branches["+"] = {InstantStep{InstantGate::s_minus(), 0},
                      InstantStep{InstantGate::rx(-kPi / 2.0), 1},
                      InstantStep{InstantGate::s_minus(), 2}};
  ff.branches["-"] = {InstantStep{InstantGate::s_plus(), 0},
                      InstantStep{InstantGate::rx(kPi / 2.0), 1},
                      InstantStep{InstantGate::s_plus(), 2}};
  schedule.add_feedforward(std::move(ff));
  schedule.add_free_evolve(kPi / 4.0);  // t' = pi/(2g)

  auto run = execute_dense(schedule, graph, initial, RunPolicy::force({+1}));
  // compare against the ideal CZ output with the ancilla excited
  auto reference = cz_on(initial, 0, 2);
  apply_instant_gate(reference, 1, InstantGate::x());
  const double f = fidelity(run.state, reference);
  CHECK(f < 1.0 - 1e-3);
  // the excited ancilla is the culprit: with zero residual time the state is fine
  auto run0 = execute_dense([&]() {
    PulseSchedule s;
    s.add_instant(InstantGate::ry(kPi / 2.0), 1);
    s.add_free_evolve(kPi / 2.0);
    const int m = s.add_measure(1, PauliBasis::Y);
    FeedforwardStep f2;
    f2.measurements = {m};
    f2.branches["+"] = {InstantStep{InstantGate::s_minus(), 0},
                        InstantStep{InstantGate::rx(-kPi / 2.0), 1},
                        InstantStep{InstantGate::s_minus(), 2}};
    s.add_feedforward(std::move(f2));
    return s;
  }(), graph, initial, RunPolicy::force({+1}));
  CHECK(fidelity(run0.state, reference) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("apply_failure_model") {
  auto graph = build_chain(2, 2.0);
  auto phi = init_product_state(2, {{0, BasisInit::plus}, {1, BasisInit::plus}});
  const double t_residual = kPi / 4.0;

  SUBCASE("epsilon 0 gives the ideal reduced state") {
    auto rho = apply_failure_model(graph, 0, 1, 2, phi, {0.0}, t_residual);
    auto cz_phi = cz_on(phi, 0, 1);
    CHECK(rho.fidelity_with_pure(cz_phi) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("epsilon 1 at t = 0 also gives the ideal reduced state") {
    auto rho = apply_failure_model(graph, 0, 1, 2, phi, {1.0}, 0.0);
    auto cz_phi = cz_on(phi, 0, 1);
    CHECK(rho.fidelity_with_pure(cz_phi) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("diagonal unchanged, off-diagonals attenuated (density-matrix oracle)") {
    const double eps = 0.1;
    auto rho = apply_failure_model(graph, 0, 1, 2, phi, {eps}, t_residual);
    auto ideal = apply_failure_model(graph, 0, 1, 2, phi, {0.0}, 0.0);
    CHECK((rho.diagonal() - ideal.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rho.trace_distance(ideal) <= eps + 1e-12);
    CHECK(rho.trace_distance(ideal) > 1e-4);  // the dephasing is visible

    // oracle: build the mixture explicitly from the two 3-qubit branches
    auto ideal3 = execute_dense(switching_cz(graph, 0, 1, 2, ScheduleMode::ideal_mode()), graph,
                                embed_two_qubit_state(phi, 3, 0, 2), RunPolicy::force({+1}))
                      .state;
    auto failed3 = ideal3;
    apply_instant_gate(failed3, 1, InstantGate::x());
    evolve_diagonal(failed3, graph, t_residual);
    oracles::Matrix mixture =
        (1.0 - eps) * (oracles::to_vector(ideal3) * oracles::to_vector(ideal3).adjoint()) +
        eps * (oracles::to_vector(failed3) * oracles::to_vector(failed3).adjoint());
    // trace out the ancilla (bit 1)
    oracles::Matrix reduced = oracles::Matrix::Zero(4, 4);
    for (int anc = 0; anc < 2; ++anc) {
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          const int row = (r & 1) | (anc << 1) | ((r & 2) << 1);
          const int col = (c & 1) | (anc << 1) | ((c & 2) << 1);
          reduced(r, c) += mixture(row, col);
        }
      }
    }
    CHECK((rho.matrix() - reduced).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("epsilon outside [0,1] rejected") {
    CHECK_THROWS_AS(apply_failure_model(graph, 0, 1, 2, phi, {1.5}, 0.0), std::invalid_argument);
  }
}

TEST_CASE("ancilla isolation invariant") {
  // A schedule acting on one pair leaves the far main qubit's reduced state
  // untouched when the mediating ancillas next to it stay ground.
  auto g = build_chain(4, 2.0);
  std::mt19937_64 rng(151);
  std::map<int, BasisInit> init;
  for (int q = 0; q < 7; ++q) init[q] = BasisInit::ground;
  init[4] = BasisInit::plus_i;
  init[6] = BasisInit::minus;
  auto initial = init_product_state(7, init);
  auto before_4 = reduced_density(initial, {4});
  auto before_6 = reduced_density(initial, {6});
  auto schedule = switching_cz(g, 0, 1, 2, ScheduleMode::ideal_mode());
  auto run = execute_dense(schedule, g, initial, RunPolicy::sample(rng));
  CHECK(reduced_density(run.state, {4}).trace_distance(before_4) < 1e-10);
  CHECK(reduced_density(run.state, {6}).trace_distance(before_6) < 1e-10);
}

TEST_CASE("trajectory dephasing through the full protocol matches the error model") {
  // With per-qubit flip probability eps_d per interval, any flip leaves the
  // output orthogonal to the ideal cluster state, so the mean infidelity over
  // trajectories is 1 - (1 - eps_d)^3 for the three-qubit protocol.
  std::mt19937_64 rng(20240011);
  for (double g_t2 : {1e2, 1e3}) {
    auto graph = build_chain(2, g_t2);
    auto schedule = switching_cz(graph, 0, 1, 2, ScheduleMode::ideal_mode());
    auto phi = init_product_state(2, {{0, BasisInit::plus}, {1, BasisInit::plus}});
    auto initial = embed_two_qubit_state(phi, 3, 0, 2);
    auto reference = cz_on(initial, 0, 2);
    const int samples = 5000;
    double infidelity = 0.0;
    for (int s = 0; s < samples; ++s) {
      DephasingOptions dephasing{1.0, &rng};
      auto run = execute_dense(schedule, graph, initial, RunPolicy::sample(rng), dephasing);
      infidelity += 1.0 - fidelity(run.state, reference);
    }
    infidelity /= samples;
    const double p = 0.5 * (1.0 - std::exp(-kPi / g_t2));
    const double expected = 1.0 - std::pow(1.0 - p, 3);
    const double sigma = std::sqrt(expected * (1.0 - expected) / samples);
    CHECK(std::abs(infidelity - expected) <= 4.0 * sigma);
  }
}

TEST_CASE("physical mode keeps the protocol close to ideal at large lambda") {
  auto graph = build_chain(2, 2.0);
  std::mt19937_64 rng(157);
  auto phi = random_state(2, rng);
  auto initial = embed_two_qubit_state(phi, 3, 0, 2);
  auto reference = cz_on(initial, 0, 2);
  auto schedule = switching_cz(graph, 0, 1, 2, ScheduleMode::physical(2.0e5));
  auto run = execute_dense(schedule, graph, initial, RunPolicy::force({+1}));
  const double infidelity = 1.0 - fidelity(run.state, reference);
  CHECK(infidelity < 1e-8);  // only the single prep pulse is detuned
  CHECK(infidelity > 0.0);
}
