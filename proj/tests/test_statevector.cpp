#include <doctest.h>

#include <cmath>

#include "qsim/density.hpp"
#include "qsim/protocols.hpp"
#include "qsim/statevector.hpp"
#include "support/oracles.hpp"

using namespace qsim;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::map<int, BasisInit> all_ground(int n) {
  std::map<int, BasisInit> a;
  for (int q = 0; q < n; ++q) a[q] = BasisInit::ground;
  return a;
}
}  // namespace

TEST_CASE("init_product_state") {
  SUBCASE("all ground puts amplitude 1 on index 0") {
    auto s = init_product_state(3, all_ground(3));
    CHECK(std::abs(s.amp(0) - 1.0) < 1e-15);
    CHECK(s.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("middle qubit in plus on a 3-chain") {
    auto a = all_ground(3);
    a[1] = BasisInit::plus;
    auto s = init_product_state(3, a);
    CHECK(std::abs(s.amp(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(s.amp(2) - 1.0 / std::sqrt(2.0)) < 1e-15);  // bit 1 set
    CHECK(std::abs(s.amp(1)) == 0.0);
  }
  SUBCASE("plus_i has <Y> = +1") {
    auto a = all_ground(2);
    a[1] = BasisInit::plus_i;
    auto s = init_product_state(2, a);
    CHECK(pauli_expectation(s, 1, PauliBasis::Y) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pauli_expectation(s, 0, PauliBasis::Z) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("assignment must cover all qubits") {
    CHECK_THROWS_AS(init_product_state(3, all_ground(2)), std::invalid_argument);
  }
  SUBCASE("qubit count capped at 24") { CHECK_THROWS_AS(StateVector(25), std::invalid_argument); }
}

TEST_CASE("evolve_diagonal") {
  auto graph = build_chain(2, 2.0);  // A - anc - C, framed

  SUBCASE("zero duration is the identity") {
    std::mt19937_64 rng(3);
    auto s = random_state(3, rng);
    auto copy = s;
    evolve_diagonal(copy, graph, 0.0);
    CHECK(fidelity(s, copy) == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("pi/g evolution implements CZ on both edges (8x8 oracle)") {
    std::map<int, BasisInit> a{{0, BasisInit::plus}, {1, BasisInit::plus}, {2, BasisInit::plus}};
    auto s = init_product_state(3, a);
    const oracles::Vector expected =
        oracles::expm_unitary(oracles::full_hamiltonian(graph), kPi / 2.0) * oracles::to_vector(s);
    evolve_diagonal(s, graph, kPi / 2.0);
    CHECK(oracles::vector_fidelity(oracles::to_vector(s), expected) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // and at t = pi/g the result is CZ_ab CZ_bc applied to |+++>
    auto target = init_product_state(3, a);
    for (std::size_t i = 0; i < target.dim(); ++i) {
      int phase = 0;
      if ((i & 1) && (i & 2)) phase ^= 1;
      if ((i & 2) && (i & 4)) phase ^= 1;
      if (phase) target.amp(i) = -target.amp(i);
    }
    auto s2 = init_product_state(3, a);
    evolve_diagonal(s2, graph, kPi / 2.0);
    CHECK(fidelity(s2, target) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("phases are additive") {
    std::mt19937_64 rng(17);
    auto s1 = random_state(3, rng);
    auto s2 = s1;
    evolve_diagonal(s1, graph, 0.7);
    evolve_diagonal(s1, graph, 0.9);
    evolve_diagonal(s2, graph, 1.6);
    CHECK(fidelity(s1, s2) == doctest::Approx(1.0).epsilon(1e-13));
  }

  SUBCASE("a grounded qubit decouples its edges") {
    std::mt19937_64 rng(29);
    auto phi = random_state(2, rng);
    auto s1 = embed_two_qubit_state(phi, 3, 0, 1);  // qubit 2 ground
    auto s2 = s1;
    auto chain = build_chain(2, 2.0);
    std::vector<Edge> edges = chain.edges();
    edges[1].g = 17.0;  // edge (1,2): qubit 2 is ground, must not matter
    auto altered = assign_frame(DeviceGraph(chain.qubits(), edges));
    evolve_diagonal(s1, chain, 1.3);
    evolve_diagonal(s2, altered, 1.3);
    // compare marginals of qubits 0,1
    auto rho1 = reduced_density(s1, {0, 1});
    auto rho2 = reduced_density(s2, {0, 1});
    CHECK(rho1.trace_distance(rho2) < 1e-12);

    // the same holds while driving a neighbor of the grounded qubit
    auto d1 = embed_two_qubit_state(phi, 3, 0, 1);
    auto d2 = d1;
    evolve_driven(d1, chain, {1, 2.5, 0.3, 0.9, 0.0});
    evolve_driven(d2, altered, {1, 2.5, 0.3, 0.9, 0.0});
    CHECK(reduced_density(d1, {0, 1}).trace_distance(reduced_density(d2, {0, 1})) < 1e-12);
  }
}

TEST_CASE("evolve_driven") {
  SUBCASE("pi/2 pulse on the ancilla with grounded neighbors gives |+> exactly") {
    auto graph = build_chain(2, 3.0);
    auto s = init_product_state(3, all_ground(3));
    const double lambda = 10.0;
    evolve_driven(s, graph, {1, lambda, kPi / 2.0, kPi / (2.0 * lambda), 0.0});
    auto target = init_product_state(3, {{0, BasisInit::ground},
                                         {1, BasisInit::plus},
                                         {2, BasisInit::ground}});
    CHECK(fidelity(s, target) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("excited neighbors detune the block (matches the full expm oracle)") {
    auto graph = build_chain(2, 3.0);
    std::map<int, BasisInit> a{{0, BasisInit::excited}, {1, BasisInit::ground}, {2, BasisInit::excited}};
    auto s = init_product_state(3, a);
    DrivePulse pulse{1, 5.0, kPi / 2.0, 0.4, 0.0};
    const oracles::Vector expected =
        oracles::expm_unitary(oracles::full_hamiltonian(graph, &pulse), pulse.duration) *
        oracles::to_vector(s);
    evolve_driven(s, graph, pulse);
    CHECK((oracles::to_vector(s) - expected).norm() < 1e-12);
  }

  SUBCASE("matches an RK4 integration of the full Hamiltonian to 1e-9") {
    std::mt19937_64 rng(7);
    auto graph = build_chain(2, std::vector<double>{1.7, 0.9});
    for (int trial = 0; trial < 5; ++trial) {
      auto s = random_state(3, rng);
      std::uniform_real_distribution<double> dist(0.0, 2.0);
      DrivePulse pulse{1, 1.0 + dist(rng), dist(rng) * kPi, 0.5 + dist(rng), 0.0};
      auto h = oracles::full_hamiltonian(graph, &pulse);
      const oracles::Vector expected =
        oracles::integrate_rk4(h, oracles::to_vector(s), pulse.duration, 20000);
      evolve_driven(s, graph, pulse);
      CHECK((oracles::to_vector(s) - expected).norm() < 1e-9);
    }
  }

  SUBCASE("block decomposition equals brute-force expm on random 4-qubit systems") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(0.2, 3.0);
    for (int trial = 0; trial < 8; ++trial) {
      // random tree-ish graph on 4 qubits
      std::vector<Qubit> qubits{{0, QubitRole::logical, dist(rng)},
                                {1, QubitRole::ancilla, dist(rng)},
                                {2, QubitRole::logical, dist(rng)},
                                {3, QubitRole::ancilla, dist(rng)}};
      std::vector<Edge> edges{{0, 1, dist(rng)}, {1, 2, dist(rng)}, {2, 3, dist(rng)}};
      if (trial % 2 == 0) edges.push_back({0, 3, dist(rng)});
      auto graph = assign_frame(DeviceGraph(qubits, edges));
      auto s = random_state(4, rng);
      DrivePulse pulse{trial % 4, dist(rng), dist(rng) * kPi, dist(rng), dist(rng) - 1.5};
      const oracles::Vector expected =
          oracles::expm_unitary(oracles::full_hamiltonian(graph, &pulse), pulse.duration) *
          oracles::to_vector(s);
      evolve_driven(s, graph, pulse);
      CHECK((oracles::to_vector(s) - expected).norm() < 1e-9);
    }
  }

  SUBCASE("lambda = 0 reduces to diagonal evolution") {
    std::mt19937_64 rng(31);
    auto graph = build_chain(2, 1.3);
    auto s1 = random_state(3, rng);
    auto s2 = s1;
    evolve_driven(s1, graph, {1, 0.0, 0.0, 0.8, 0.0});
    evolve_diagonal(s2, graph, 0.8);
    CHECK((oracles::to_vector(s1) - oracles::to_vector(s2)).norm() < 1e-12);
  }

  SUBCASE("frame shift moves the resonance") {
    // Both neighbors excited shift the block by g; an equal and opposite
    // drive-frame shift restores a perfect pi/2 rotation.
    auto graph = build_chain(2, 3.0);
    std::map<int, BasisInit> a{{0, BasisInit::excited}, {1, BasisInit::ground}, {2, BasisInit::excited}};
    auto s = init_product_state(3, a);
    const double lambda = 8.0;
    evolve_driven(s, graph, {1, lambda, kPi / 2.0, kPi / (2.0 * lambda), -2.0 * 3.0});
    auto target = init_product_state(3, {{0, BasisInit::excited},
                                         {1, BasisInit::plus},
                                         {2, BasisInit::excited}});
    CHECK(fidelity(s, target) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("norm preservation across operation mixes") {
  std::mt19937_64 rng(41);
  auto graph = build_chain(2, 2.2);
  auto s = random_state(3, rng);
  for (int step = 0; step < 30; ++step) {
    switch (step % 4) {
      case 0: evolve_diagonal(s, graph, 0.3); break;
      case 1: evolve_driven(s, graph, {step % 3, 1.1, 0.4, 0.2, 0.0}); break;
      case 2: apply_instant_gate(s, step % 3, InstantGate::ry(0.77)); break;
      case 3: apply_instant_gate(s, step % 3, InstantGate::phase(1.23)); break;
    }
    CHECK(std::abs(s.norm_sq() - 1.0) < 1e-12);
  }
}

TEST_CASE("measurement") {
  SUBCASE("|+> measured in Y gives both outcomes with probability 1/2") {
    auto s = init_product_state(1, {{0, BasisInit::plus}});
    auto copy = s;
    auto rec = measure(copy, 0, PauliBasis::Y, MeasurePolicy::force(+1));
    CHECK(rec.probability == doctest::Approx(0.5).epsilon(1e-12));
    copy = s;
    rec = measure(copy, 0, PauliBasis::Y, MeasurePolicy::force(-1));
    CHECK(rec.probability == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("|+1_Y> measured in Y is deterministic") {
    auto s = init_product_state(1, {{0, BasisInit::plus_i}});
    auto rec = measure(s, 0, PauliBasis::Y, MeasurePolicy::force(+1));
    CHECK(rec.outcome == +1);
    CHECK(rec.probability == doctest::Approx(1.0).epsilon(1e-12));
    auto s2 = init_product_state(1, {{0, BasisInit::plus_i}});
    CHECK_THROWS_AS(measure(s2, 0, PauliBasis::Y, MeasurePolicy::force(-1)), std::runtime_error);
  }
  SUBCASE("post-evolution Y measurement reproduces the projected density matrix") {
    auto graph = build_chain(2, 2.0);
    std::mt19937_64 rng(11);
    auto phi = random_state(2, rng);
    auto s = embed_two_qubit_state(phi, 3, 0, 2);
    apply_instant_gate(s, 1, InstantGate::ry(kPi / 2.0));  // ancilla to |+>
    evolve_diagonal(s, graph, kPi / 2.0);

    // oracle: project the pre-measurement vector with P = (1 + Y_b)/2
    const oracles::Vector psi = oracles::to_vector(s);
    oracles::Matrix p_plus =
        0.5 * (oracles::identity(8) + oracles::embed(oracles::pauli_y(), 1, 3));
    const oracles::Vector projected = p_plus * psi;
    const double p = projected.squaredNorm();

    auto rec = measure(s, 1, PauliBasis::Y, MeasurePolicy::force(+1));
    CHECK(rec.probability == doctest::Approx(p).epsilon(1e-12));
    CHECK(oracles::vector_fidelity(oracles::to_vector(s), projected.normalized()) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("seeded sampling is deterministic") {
    std::mt19937_64 rng1(5), rng2(5);
    auto s1 = init_product_state(1, {{0, BasisInit::plus}});
    auto s2 = s1;
    auto r1 = measure(s1, 0, PauliBasis::Z, MeasurePolicy::sample(rng1));
    auto r2 = measure(s2, 0, PauliBasis::Z, MeasurePolicy::sample(rng2));
    CHECK(r1.outcome == r2.outcome);
  }
}

TEST_CASE("instant gates") {
  SUBCASE("S+ S- is the identity") {
    std::mt19937_64 rng(23);
    auto s = random_state(2, rng);
    auto copy = s;
    apply_instant_gate(copy, 0, InstantGate::s_plus());
    apply_instant_gate(copy, 0, InstantGate::s_minus());
    CHECK(fidelity(s, copy) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("Rx(-pi/2) maps |+1_Y> to ground, Rx(+pi/2) maps |-1_Y>") {
    auto plus_i = init_product_state(1, {{0, BasisInit::plus_i}});
    apply_instant_gate(plus_i, 0, InstantGate::rx(kPi / 2.0));
    CHECK(std::abs(plus_i.amp(0)) == doctest::Approx(1.0).epsilon(1e-12));
    auto minus_i = init_product_state(1, {{0, BasisInit::minus_i}});
    apply_instant_gate(minus_i, 0, InstantGate::rx(-kPi / 2.0));
    CHECK(std::abs(minus_i.amp(0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("instant Rx matches the infinite-Rabi drive limit") {
    auto graph = build_chain(2, 2.0);
    std::mt19937_64 rng(37);
    auto s1 = random_state(3, rng);
    auto s2 = s1;
    apply_instant_gate(s1, 1, InstantGate::rx(kPi / 2.0));
    const double lambda = 1e9;
    // drive phase 0 gives H = (lambda/2) X: the lambda -> infinity pi/2 pulse
    evolve_driven(s2, graph, {1, lambda, 0.0, kPi / (2.0 * lambda), 0.0});
    CHECK(fidelity(s1, s2) > 1.0 - 1e-6);
  }
}

TEST_CASE("fidelity") {
  std::mt19937_64 rng(43);
  auto a = random_state(3, rng);
  auto b = random_state(3, rng);
  CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-13));
  auto c = a;
  apply_instant_gate(c, 0, InstantGate::phase(1.234));
  apply_instant_gate(c, 0, InstantGate::phase(-1.234));  // same state
  CHECK(fidelity(a, c) == doctest::Approx(1.0).epsilon(1e-13));
  auto g0 = init_product_state(2, {{0, BasisInit::ground}, {1, BasisInit::ground}});
  auto e0 = init_product_state(2, {{0, BasisInit::excited}, {1, BasisInit::ground}});
  CHECK(fidelity(g0, e0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(fidelity(a, g0), std::invalid_argument);
}

TEST_CASE("reduced_density") {
  SUBCASE("product state stays pure") {
    auto s = init_product_state(3, {{0, BasisInit::plus}, {1, BasisInit::plus_i}, {2, BasisInit::excited}});
    auto rho = reduced_density(s, {0, 1});
    CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("Bell pair reduces to maximally mixed") {
    // CZ|++> is locally equivalent to a Bell pair
    auto s = init_product_state(2, {{0, BasisInit::plus}, {1, BasisInit::plus}});
    for (std::size_t i = 0; i < s.dim(); ++i) {
      if ((i & 1) && (i & 2)) s.amp(i) = -s.amp(i);
    }
    auto rho = reduced_density(s, {1});
    CHECK(rho.purity() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rho.min_eigenvalue() == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("reduced states are PSD with unit trace") {
    std::mt19937_64 rng(47);
    auto s = random_state(5, rng);
    auto rho = reduced_density(s, {1, 3});
    CHECK(rho.is_hermitian(1e-12));
    CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rho.min_eigenvalue() > -1e-10);
  }
  SUBCASE("keep set capped at 6") {
    auto s = StateVector(8);
    CHECK_THROWS_AS(reduced_density(s, {0, 1, 2, 3, 4, 5, 6}), std::invalid_argument);
  }
}

TEST_CASE("state dump round trip") {
  std::mt19937_64 rng(53);
  auto s = random_state(4, rng);
  auto loaded = load_state(dump_state(s));
  REQUIRE(loaded.num_qubits() == 4);
  for (std::size_t i = 0; i < s.dim(); ++i) CHECK(loaded.amp(i) == s.amp(i));
  CHECK_THROWS_AS(load_state("bogus"), std::invalid_argument);
}
