#include "qsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_ancilla_between(const DeviceGraph& graph, int a, int b, int c) {
  if (a == c || a == b || b == c) throw std::invalid_argument("qubits must be distinct");
  if (graph.qubit(b).role != QubitRole::ancilla) {
    throw std::invalid_argument("the mediating qubit must be an ancilla");
  }
  const auto& nb = graph.neighbors(b);
  std::vector<int> expected{a, c};
  std::sort(expected.begin(), expected.end());
  if (nb != expected) {
    throw std::invalid_argument("ancilla " + std::to_string(b) +
                                " must be adjacent to exactly the two target qubits");
  }
}

void append_prep_plus(PulseSchedule& schedule, int q, const ScheduleMode& mode) {
  if (mode.ideal) {
    schedule.add_instant(InstantGate::ry(kPi / 2.0), q);
  } else {
    if (!(mode.lambda > 0.0)) throw std::invalid_argument("physical mode requires lambda > 0");
    schedule.add_drive({q, mode.lambda, kPi / 2.0, kPi / (2.0 * mode.lambda), 0.0});
  }
}

/// Measurement-based reset followed by the |+> preparation; a no-op reset on
/// a fresh device, and what makes re-running a generation schedule after
/// measuring out a layer produce a fresh cluster.
void append_reset_prep_plus(PulseSchedule& schedule, int q, const ScheduleMode& mode) {
  const int ordinal = schedule.add_measure(q, PauliBasis::Z);
  FeedforwardStep ff;
  ff.measurements = {ordinal};
  ff.branches["-"] = {InstantStep{InstantGate::x(), q}};
  schedule.add_feedforward(std::move(ff));
  append_prep_plus(schedule, q, mode);
}

/// Y measurement on the mediating qubit plus the outcome-conditioned local
/// corrections that complete a CZ between u and v and return b to ground.
void append_measure_feedforward(PulseSchedule& schedule, int u, int b, int v) {
  const int ordinal = schedule.add_measure(b, PauliBasis::Y);
  FeedforwardStep ff;
  ff.measurements = {ordinal};
  ff.branches["+"] = {InstantStep{InstantGate::s_minus(), u},
                      InstantStep{InstantGate::rx(kPi / 2.0), b},
                      InstantStep{InstantGate::s_minus(), v}};
  ff.branches["-"] = {InstantStep{InstantGate::s_plus(), u},
                      InstantStep{InstantGate::rx(-kPi / 2.0), b},
                      InstantStep{InstantGate::s_plus(), v}};
  schedule.add_feedforward(std::move(ff));
}

void append_switching_block(PulseSchedule& schedule, const DeviceGraph& graph, int a, int b, int c,
                            const ScheduleMode& mode) {
  const double g1 = graph.coupling(a, b);
  const double g2 = graph.coupling(b, c);
  if (g1 != g2) {
    throw std::invalid_argument("switching requires equal couplings; use the echo variant");
  }
  append_prep_plus(schedule, b, mode);
  schedule.add_free_evolve(kPi / g1);
  append_measure_feedforward(schedule, a, b, c);
}

void append_echo_block(PulseSchedule& schedule, const DeviceGraph& graph, int a, int b, int c,
                       const ScheduleMode& mode) {
  const double g_ab = graph.coupling(a, b);
  const double g_bc = graph.coupling(b, c);
  const EchoTiming timing = spin_echo_times(g_ab, g_bc);
  // The pi pulses refocus the stronger-coupling side.
  const int pulsed = timing.swapped ? c : a;
  const double g_big = std::max(g_ab, g_bc);

  append_prep_plus(schedule, b, mode);
  schedule.add_free_evolve(timing.t1);
  schedule.add_instant(InstantGate::x(), pulsed);
  schedule.add_free_evolve(timing.t2);
  schedule.add_instant(InstantGate::x(), pulsed);
  // Leftover local phase exp(-i g_big t2 n_b) from evolving with the pulsed
  // side flipped.
  if (timing.t2 != 0.0) {
    schedule.add_instant(InstantGate::phase(g_big * timing.t2), b);
  }
  append_measure_feedforward(schedule, a, b, c);
}

void append_cz_block(PulseSchedule& schedule, const DeviceGraph& graph, int a, int b, int c,
                     const ScheduleMode& mode, CzTechnique technique) {
  require_ancilla_between(graph, a, b, c);
  if (technique == CzTechnique::switching) {
    append_switching_block(schedule, graph, a, b, c, mode);
  } else {
    append_echo_block(schedule, graph, a, b, c, mode);
  }
}

void append_chain5_blocks(PulseSchedule& schedule, const DeviceGraph& graph, int a, int b, int c,
                          int d, int e, const ScheduleMode& mode) {
  for (int anc : {b, c, d}) {
    if (graph.qubit(anc).role != QubitRole::ancilla) {
      throw std::invalid_argument("chain CZ requires ancillas at the three middle positions");
    }
  }
  for (auto [u, v] : {std::pair{a, b}, {b, c}, {c, d}, {d, e}}) {
    if (!graph.adjacent(u, v)) {
      throw std::invalid_argument("chain CZ requires a connected 5-qubit path");
    }
  }
  append_prep_plus(schedule, c, mode);
  append_echo_block(schedule, graph, a, b, c, mode);
  append_echo_block(schedule, graph, c, d, e, mode);
  append_measure_feedforward(schedule, a, c, e);
}

CzTechnique technique_for(const DeviceGraph& graph, bool force_echo) {
  return (force_echo || !graph.uniform_coupling()) ? CzTechnique::echo : CzTechnique::switching;
}

}  // namespace

PulseSchedule switching_cz(const DeviceGraph& graph, int a, int b, int c, const ScheduleMode& mode) {
  PulseSchedule schedule;
  require_ancilla_between(graph, a, b, c);
  append_switching_block(schedule, graph, a, b, c, mode);
  schedule.validate();
  return schedule;
}

PulseSchedule echo_cz_pair(const DeviceGraph& graph, int a, int b, int c, const ScheduleMode& mode) {
  PulseSchedule schedule;
  require_ancilla_between(graph, a, b, c);
  append_echo_block(schedule, graph, a, b, c, mode);
  schedule.validate();
  return schedule;
}

PulseSchedule chain_cz_5(const DeviceGraph& graph, int a, int b, int c, int d, int e,
                         const ScheduleMode& mode) {
  if (!graph.is_main(a) || !graph.is_main(e)) {
    throw std::invalid_argument("chain CZ endpoints must be main qubits");
  }
  PulseSchedule schedule;
  append_chain5_blocks(schedule, graph, a, b, c, d, e, mode);
  schedule.validate();
  return schedule;
}

PulseSchedule cross_cz(const DeviceGraph& graph, int main_a, int main_b, const ScheduleMode& mode) {
  if (main_a == main_b) throw std::invalid_argument("cross CZ requires two distinct main qubits");
  for (const auto& cross : find_cross_shapes(graph)) {
    int arm_a = -1, arm_b = -1;
    for (std::size_t i = 0; i < cross.mains.size(); ++i) {
      if (cross.mains[i] == main_a) arm_a = cross.arms[i];
      if (cross.mains[i] == main_b) arm_b = cross.arms[i];
    }
    if (arm_a < 0 || arm_b < 0) continue;
    PulseSchedule schedule;
    append_chain5_blocks(schedule, graph, main_a, arm_a, cross.center, arm_b, main_b, mode);
    schedule.validate();
    return schedule;
  }
  throw std::invalid_argument("the requested pair does not share a cross-shaped junction");
}

namespace {

struct ChainLayout {
  int m = 0;                  // number of main qubits
  std::vector<int> mains;     // ids, left to right
  std::vector<int> ancillas;  // ancillas[k] sits between mains[k] and mains[k+1]
};

ChainLayout chain_layout(const DeviceGraph& graph) {
  ChainLayout layout;
  const int n = graph.num_qubits();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("not a chain device");
  for (int q = 0; q < n; ++q) {
    const bool should_be_main = (q % 2 == 0);
    if (graph.is_main(q) != should_be_main) throw std::invalid_argument("not a chain device");
    if (should_be_main) {
      layout.mains.push_back(q);
    } else {
      layout.ancillas.push_back(q);
      if (!graph.adjacent(q - 1, q) || !graph.adjacent(q, q + 1)) {
        throw std::invalid_argument("not a chain device");
      }
    }
  }
  layout.m = static_cast<int>(layout.mains.size());
  if (layout.m % 2 != 0) throw std::invalid_argument("chain generation requires an even main count");
  return layout;
}

}  // namespace

GenerationPlan generate_1d(const DeviceGraph& graph, bool asymmetric, const ScheduleMode& mode) {
  const ChainLayout layout = chain_layout(graph);
  const CzTechnique technique = technique_for(graph, asymmetric);

  GenerationPlan plan;
  plan.certificate.vertices = layout.mains;
  for (int k = 0; k + 1 < layout.m; ++k) {
    plan.certificate.edges.push_back({layout.mains[static_cast<std::size_t>(k)],
                                      layout.mains[static_cast<std::size_t>(k) + 1]});
  }

  for (int main : layout.mains) append_reset_prep_plus(plan.schedule, main, mode);
  // Pair CZs (k even), then linking CZs (k odd); the inactive ancillas are
  // ground throughout, which switches those interactions off.
  for (int parity : {0, 1}) {
    for (int k = parity; k + 1 < layout.m; k += 2) {
      append_cz_block(plan.schedule, graph, layout.mains[static_cast<std::size_t>(k)],
                      layout.ancillas[static_cast<std::size_t>(k)],
                      layout.mains[static_cast<std::size_t>(k) + 1], mode, technique);
    }
  }
  plan.schedule.validate();
  return plan;
}

namespace {

struct Lattice2DLayout {
  int m = 0;
  std::vector<std::vector<int>> main_id;  // [row][col]
};

Lattice2DLayout lattice_layout(const DeviceGraph& graph) {
  const int n = graph.num_qubits();
  const int m = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 3.0 * n)) / 3.0));
  if (3 * m * m - 2 * m != n || m < 2 || m % 2 != 0) {
    throw std::invalid_argument("not a 2D lattice device");
  }
  // Rebuild the deterministic row-major id layout of the refined grid.
  Lattice2DLayout layout;
  layout.m = m;
  layout.main_id.assign(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(m), -1));
  const int span = 2 * m - 1;
  int id = 0;
  for (int r = 0; r < span; ++r) {
    for (int c = 0; c < span; ++c) {
      const bool main_site = (r % 2 == 0) && (c % 2 == 0);
      const bool anc_site = (r % 2) != (c % 2);
      if (!main_site && !anc_site) continue;
      if (main_site) {
        if (!graph.is_main(id)) throw std::invalid_argument("not a 2D lattice device");
        layout.main_id[static_cast<std::size_t>(r / 2)][static_cast<std::size_t>(c / 2)] = id;
      }
      ++id;
    }
  }
  return layout;
}

int shared_ancilla(const DeviceGraph& graph, int main_a, int main_b) {
  for (int u : graph.neighbors(main_a)) {
    if (graph.qubit(u).role == QubitRole::ancilla && graph.adjacent(u, main_b)) return u;
  }
  throw std::invalid_argument("main qubits share no mediating ancilla");
}

}  // namespace

GenerationPlan generate_2d(const DeviceGraph& graph, Lattice2DMode lattice_mode,
                           const ScheduleMode& mode) {
  const Lattice2DLayout layout = lattice_layout(graph);
  const int m = layout.m;

  GenerationPlan plan;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      plan.certificate.vertices.push_back(layout.main_id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      if (i + 1 < m) {
        plan.certificate.edges.push_back(
            {layout.main_id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
             layout.main_id[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)]});
      }
      if (j + 1 < m) {
        plan.certificate.edges.push_back(
            {layout.main_id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
             layout.main_id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) + 1]});
      }
    }
  }

  for (int v : plan.certificate.vertices) append_reset_prep_plus(plan.schedule, v, mode);

  if (lattice_mode == Lattice2DMode::simultaneous) {
    if (!graph.uniform_coupling()) {
      throw std::invalid_argument("the simultaneous protocol requires uniform couplings");
    }
    const double g = graph.edges().front().g;
    for (int anc : graph.ancilla_qubits()) append_prep_plus(plan.schedule, anc, mode);
    plan.schedule.add_free_evolve(kPi / g);
    // The per-ancilla measurement projectors commute, so sequential
    // measurement + feedforward in id order is exact.
    for (int anc : graph.ancilla_qubits()) {
      const auto& nb = graph.neighbors(anc);
      append_measure_feedforward(plan.schedule, nb.front(), anc, nb.back());
    }
  } else {
    const CzTechnique technique = technique_for(graph, true);
    auto add_cz = [&](int main_a, int main_b) {
      append_cz_block(plan.schedule, graph, main_a, shared_ancilla(graph, main_a, main_b), main_b,
                      mode, technique);
    };
    auto is_syndrome = [&](int id) {
      const QubitRole role = graph.qubit(id).role;
      return role == QubitRole::syndrome_x || role == QubitRole::syndrome_z;
    };
    // 1: column pairs, 2: column links, 3: syndrome-left rows, 4: the rest.
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i + 1 < m; i += 2) {
        add_cz(layout.main_id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
               layout.main_id[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)]);
      }
    }
    for (int j = 0; j < m; ++j) {
      for (int i = 1; i + 1 < m; i += 2) {
        add_cz(layout.main_id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
               layout.main_id[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)]);
      }
    }
    for (int pass : {0, 1}) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j + 1 < m; ++j) {
          const int left = layout.main_id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          const int right = layout.main_id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) + 1];
          const bool syndrome_left = is_syndrome(left);
          if ((pass == 0) == syndrome_left) add_cz(left, right);
        }
      }
    }
  }
  plan.schedule.validate();
  return plan;
}

namespace {

// Cell-local ids of the bilayer tile; see the transcription table in
// device.cpp.
enum BilayerLocal : int {
  kS1 = 0, kL1 = 1, kS2 = 2, kS3 = 3, kL2 = 4, kS4 = 5,
  kA1 = 6, kA2 = 7, kA3 = 8, kA4 = 9,
  kC0 = 10, kUL1 = 11, kUL2 = 12,
  kC1 = 15, kWL2 = 16, kWL1 = 18,
  kH1 = 20, kH2 = 21,
};

}  // namespace

GenerationPlan generate_3d_bilayer(const DeviceGraph& graph, const ScheduleMode& mode, int max_step) {
  const int n = graph.num_qubits();
  if (n % 28 != 0) throw std::invalid_argument("not a bilayer unit-cell device");
  const int tiles = n / 28;
  if (max_step < 1 || max_step > 3) throw std::invalid_argument("max_step must be 1..3");
  const CzTechnique technique = technique_for(graph, !graph.uniform_coupling());

  GenerationPlan plan;
  auto id = [&](int tile, int local) { return 28 * tile + local; };

  for (int t = 0; t < tiles; ++t) {
    for (int local : {kS1, kL1, kS2, kS3, kL2, kS4}) {
      plan.certificate.vertices.push_back(id(t, local));
      append_reset_prep_plus(plan.schedule, id(t, local), mode);
    }
  }

  auto add_edge = [&](int u, int v) { plan.certificate.edges.push_back({u, v}); };
  auto add_cz = [&](int u, int anc, int v) {
    append_cz_block(plan.schedule, graph, u, anc, v, mode, technique);
    add_edge(u, v);
  };

  // Step 1: vertical chains within each layer column.
  for (int t = 0; t < tiles; ++t) {
    add_cz(id(t, kS1), id(t, kA1), id(t, kL1));
    add_cz(id(t, kS3), id(t, kA3), id(t, kL2));
  }
  // Step 2: in-layer horizontal links; afterwards the bit-flip layer and the
  // dephasing layer are two disjoint graph states.
  if (max_step >= 2) {
    for (int t = 0; t < tiles; ++t) {
      add_cz(id(t, kL1), id(t, kA2), id(t, kS2));
      add_cz(id(t, kL2), id(t, kA4), id(t, kS4));
      if (t + 1 < tiles) {
        add_cz(id(t, kS2), id(t, kH1), id(t + 1, kL1));
        add_cz(id(t, kS4), id(t, kH2), id(t + 1, kL2));
      }
    }
  }
  // Step 3: slant CZs between logical pairs through the cross junctions.
  if (max_step >= 3) {
    for (int t = 0; t < tiles; ++t) {
      append_chain5_blocks(plan.schedule, graph, id(t, kL1), id(t, kUL1), id(t, kC0), id(t, kUL2),
                           id(t, kL2), mode);
      add_edge(id(t, kL1), id(t, kL2));
      if (t + 1 < tiles) {
        append_chain5_blocks(plan.schedule, graph, id(t, kL2), id(t, kWL2), id(t, kC1),
                             id(t, kWL1), id(t + 1, kL1), mode);
        add_edge(id(t, kL2), id(t + 1, kL1));
      }
    }
  }
  plan.schedule.validate();
  return plan;
}

DensityMatrix apply_failure_model(const DeviceGraph& graph, int a, int b, int c,
                                  const StateVector& phi_ac, const FailureModel& model,
                                  double residual_time) {
  if (model.epsilon_m < 0.0 || model.epsilon_m > 1.0) {
    throw std::invalid_argument("epsilon_m must lie in [0, 1]");
  }
  if (phi_ac.num_qubits() != 2) throw std::invalid_argument("phi_ac must be a 2-qubit state");
  require_ancilla_between(graph, a, b, c);

  StateVector initial = embed_two_qubit_state(phi_ac, graph.num_qubits(), a, c);
  const PulseSchedule protocol = switching_cz(graph, a, b, c, ScheduleMode::ideal_mode());
  StateVector ideal =
      execute_dense(protocol, graph, initial, RunPolicy::force({+1})).state;
  const DensityMatrix rho_ideal = reduced_density(ideal, {a, c});

  // Failed branch: the ancilla ends excited instead of ground and the Ising
  // interaction keeps running for the residual time.
  StateVector failed = ideal;
  apply_instant_gate(failed, b, InstantGate::x());
  evolve_diagonal(failed, graph, residual_time);
  const DensityMatrix rho_failed = reduced_density(failed, {a, c});

  return rho_ideal.mix(rho_failed, model.epsilon_m);
}

StateVector random_state(int n, std::mt19937_64& rng) {
  StateVector state(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    state.amp(i) = {normal(rng), normal(rng)};
  }
  state.normalize();
  return state;
}

StateVector embed_two_qubit_state(const StateVector& phi, int n, int a, int c) {
  if (phi.num_qubits() != 2) throw std::invalid_argument("expected a 2-qubit state");
  if (a == c || a < 0 || c < 0 || a >= n || c >= n) throw std::invalid_argument("bad qubit indices");
  StateVector state(n);
  state.amp(0) = 0.0;
  for (std::size_t bits = 0; bits < 4; ++bits) {
    std::size_t index = 0;
    if (bits & 1) index |= std::size_t{1} << a;
    if (bits & 2) index |= std::size_t{1} << c;
    state.amp(index) = phi.amp(bits);
  }
  return state;
}

}  // namespace qsim
