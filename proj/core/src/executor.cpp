#include "qsim/executor.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace qsim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kPhaseTol = 1e-9;

double wrap_phase(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  if (phi > kTwoPi - kPhaseTol) phi = 0.0;
  return phi;
}

bool near(double a, double b) { return std::abs(a - b) <= kPhaseTol; }

std::string pattern_for(const FeedforwardStep& ff, const std::vector<int>& outcomes) {
  std::string pattern;
  for (int ordinal : ff.measurements) {
    pattern += outcomes.at(static_cast<std::size_t>(ordinal)) > 0 ? '+' : '-';
  }
  return pattern;
}

}  // namespace

MeasurePolicy RunPolicy::for_ordinal(int ordinal) const {
  if (ordinal < static_cast<int>(forced.size()) && forced[static_cast<std::size_t>(ordinal)] != 0) {
    return MeasurePolicy::force(forced[static_cast<std::size_t>(ordinal)]);
  }
  if (rng == nullptr) {
    throw std::invalid_argument("no forced outcome for measurement " + std::to_string(ordinal) +
                                " and no RNG provided");
  }
  return MeasurePolicy::sample(*rng);
}

DenseRunResult execute_dense(const PulseSchedule& schedule, const DeviceGraph& graph,
                             StateVector initial, const RunPolicy& policy,
                             const std::optional<DephasingOptions>& dephasing) {
  schedule.validate();
  if (graph.num_qubits() != initial.num_qubits()) {
    throw std::invalid_argument("graph size does not match state");
  }
  DenseRunResult result{std::move(initial), {}};
  std::vector<int> outcomes;

  for (const auto& step : schedule.steps()) {
    if (const auto* fe = std::get_if<FreeEvolveStep>(&step)) {
      evolve_diagonal(result.state, graph, fe->duration);
      if (dephasing) {
        apply_dephasing_interval(result.state, fe->duration, dephasing->t2, *dephasing->rng);
      }
    } else if (const auto* dr = std::get_if<DriveStep>(&step)) {
      evolve_driven(result.state, graph, dr->pulse);
    } else if (const auto* inst = std::get_if<InstantStep>(&step)) {
      apply_instant_gate(result.state, inst->qubit, inst->gate);
    } else if (const auto* ms = std::get_if<MeasureStep>(&step)) {
      const int ordinal = static_cast<int>(outcomes.size());
      const auto record =
          measure(result.state, ms->qubit, ms->basis, policy.for_ordinal(ordinal));
      outcomes.push_back(record.outcome);
      result.records.push_back(record);
    } else if (const auto* ff = std::get_if<FeedforwardStep>(&step)) {
      const auto it = ff->branches.find(pattern_for(*ff, outcomes));
      if (it != ff->branches.end()) {
        for (const auto& g : it->second) apply_instant_gate(result.state, g.qubit, g.gate);
      }
    }
  }
  return result;
}

namespace {

/// Lazily accumulated diagonal unitary exp(-i [sum_e phi_e n_a n_b
/// + sum_q alpha_q n_q]) tracked alongside a tableau.  Phases stay symbolic
/// until an operation forces them onto a qubit, at which point they must be
/// Clifford (0 or pi per edge, multiples of pi/2 per qubit) or vanish against
/// a deterministically grounded endpoint.
class DiagonalAccumulator {
 public:
  DiagonalAccumulator(const DeviceGraph& graph, StabilizerTableau& tab)
      : graph_(graph), tab_(tab), edge_phase_(graph.edges().size(), 0.0),
        qubit_phase_(static_cast<std::size_t>(graph.num_qubits()), 0.0) {}

  void free_evolve(double duration) {
    const auto& edges = graph_.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edge_phase_[i] = wrap_phase(edge_phase_[i] + edges[i].g * duration);
    }
    for (const auto& q : graph_.qubits()) {
      const double local = graph_.detuning(q.id) - graph_.half_coupling_sum(q.id);
      if (local != 0.0) {
        qubit_phase_[static_cast<std::size_t>(q.id)] =
            wrap_phase(qubit_phase_[static_cast<std::size_t>(q.id)] + local * duration);
      }
    }
  }

  /// X (or Y) on q maps n_q -> 1 - n_q inside pending terms: every incident
  /// edge phase negates and spills onto the far endpoint; the local phase
  /// negates (constants are global phase).
  void conjugate_bit_flip(int q) {
    const auto& edges = graph_.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (edges[i].a != q && edges[i].b != q) continue;
      const int other = edges[i].a == q ? edges[i].b : edges[i].a;
      qubit_phase_[static_cast<std::size_t>(other)] =
          wrap_phase(qubit_phase_[static_cast<std::size_t>(other)] + edge_phase_[i]);
      edge_phase_[i] = wrap_phase(-edge_phase_[i]);
    }
    qubit_phase_[static_cast<std::size_t>(q)] =
        wrap_phase(-qubit_phase_[static_cast<std::size_t>(q)]);
  }

  void add_local_phase(int q, double theta) {
    // Phase(theta) = diag(1, e^{i theta}) = exp(+i theta n_q).
    qubit_phase_[static_cast<std::size_t>(q)] =
        wrap_phase(qubit_phase_[static_cast<std::size_t>(q)] - theta);
  }

  void flush_qubit(int q) {
    const auto& edges = graph_.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (edges[i].a != q && edges[i].b != q) continue;
      resolve_edge(i);
    }
    resolve_local(q);
  }

  void flush_all() {
    for (std::size_t i = 0; i < edge_phase_.size(); ++i) resolve_edge(i);
    for (int q = 0; q < graph_.num_qubits(); ++q) resolve_local(q);
  }

 private:
  int determinism(int q) {
    PauliString p = PauliString::identity(graph_.num_qubits());
    p.set(q, PauliBasis::Z);
    return tab_.pauli_expectation(p);  // +1 ground, -1 excited, 0 random
  }

  void resolve_edge(std::size_t index) {
    double phi = edge_phase_[index];
    if (near(phi, 0.0)) {
      edge_phase_[index] = 0.0;
      return;
    }
    const int a = graph_.edges()[index].a;
    const int b = graph_.edges()[index].b;
    const int da = determinism(a);
    if (da == +1) {
      edge_phase_[index] = 0.0;
      return;
    }
    const int db = determinism(b);
    if (db == +1) {
      edge_phase_[index] = 0.0;
      return;
    }
    if (da == -1) {  // n_a = 1 on the whole support: phase moves to b
      qubit_phase_[static_cast<std::size_t>(b)] =
          wrap_phase(qubit_phase_[static_cast<std::size_t>(b)] + phi);
      edge_phase_[index] = 0.0;
      return;
    }
    if (db == -1) {
      qubit_phase_[static_cast<std::size_t>(a)] =
          wrap_phase(qubit_phase_[static_cast<std::size_t>(a)] + phi);
      edge_phase_[index] = 0.0;
      return;
    }
    if (near(phi, kPi)) {
      tab_.apply_cz(a, b);
      edge_phase_[index] = 0.0;
      return;
    }
    throw std::runtime_error("schedule is not Clifford-replayable: pending interaction phase " +
                             std::to_string(phi) + " on edge (" + std::to_string(a) + "," +
                             std::to_string(b) + ")");
  }

  void resolve_local(int q) {
    double alpha = qubit_phase_[static_cast<std::size_t>(q)];
    if (near(alpha, 0.0)) {
      qubit_phase_[static_cast<std::size_t>(q)] = 0.0;
      return;
    }
    const int d = determinism(q);
    if (d != 0) {  // identity on the support (ground) or a global phase (excited)
      qubit_phase_[static_cast<std::size_t>(q)] = 0.0;
      return;
    }
    // exp(-i alpha n_q): pi/2 -> S-, pi -> Z, 3pi/2 -> S+.
    if (near(alpha, kPi / 2.0)) {
      tab_.apply_sdg(q);
    } else if (near(alpha, kPi)) {
      tab_.apply_z(q);
    } else if (near(alpha, 3.0 * kPi / 2.0)) {
      tab_.apply_s(q);
    } else {
      throw std::runtime_error("schedule is not Clifford-replayable: pending local phase " +
                               std::to_string(alpha) + " on qubit " + std::to_string(q));
    }
    qubit_phase_[static_cast<std::size_t>(q)] = 0.0;
  }

  const DeviceGraph& graph_;
  StabilizerTableau& tab_;
  std::vector<double> edge_phase_;
  std::vector<double> qubit_phase_;
};

void apply_instant_tableau(StabilizerTableau& tab, DiagonalAccumulator& acc, int q,
                           const InstantGate& gate) {
  switch (gate.kind) {
    case GateKind::X:
      acc.conjugate_bit_flip(q);
      tab.apply_x(q);
      return;
    case GateKind::Y:
      acc.conjugate_bit_flip(q);
      tab.apply_y(q);
      return;
    case GateKind::Z:
      tab.apply_z(q);
      return;
    case GateKind::SPlus:
      tab.apply_s(q);
      return;
    case GateKind::SMinus:
      tab.apply_sdg(q);
      return;
    case GateKind::Phase:
      acc.add_local_phase(q, gate.angle);
      return;
    case GateKind::H:
      acc.flush_qubit(q);
      tab.apply_h(q);
      return;
    case GateKind::Rx:
    case GateKind::Ry: {
      acc.flush_qubit(q);
      const double angle = std::remainder(gate.angle, kTwoPi);  // (-pi, pi]
      const bool rx = gate.kind == GateKind::Rx;
      if (near(std::abs(angle), kPi / 2.0)) {
        if (rx) {
          tab.apply_rx(q, angle > 0);
        } else {
          tab.apply_ry(q, angle > 0);
        }
      } else if (near(std::abs(angle), kPi)) {
        if (rx) {
          tab.apply_x(q);
        } else {
          tab.apply_y(q);
        }
      } else if (near(angle, 0.0)) {
        // identity
      } else {
        throw std::runtime_error("rotation angle is not Clifford on the tableau backend");
      }
      return;
    }
  }
  throw std::logic_error("unreachable gate kind");
}

}  // namespace

TableauRunResult execute_tableau(const PulseSchedule& schedule, const DeviceGraph& graph,
                                 const RunPolicy& policy) {
  return execute_tableau(schedule, graph, StabilizerTableau(graph.num_qubits()), policy);
}

TableauRunResult execute_tableau(const PulseSchedule& schedule, const DeviceGraph& graph,
                                 StabilizerTableau initial, const RunPolicy& policy) {
  schedule.validate();
  if (graph.num_qubits() != initial.num_qubits()) {
    throw std::invalid_argument("graph size does not match tableau");
  }
  TableauRunResult result{std::move(initial), {}};
  DiagonalAccumulator acc(graph, result.tableau);
  std::vector<int> outcomes;

  for (const auto& step : schedule.steps()) {
    if (const auto* fe = std::get_if<FreeEvolveStep>(&step)) {
      acc.free_evolve(fe->duration);
    } else if (std::holds_alternative<DriveStep>(step)) {
      throw std::runtime_error("finite-Rabi drives cannot run on the tableau backend");
    } else if (const auto* inst = std::get_if<InstantStep>(&step)) {
      apply_instant_tableau(result.tableau, acc, inst->qubit, inst->gate);
    } else if (const auto* ms = std::get_if<MeasureStep>(&step)) {
      acc.flush_qubit(ms->qubit);
      const int ordinal = static_cast<int>(outcomes.size());
      const auto record = result.tableau.measure(ms->qubit, ms->basis, policy.for_ordinal(ordinal));
      outcomes.push_back(record.outcome);
      result.records.push_back(record);
    } else if (const auto* ff = std::get_if<FeedforwardStep>(&step)) {
      const auto it = ff->branches.find(pattern_for(*ff, outcomes));
      if (it != ff->branches.end()) {
        for (const auto& g : it->second) {
          apply_instant_tableau(result.tableau, acc, g.qubit, g.gate);
        }
      }
    }
  }
  acc.flush_all();
  return result;
}

std::vector<std::vector<int>> enumerate_outcome_patterns(const PulseSchedule& schedule,
                                                         const DeviceGraph& graph,
                                                         const StateVector& initial) {
  schedule.validate();
  std::vector<std::vector<int>> patterns;
  const auto& steps = schedule.steps();

  std::function<void(std::size_t, StateVector, std::vector<int>)> walk =
      [&](std::size_t step_index, StateVector state, std::vector<int> outcomes) {
        for (std::size_t s = step_index; s < steps.size(); ++s) {
          const auto& step = steps[s];
          if (const auto* fe = std::get_if<FreeEvolveStep>(&step)) {
            evolve_diagonal(state, graph, fe->duration);
          } else if (const auto* dr = std::get_if<DriveStep>(&step)) {
            evolve_driven(state, graph, dr->pulse);
          } else if (const auto* inst = std::get_if<InstantStep>(&step)) {
            apply_instant_gate(state, inst->qubit, inst->gate);
          } else if (const auto* ms = std::get_if<MeasureStep>(&step)) {
            for (int outcome : {+1, -1}) {
              StateVector branch = state;
              std::vector<int> branch_outcomes = outcomes;
              try {
                measure(branch, ms->qubit, ms->basis, MeasurePolicy::force(outcome));
              } catch (const std::runtime_error&) {
                continue;  // zero-probability branch
              }
              branch_outcomes.push_back(outcome);
              walk(s + 1, std::move(branch), std::move(branch_outcomes));
            }
            return;
          } else if (const auto* ff = std::get_if<FeedforwardStep>(&step)) {
            const auto it = ff->branches.find(pattern_for(*ff, outcomes));
            if (it != ff->branches.end()) {
              for (const auto& g : it->second) apply_instant_gate(state, g.qubit, g.gate);
            }
          }
        }
        patterns.push_back(std::move(outcomes));
      };

  walk(0, initial, {});
  return patterns;
}

}  // namespace qsim
