#pragma once

#include "qsim/density.hpp"
#include "qsim/executor.hpp"
#include "qsim/schedule.hpp"

namespace qsim {

/// ideal: preparation rotations are instant gates (the lambda -> infinity
/// limit).  physical: each standalone preparation rotation becomes a
/// finite-Rabi drive of duration pi/(2 lambda), so the detuning-error model
/// can be checked against full simulation.  Feedforward gates stay instant in
/// both modes.
struct ScheduleMode {
  bool ideal = true;
  double lambda = 0.0;

  static ScheduleMode ideal_mode() { return {true, 0.0}; }
  static ScheduleMode physical(double lambda) { return {false, lambda}; }
};

enum class CzTechnique { switching, echo };

/// Interaction switching: prepare the mediating ancilla b in |+>, free-evolve
/// for pi/g, measure b in Y and feed the outcome forward as local gates so
/// the net action is CZ between a and c with b returned to ground.
/// Requires equal couplings g(a,b) = g(b,c); unequal couplings route to
/// echo_cz_pair.
PulseSchedule switching_cz(const DeviceGraph& graph, int a, int b, int c, const ScheduleMode& mode);

/// Spin-echo variant for asymmetric couplings: free-evolve t1, pi-pulse the
/// qubit on the stronger-coupling side, free-evolve t2, undo the pulse and
/// the leftover local phase on b, then measure and feed forward as in the
/// switching scheme.
PulseSchedule echo_cz_pair(const DeviceGraph& graph, int a, int b, int c, const ScheduleMode& mode);

/// CZ between the main qubits a and e across three ancillas b, c, d: echo-CZ
/// a<->c via b, echo-CZ c<->e via d, then measure c in Y and feed forward.
PulseSchedule chain_cz_5(const DeviceGraph& graph, int a, int b, int c, int d, int e,
                         const ScheduleMode& mode);

/// CZ between any pair of the four main qubits of a cross-shaped junction;
/// the off-path arm ancillas stay in the ground state and isolate the other
/// two mains.
PulseSchedule cross_cz(const DeviceGraph& graph, int main_a, int main_b, const ScheduleMode& mode);

struct GenerationPlan {
  PulseSchedule schedule;
  GraphStateCertificate certificate;
};

/// 1D cluster state over the main qubits of a chain device: pair CZs first
/// (mains 1-2, 3-4, ...), then the linking CZs (2-3, 4-5, ...).  The pi-pulse
/// count grows linearly in the chain length.
GenerationPlan generate_1d(const DeviceGraph& graph, bool asymmetric, const ScheduleMode& mode);

enum class Lattice2DMode {
  simultaneous,  // uniform couplings: one global free evolution, then
                 // measurement + feedforward per ancilla in id order
  four_step,     // column pairs, column links, syndrome-left rows, remaining rows
};

GenerationPlan generate_2d(const DeviceGraph& graph, Lattice2DMode lattice_mode,
                           const ScheduleMode& mode);

/// Bilayer 3D cluster unit: vertical chains, then the two in-layer links
/// (giving two disjoint layer graph states), then the slant CZs through the
/// cross junctions that join the layers.  `max_step` in 1..3 truncates the
/// procedure for inspection of intermediate layers.
GenerationPlan generate_3d_bilayer(const DeviceGraph& graph, const ScheduleMode& mode,
                                   int max_step = 3);

struct FailureModel {
  double epsilon_m = 0.0;  // probability that measurement/feedforward fails
};

/// State of the two main qubits after the switching protocol when the
/// measurement or feedforward fails with probability epsilon_m: the mixture
/// of the ideal CZ output and the excited-ancilla branch evolved for the
/// residual time, traced over the ancilla.  `phi_ac` is the 2-qubit input
/// (qubit 0 -> a, qubit 1 -> c); indices of the result follow (a, c).
DensityMatrix apply_failure_model(const DeviceGraph& graph, int a, int b, int c,
                                  const StateVector& phi_ac, const FailureModel& model,
                                  double residual_time);

/// Haar-ish random pure state (normalized complex normals), seeded.
StateVector random_state(int n, std::mt19937_64& rng);

/// Embeds a 2-qubit state onto qubits (a, c) of an n-qubit register, the
/// rest ground.
StateVector embed_two_qubit_state(const StateVector& phi, int n, int a, int c);

}  // namespace qsim
