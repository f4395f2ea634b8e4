#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qsim/device.hpp"

namespace qsim {

class DensityMatrix;

// Basis conventions used by both engines:
//  * basis index bit = 1 means the qubit is excited, bit = 0 means ground;
//    qubit k occupies bit k of the index.
//  * "ground" is the state annihilated by the excited-state projector
//    (1 + sigma_z)/2 of the Hamiltonian; Pauli operators are labeled in the
//    computational convention, so the Z measurement outcome +1 corresponds to
//    ground and the Y outcome +1 to (|g> + i|e>)/sqrt(2).
//  * Global phase is never tracked; equality checks are phase-invariant.

enum class BasisInit { ground, excited, plus, minus, plus_i, minus_i };
enum class PauliBasis { X, Y, Z };

const char* basis_name(PauliBasis basis);
PauliBasis basis_from_name(const std::string& name);

/// Piecewise-constant resonant drive on one qubit.  theta is the microwave
/// phase: theta = 0 drives around X, theta = pi/2 around Y.  frame_shift
/// detunes the drive frame relative to the qubit's rotating frame.
struct DrivePulse {
  int qubit = 0;
  double lambda = 0.0;      // Rabi frequency [rad / T2]
  double theta = 0.0;       // drive phase [rad]
  double duration = 0.0;    // [T2]
  double frame_shift = 0.0; // [rad / T2]
};

struct MeasurementRecord {
  int qubit = 0;
  PauliBasis basis = PauliBasis::Z;
  int outcome = +1;          // eigenvalue of the measured Pauli
  double probability = 0.0;  // pre-measurement probability of this outcome
};

struct MeasurePolicy {
  enum class Kind { sample, force };
  Kind kind = Kind::sample;
  std::mt19937_64* rng = nullptr;
  int forced_outcome = +1;

  static MeasurePolicy sample(std::mt19937_64& rng) { return {Kind::sample, &rng, +1}; }
  static MeasurePolicy force(int outcome) { return {Kind::force, nullptr, outcome}; }
};

enum class GateKind { X, Y, Z, SPlus, SMinus, Rx, Ry, H, Phase };

/// Idealized instantaneous single-qubit unitary (the lambda -> infinity limit
/// of a drive).  `angle` is used by Rx, Ry and Phase.
struct InstantGate {
  GateKind kind = GateKind::X;
  double angle = 0.0;

  static InstantGate x() { return {GateKind::X, 0.0}; }
  static InstantGate y() { return {GateKind::Y, 0.0}; }
  static InstantGate z() { return {GateKind::Z, 0.0}; }
  static InstantGate s_plus() { return {GateKind::SPlus, 0.0}; }
  static InstantGate s_minus() { return {GateKind::SMinus, 0.0}; }
  static InstantGate rx(double theta) { return {GateKind::Rx, theta}; }
  static InstantGate ry(double theta) { return {GateKind::Ry, theta}; }
  static InstantGate h() { return {GateKind::H, 0.0}; }
  static InstantGate phase(double alpha) { return {GateKind::Phase, alpha}; }
};

/// Column-major 2x2 unitary of an instant gate: {m00, m10, m01, m11}.
std::array<std::complex<double>, 4> gate_matrix(const InstantGate& gate);

/// Dense complex amplitude vector for exact dynamics on <= 24 qubits.
class StateVector {
 public:
  static constexpr int kMaxQubits = 24;

  explicit StateVector(int n);  // all qubits ground

  int num_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  std::complex<double>& amp(std::size_t i) { return amps_[i]; }
  const std::complex<double>& amp(std::size_t i) const { return amps_[i]; }
  const std::vector<std::complex<double>>& amps() const { return amps_; }

  double norm_sq() const;
  void normalize();

 private:
  int n_;
  std::vector<std::complex<double>> amps_;
};

StateVector init_product_state(const DeviceGraph& graph, const std::map<int, BasisInit>& assignment);
StateVector init_product_state(int n, const std::map<int, BasisInit>& assignment);

/// Exact diagonal Ising evolution: every basis configuration acquires the
/// phase exp(-i E t) with E = sum_edges g [both excited]
///                          + sum_q (detuning_q - half_coupling_sum_q) [q excited].
/// No time stepping is involved.
void evolve_diagonal(StateVector& state, const DeviceGraph& graph, double duration);

/// Exact driven evolution by block decomposition: for each configuration of
/// the non-driven qubits the driven qubit sees a 2x2 Hamiltonian (diagonal
/// energies from the configuration, off-diagonal (lambda/2) e^{-i theta});
/// each block is exponentiated in closed form.
void evolve_driven(StateVector& state, const DeviceGraph& graph, const DrivePulse& pulse);

/// Projective measurement in the X, Y or Z basis.  The state collapses and is
/// renormalized; the record carries the exact pre-measurement probability.
/// Forcing an outcome of probability < 1e-12 throws.
MeasurementRecord measure(StateVector& state, int qubit, PauliBasis basis, MeasurePolicy policy);

void apply_instant_gate(StateVector& state, int qubit, const InstantGate& gate);

/// |<a|b>|^2, global-phase invariant.  Throws on dimension mismatch.
double fidelity(const StateVector& a, const StateVector& b);

/// Partial trace over the complement of `keep` (at most 6 qubits kept).
/// Row/column indexing follows the order of `keep`.
DensityMatrix reduced_density(const StateVector& state, const std::vector<int>& keep);

/// Expectation value of a single-qubit Pauli.
double pauli_expectation(const StateVector& state, int qubit, PauliBasis basis);

/// Applies Z to each qubit independently with probability
/// (1 - exp(-t/T2))/2; one step of a Monte Carlo dephasing trajectory.
void apply_dephasing_interval(StateVector& state, double duration, double t2, std::mt19937_64& rng);

/// Debug dump: 8-byte little-endian qubit count followed by 2^n little-endian
/// (re, im) float64 pairs.
std::string dump_state(const StateVector& state);
StateVector load_state(const std::string& bytes);

}  // namespace qsim
