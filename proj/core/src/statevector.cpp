#include "qsim/statevector.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "qsim/density.hpp"

namespace qsim {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};
constexpr double kSqrtHalf = 0.70710678118654752440;

std::array<cplx, 2> basis_amplitudes(BasisInit init) {
  switch (init) {
    case BasisInit::ground: return {cplx{1, 0}, cplx{0, 0}};
    case BasisInit::excited: return {cplx{0, 0}, cplx{1, 0}};
    case BasisInit::plus: return {cplx{kSqrtHalf, 0}, cplx{kSqrtHalf, 0}};
    case BasisInit::minus: return {cplx{kSqrtHalf, 0}, cplx{-kSqrtHalf, 0}};
    case BasisInit::plus_i: return {cplx{kSqrtHalf, 0}, cplx{0, kSqrtHalf}};
    case BasisInit::minus_i: return {cplx{kSqrtHalf, 0}, cplx{0, -kSqrtHalf}};
  }
  throw std::logic_error("unreachable basis init");
}

void check_qubit(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.num_qubits()) {
    throw std::invalid_argument("qubit index out of range");
  }
}

/// Mask/weight pairs for the diagonal energy
/// E = sum_edges g [both excited] + sum_q (detuning - half coupling sum) [excited].
struct DiagonalTerms {
  std::vector<std::pair<std::size_t, double>> terms;

  explicit DiagonalTerms(const DeviceGraph& graph) {
    for (const auto& edge : graph.edges()) {
      terms.emplace_back((std::size_t{1} << edge.a) | (std::size_t{1} << edge.b), edge.g);
    }
    for (const auto& q : graph.qubits()) {
      const double local = graph.detuning(q.id) - graph.half_coupling_sum(q.id);
      if (local != 0.0) terms.emplace_back(std::size_t{1} << q.id, local);
    }
  }

  double energy(std::size_t config) const {
    double e = 0.0;
    for (const auto& [mask, weight] : terms) {
      if ((config & mask) == mask) e += weight;
    }
    return e;
  }
};

}  // namespace

const char* basis_name(PauliBasis basis) {
  switch (basis) {
    case PauliBasis::X: return "X";
    case PauliBasis::Y: return "Y";
    case PauliBasis::Z: return "Z";
  }
  throw std::logic_error("unreachable basis");
}

PauliBasis basis_from_name(const std::string& name) {
  if (name == "X") return PauliBasis::X;
  if (name == "Y") return PauliBasis::Y;
  if (name == "Z") return PauliBasis::Z;
  throw std::invalid_argument("unknown measurement basis: " + name);
}

std::array<cplx, 4> gate_matrix(const InstantGate& gate) {
  const double c = std::cos(gate.angle / 2.0);
  const double s = std::sin(gate.angle / 2.0);
  switch (gate.kind) {
    case GateKind::X: return {cplx{0}, cplx{1}, cplx{1}, cplx{0}};
    case GateKind::Y: return {cplx{0}, kI, -kI, cplx{0}};
    case GateKind::Z: return {cplx{1}, cplx{0}, cplx{0}, cplx{-1}};
    case GateKind::SPlus: return {cplx{1}, cplx{0}, cplx{0}, kI};
    case GateKind::SMinus: return {cplx{1}, cplx{0}, cplx{0}, -kI};
    case GateKind::Rx: return {cplx{c}, -kI * s, -kI * s, cplx{c}};
    case GateKind::Ry: return {cplx{c}, cplx{s}, cplx{-s}, cplx{c}};
    case GateKind::H:
      return {cplx{kSqrtHalf}, cplx{kSqrtHalf}, cplx{kSqrtHalf}, cplx{-kSqrtHalf}};
    case GateKind::Phase: return {cplx{1}, cplx{0}, cplx{0}, std::exp(kI * gate.angle)};
  }
  throw std::logic_error("unreachable gate kind");
}

StateVector::StateVector(int n) : n_(n) {
  if (n < 1 || n > kMaxQubits) {
    throw std::invalid_argument("dense state supports 1..24 qubits");
  }
  amps_.assign(std::size_t{1} << n, cplx{0, 0});
  amps_[0] = cplx{1, 0};
}

double StateVector::norm_sq() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

void StateVector::normalize() {
  const double n = std::sqrt(norm_sq());
  if (n <= 0.0) throw std::runtime_error("cannot normalize a zero state");
  for (auto& a : amps_) a /= n;
}

StateVector init_product_state(int n, const std::map<int, BasisInit>& assignment) {
  if (static_cast<int>(assignment.size()) != n) {
    throw std::invalid_argument("assignment must cover every qubit exactly once");
  }
  StateVector state(n);
  for (const auto& [qubit, init] : assignment) {
    if (qubit < 0 || qubit >= n) throw std::invalid_argument("assignment qubit out of range");
    const auto amp = basis_amplitudes(init);
    if (std::norm(amp[1]) == 0.0) continue;  // ground: already there
    const std::size_t mask = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < state.dim(); ++i) {
      if (i & mask) continue;
      const cplx low = state.amp(i);
      state.amp(i) = amp[0] * low;
      state.amp(i | mask) = amp[1] * low;
    }
  }
  return state;
}

StateVector init_product_state(const DeviceGraph& graph, const std::map<int, BasisInit>& assignment) {
  return init_product_state(graph.num_qubits(), assignment);
}

void evolve_diagonal(StateVector& state, const DeviceGraph& graph, double duration) {
  if (graph.num_qubits() != state.num_qubits()) {
    throw std::invalid_argument("graph size does not match state");
  }
  if (duration == 0.0) return;
  const DiagonalTerms diagonal(graph);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    state.amp(i) *= std::exp(-kI * diagonal.energy(i) * duration);
  }
}

void evolve_driven(StateVector& state, const DeviceGraph& graph, const DrivePulse& pulse) {
  if (graph.num_qubits() != state.num_qubits()) {
    throw std::invalid_argument("graph size does not match state");
  }
  check_qubit(state, pulse.qubit);
  if (pulse.lambda < 0.0 || pulse.duration < 0.0) {
    throw std::invalid_argument("drive requires lambda >= 0 and duration >= 0");
  }
  const double t = pulse.duration;
  if (t == 0.0) return;

  const cplx kappa = 0.5 * pulse.lambda * std::exp(kI * pulse.theta);  // <e|H|g>
  const std::size_t mask = std::size_t{1} << pulse.qubit;
  const DiagonalTerms diagonal(graph);

  for (std::size_t i0 = 0; i0 < state.dim(); ++i0) {
    if (i0 & mask) continue;
    const std::size_t i1 = i0 | mask;
    double e0 = diagonal.energy(i0) - 0.5 * pulse.frame_shift;
    double e1 = diagonal.energy(i1) + 0.5 * pulse.frame_shift;

    // exp(-i H t) for H = [[e0, conj(kappa)], [kappa, e1]] in closed form.
    const double mean = 0.5 * (e0 + e1);
    const double half_gap = 0.5 * (e1 - e0);
    const double omega = std::sqrt(half_gap * half_gap + std::norm(kappa));
    const cplx common = std::exp(-kI * mean * t);
    cplx u00, u01, u10, u11;
    if (omega == 0.0) {
      u00 = u11 = common;
      u01 = u10 = cplx{0, 0};
    } else {
      const double co = std::cos(omega * t);
      const double si = std::sin(omega * t) / omega;
      u00 = common * (co + kI * si * half_gap);
      u11 = common * (co - kI * si * half_gap);
      u01 = common * (-kI * si) * std::conj(kappa);
      u10 = common * (-kI * si) * kappa;
    }
    const cplx a0 = state.amp(i0);
    const cplx a1 = state.amp(i1);
    state.amp(i0) = u00 * a0 + u01 * a1;
    state.amp(i1) = u10 * a0 + u11 * a1;
  }
}

namespace {

/// Amplitude pair transform projecting onto the +/-1 eigenspace of a Pauli.
/// Eigenvectors in the (ground, excited) basis:
///   X: (1, +/-1)/sqrt2   Y: (1, +/-i)/sqrt2   Z: e_0 / e_1.
std::array<cplx, 2> eigenvector(PauliBasis basis, int outcome) {
  switch (basis) {
    case PauliBasis::X:
      return {cplx{kSqrtHalf, 0}, outcome > 0 ? cplx{kSqrtHalf, 0} : cplx{-kSqrtHalf, 0}};
    case PauliBasis::Y:
      return {cplx{kSqrtHalf, 0}, outcome > 0 ? cplx{0, kSqrtHalf} : cplx{0, -kSqrtHalf}};
    case PauliBasis::Z:
      return outcome > 0 ? std::array<cplx, 2>{cplx{1, 0}, cplx{0, 0}}
                         : std::array<cplx, 2>{cplx{0, 0}, cplx{1, 0}};
  }
  throw std::logic_error("unreachable basis");
}

double outcome_probability(const StateVector& state, int qubit, PauliBasis basis, int outcome) {
  const auto v = eigenvector(basis, outcome);
  const std::size_t mask = std::size_t{1} << qubit;
  double p = 0.0;
  for (std::size_t i0 = 0; i0 < state.dim(); ++i0) {
    if (i0 & mask) continue;
    p += std::norm(std::conj(v[0]) * state.amp(i0) + std::conj(v[1]) * state.amp(i0 | mask));
  }
  return p;
}

}  // namespace

MeasurementRecord measure(StateVector& state, int qubit, PauliBasis basis, MeasurePolicy policy) {
  check_qubit(state, qubit);
  const double p_plus = outcome_probability(state, qubit, basis, +1);

  int outcome;
  if (policy.kind == MeasurePolicy::Kind::force) {
    outcome = policy.forced_outcome >= 0 ? +1 : -1;
  } else {
    if (policy.rng == nullptr) throw std::invalid_argument("sampling requires an RNG");
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    outcome = dist(*policy.rng) < p_plus ? +1 : -1;
  }
  const double p = outcome > 0 ? p_plus : 1.0 - p_plus;
  if (p < 1e-12) {
    throw std::runtime_error("forced measurement outcome has zero probability");
  }

  const auto v = eigenvector(basis, outcome);
  const std::size_t mask = std::size_t{1} << qubit;
  for (std::size_t i0 = 0; i0 < state.dim(); ++i0) {
    if (i0 & mask) continue;
    const std::size_t i1 = i0 | mask;
    const cplx overlap = std::conj(v[0]) * state.amp(i0) + std::conj(v[1]) * state.amp(i1);
    state.amp(i0) = overlap * v[0];
    state.amp(i1) = overlap * v[1];
  }
  state.normalize();
  return MeasurementRecord{qubit, basis, outcome, p};
}

void apply_instant_gate(StateVector& state, int qubit, const InstantGate& gate) {
  check_qubit(state, qubit);
  const auto m = gate_matrix(gate);
  const std::size_t mask = std::size_t{1} << qubit;
  for (std::size_t i0 = 0; i0 < state.dim(); ++i0) {
    if (i0 & mask) continue;
    const std::size_t i1 = i0 | mask;
    const cplx a0 = state.amp(i0);
    const cplx a1 = state.amp(i1);
    state.amp(i0) = m[0] * a0 + m[2] * a1;
    state.amp(i1) = m[1] * a0 + m[3] * a1;
  }
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw std::invalid_argument("fidelity requires equal qubit counts");
  }
  cplx overlap{0, 0};
  for (std::size_t i = 0; i < a.dim(); ++i) {
    overlap += std::conj(a.amp(i)) * b.amp(i);
  }
  return std::norm(overlap);
}

DensityMatrix reduced_density(const StateVector& state, const std::vector<int>& keep) {
  if (keep.size() > 6) throw std::invalid_argument("reduced_density keeps at most 6 qubits");
  for (int q : keep) check_qubit(state, q);

  const std::size_t kd = std::size_t{1} << keep.size();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(kd),
                                                static_cast<Eigen::Index>(kd));

  std::vector<int> rest;
  for (int q = 0; q < state.num_qubits(); ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) rest.push_back(q);
  }
  auto scatter = [](const std::vector<int>& qubits, std::size_t bits) {
    std::size_t index = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
      if (bits >> k & 1) index |= std::size_t{1} << qubits[k];
    }
    return index;
  };

  const std::size_t rd = std::size_t{1} << rest.size();
  for (std::size_t r = 0; r < rd; ++r) {
    const std::size_t rest_index = scatter(rest, r);
    for (std::size_t i = 0; i < kd; ++i) {
      const cplx ai = state.amp(rest_index | scatter(keep, i));
      if (ai == cplx{0, 0}) continue;
      for (std::size_t j = 0; j < kd; ++j) {
        rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            ai * std::conj(state.amp(rest_index | scatter(keep, j)));
      }
    }
  }
  return DensityMatrix(std::move(rho));
}

double pauli_expectation(const StateVector& state, int qubit, PauliBasis basis) {
  StateVector copy = state;
  switch (basis) {
    case PauliBasis::X: apply_instant_gate(copy, qubit, InstantGate::x()); break;
    case PauliBasis::Y: apply_instant_gate(copy, qubit, InstantGate::y()); break;
    case PauliBasis::Z: apply_instant_gate(copy, qubit, InstantGate::z()); break;
  }
  cplx overlap{0, 0};
  for (std::size_t i = 0; i < state.dim(); ++i) {
    overlap += std::conj(state.amp(i)) * copy.amp(i);
  }
  return overlap.real();
}

void apply_dephasing_interval(StateVector& state, double duration, double t2,
                              std::mt19937_64& rng) {
  if (!(t2 > 0.0)) throw std::invalid_argument("T2 must be positive");
  const double p = 0.5 * (1.0 - std::exp(-duration / t2));
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int q = 0; q < state.num_qubits(); ++q) {
    if (dist(rng) < p) apply_instant_gate(state, q, InstantGate::z());
  }
}

std::string dump_state(const StateVector& state) {
  std::string out;
  const std::uint64_t n = static_cast<std::uint64_t>(state.num_qubits());
  out.append(reinterpret_cast<const char*>(&n), sizeof(n));
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const double re = state.amp(i).real();
    const double im = state.amp(i).imag();
    out.append(reinterpret_cast<const char*>(&re), sizeof(re));
    out.append(reinterpret_cast<const char*>(&im), sizeof(im));
  }
  return out;
}

StateVector load_state(const std::string& bytes) {
  if (bytes.size() < sizeof(std::uint64_t)) throw std::invalid_argument("truncated state dump");
  std::uint64_t n = 0;
  std::memcpy(&n, bytes.data(), sizeof(n));
  if (n < 1 || n > StateVector::kMaxQubits) throw std::invalid_argument("invalid qubit count");
  StateVector state(static_cast<int>(n));
  const std::size_t expected = sizeof(std::uint64_t) + state.dim() * 2 * sizeof(double);
  if (bytes.size() != expected) throw std::invalid_argument("state dump size mismatch");
  const char* p = bytes.data() + sizeof(std::uint64_t);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    double re, im;
    std::memcpy(&re, p, sizeof(re));
    p += sizeof(re);
    std::memcpy(&im, p, sizeof(im));
    p += sizeof(im);
    state.amp(i) = cplx{re, im};
  }
  return state;
}

}  // namespace qsim
