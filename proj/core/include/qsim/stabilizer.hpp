#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qsim/statevector.hpp"

namespace qsim {

/// Multi-qubit Pauli with +1 implicit sign; per-qubit bits follow the usual
/// encoding (x,z) = (1,0) X, (0,1) Z, (1,1) Y.  `support` lists the
/// non-identity qubits in set order.
struct PauliString {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> z;
  std::vector<int> support;

  static PauliString identity(int n) {
    return {std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0),
            std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0),
            {}};
  }
  void set(int qubit, PauliBasis basis) {
    if (!x[static_cast<std::size_t>(qubit)] && !z[static_cast<std::size_t>(qubit)]) {
      support.push_back(qubit);
    }
    switch (basis) {
      case PauliBasis::X: x[static_cast<std::size_t>(qubit)] = 1; break;
      case PauliBasis::Y: x[static_cast<std::size_t>(qubit)] = 1; z[static_cast<std::size_t>(qubit)] = 1; break;
      case PauliBasis::Z: z[static_cast<std::size_t>(qubit)] = 1; break;
    }
  }
};

struct TableauMeasurement {
  int qubit = 0;
  PauliBasis basis = PauliBasis::Z;
  int outcome = +1;
  bool deterministic = false;
  double probability() const { return deterministic ? 1.0 : 0.5; }
};

/// Clifford state in the standard destabilizer/stabilizer tableau form.
/// Row j < n holds destabilizers, rows n..2n-1 the stabilizer generators.
class StabilizerTableau {
 public:
  static constexpr int kMaxQubits = 4096;

  explicit StabilizerTableau(int n);  // all-ground: stabilizers +Z_i

  int num_qubits() const { return n_; }

  void apply_h(int q);
  void apply_s(int q);       // diag(1, i)
  void apply_sdg(int q);     // diag(1, -i)
  void apply_x(int q);
  void apply_y(int q);
  void apply_z(int q);
  void apply_cz(int a, int b);
  void apply_rx(int q, bool positive);  // exp(-/+ i pi X / 4)
  void apply_ry(int q, bool positive);  // exp(-/+ i pi Y / 4)

  /// Measures a single-qubit Pauli.  Y is handled natively (no basis-change
  /// decomposition).  Deterministic outcomes are reported as such; forcing
  /// the impossible branch of a deterministic measurement throws.
  TableauMeasurement measure(int q, PauliBasis basis, MeasurePolicy policy);

  /// Expectation of a Pauli string on the stabilizer state: +1 or -1 when the
  /// operator is (up to sign) in the stabilizer group, 0 otherwise.
  int pauli_expectation(const PauliString& p) const;

  /// True when the qubit is deterministically in the ground state.
  bool is_ground(int q) const;

  /// Internal consistency: stabilizers commute, destabilizer j anticommutes
  /// with stabilizer j only.
  bool check_internal() const;

  std::string stabilizer_to_string(int row) const;  // e.g. "+XZI"

 private:
  int row_sign_exponent(std::size_t h, std::size_t i) const;
  void rowsum(std::size_t h, std::size_t i);
  bool anticommutes(std::size_t row, const PauliString& p) const;

  int n_;
  std::size_t words_;
  // Bit-packed rows: 2n rows of n x-bits and n z-bits, plus a 2-bit phase
  // exponent r (the row is i^r X^x Z^z, with (1,1) read as Y).  Stabilizer
  // rows stay real (r in {0, 2}); destabilizer rows may hold 1 or 3.
  std::vector<std::uint64_t> xs_, zs_;
  std::vector<std::uint8_t> r_;
};

/// Stabilizer certificate of a graph state: one generator
/// K_a = X_a prod_{b in N(a)} Z_b per vertex of the target graph.
struct GraphStateCertificate {
  std::vector<int> vertices;
  std::vector<std::pair<int, int>> edges;

  PauliString stabilizer_for(int vertex, int n) const;
  std::vector<int> neighborhood(int vertex) const;
};

struct CertificateEntry {
  int vertex = 0;
  double expectation = 0.0;
  bool pass = false;
};

struct CertificateReport {
  std::vector<CertificateEntry> stabilizers;
  bool pass = false;
};

/// Checks every K_a on a tableau state.  Qubits outside the certificate must
/// be deterministically ground (throws otherwise).
CertificateReport check_certificate(const StabilizerTableau& tab, const GraphStateCertificate& cert);

/// Dense-engine version; expectation within `tol` of +1 passes.
CertificateReport check_certificate_dense(const StateVector& state, const GraphStateCertificate& cert,
                                          double tol = 1e-10);

std::string certificate_report_to_json(const CertificateReport& report);

/// The graph state of the certificate built directly with instant gates:
/// |+>^V followed by CZ along every edge; reference for oracle tests.
StateVector certificate_reference_state(const GraphStateCertificate& cert, int n);

}  // namespace qsim
