#pragma once

#include <complex>
#include <Eigen/Dense>

namespace qsim {

class StateVector;

/// Small dense density matrix (reduced states of at most 6 qubits).
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Eigen::MatrixXcd matrix);

  static DensityMatrix from_pure(const StateVector& state);

  const Eigen::MatrixXcd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  double trace_real() const { return m_.trace().real(); }
  double purity() const;
  bool is_hermitian(double tol = 1e-10) const;
  double min_eigenvalue() const;
  Eigen::VectorXd diagonal() const;

  /// (1/2) * trace norm of the difference.
  double trace_distance(const DensityMatrix& other) const;
  /// <psi| rho |psi> for a pure reference state.
  double fidelity_with_pure(const StateVector& reference) const;
  /// Largest |off-diagonal| entry; tracks coherence loss in dephasing models.
  double max_offdiagonal() const;

  DensityMatrix mix(const DensityMatrix& other, double weight_other) const;

 private:
  Eigen::MatrixXcd m_;
};

}  // namespace qsim
