#include "qsim/density.hpp"

#include <stdexcept>

#include "qsim/statevector.hpp"

namespace qsim {

DensityMatrix::DensityMatrix(Eigen::MatrixXcd matrix) : m_(std::move(matrix)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("density matrix must be square");
}

DensityMatrix DensityMatrix::from_pure(const StateVector& state) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  Eigen::VectorXcd psi(d);
  for (Eigen::Index i = 0; i < d; ++i) psi(i) = state.amp(static_cast<std::size_t>(i));
  return DensityMatrix(psi * psi.adjoint());
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

bool DensityMatrix::is_hermitian(double tol) const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Eigen::VectorXd DensityMatrix::diagonal() const { return m_.diagonal().real(); }

double DensityMatrix::trace_distance(const DensityMatrix& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m_ - other.m_, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double DensityMatrix::fidelity_with_pure(const StateVector& reference) const {
  if (static_cast<Eigen::Index>(reference.dim()) != dim()) {
    throw std::invalid_argument("dimension mismatch");
  }
  Eigen::VectorXcd psi(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) psi(i) = reference.amp(static_cast<std::size_t>(i));
  return (psi.adjoint() * m_ * psi)(0, 0).real();
}

double DensityMatrix::max_offdiagonal() const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < dim(); ++i) {
    for (Eigen::Index j = 0; j < dim(); ++j) {
      if (i != j) best = std::max(best, std::abs(m_(i, j)));
    }
  }
  return best;
}

DensityMatrix DensityMatrix::mix(const DensityMatrix& other, double weight_other) const {
  if (other.dim() != dim()) throw std::invalid_argument("dimension mismatch");
  if (weight_other < 0.0 || weight_other > 1.0) {
    throw std::invalid_argument("mixture weight must lie in [0, 1]");
  }
  return DensityMatrix((1.0 - weight_other) * m_ + weight_other * other.m_);
}

}  // namespace qsim
