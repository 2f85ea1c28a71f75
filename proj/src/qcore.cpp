#include "nvspin/qcore.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace nvspin {

void DensityMatrix::validate(double herm_tol, double trace_tol,
                             double eig_floor) const {
  if (!rho.allFinite()) {
    throw std::invalid_argument("DensityMatrix: non-finite entries");
  }
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(trace() - 1.0) > trace_tol) {
    throw std::invalid_argument("DensityMatrix: trace != 1");
  }
  Eigen::SelfAdjointEigenSolver<Mat6> es(
      (0.5 * (rho + rho.adjoint())).eval(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < eig_floor) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
}

void UnitaryOperator::validate(double tol) const {
  const double dev = (u.adjoint() * u - Mat6::Identity()).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) {
    throw std::invalid_argument("UnitaryOperator: U'U != 1");
  }
}

DensityMatrix pure_state(int basis_index) {
  if (basis_index < 0 || basis_index >= kDim) {
    throw std::out_of_range("pure_state: basis index out of range");
  }
  DensityMatrix rho;
  rho.rho(basis_index, basis_index) = 1.0;
  return rho;
}

DensityMatrix mixed_state(
    std::initializer_list<std::pair<int, double>> weights) {
  DensityMatrix rho;
  double sum = 0.0;
  for (const auto& [idx, w] : weights) {
    if (idx < 0 || idx >= kDim) {
      throw std::out_of_range("mixed_state: basis index out of range");
    }
    if (w < 0.0) throw std::invalid_argument("mixed_state: negative weight");
    rho.rho(idx, idx) += w;
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("mixed_state: weights must sum to 1");
  }
  return rho;
}

DensityMatrix apply_unitary(const DensityMatrix& rho,
                            const UnitaryOperator& u) {
  DensityMatrix out;
  out.rho = u.u * rho.rho * u.u.adjoint();
  return out;
}

Mat2 ms_block(const DensityMatrix& rho, int m_s) {
  if (m_s < -1 || m_s > 1) {
    throw std::domain_error("ms_block: m_s not in {-1,0,1}");
  }
  const int k = block_offset(m_s);
  return rho.rho.block<2, 2>(k, k);
}

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a, double t) {
  if (a.rows() != a.cols() || a.rows() > 36) {
    throw std::invalid_argument("matrix_exponential: need square n<=36");
  }
  if (!a.allFinite() || !std::isfinite(t)) {
    throw std::invalid_argument("matrix_exponential: non-finite input");
  }
  return (a * t).exp();
}

}  // namespace nvspin
