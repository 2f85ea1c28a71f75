#pragma once

#include <initializer_list>
#include <utility>

#include "nvspin/types.hpp"

namespace nvspin {

// 6x6 density matrix of the electron-nuclear pair.  Hermitian, unit trace,
// positive semidefinite within the stated tolerances.  Checks are explicit
// (validate) plus debug assertions; hot loops do not validate per step.
struct DensityMatrix {
  Mat6 rho = Mat6::Zero();

  double trace() const { return rho.trace().real(); }
  // Throws std::invalid_argument when an invariant fails.
  void validate(double herm_tol = 1e-12, double trace_tol = 1e-10,
                double eig_floor = -1e-10) const;
};

struct UnitaryOperator {
  Mat6 u = Mat6::Identity();
  // Throws std::invalid_argument unless u'u = 1 within tol.
  void validate(double tol = 1e-12) const;
};

// Projector onto one basis ket (index in the fixed basis order).
DensityMatrix pure_state(int basis_index);

// Statistical mixture of basis projectors; weights must be >= 0 and sum
// to 1 within 1e-12.
DensityMatrix mixed_state(
    std::initializer_list<std::pair<int, double>> weights);

// U rho U'.
DensityMatrix apply_unitary(const DensityMatrix& rho,
                            const UnitaryOperator& u);

// Unnormalized 2x2 nuclear block for an electron projection; its trace is
// the population of that m_S level.
Mat2 ms_block(const DensityMatrix& rho, int m_s);

// exp(A*t) for dense complex matrices up to 36x36 (Pade scaling and
// squaring via Eigen).  Throws on non-finite input.
Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a, double t);

}  // namespace nvspin
