#pragma once

#include <complex>

#include <Eigen/Dense>

namespace nvspin {

using cplx = std::complex<double>;

// Electron spin-1 (m_S = +1, 0, -1) x nuclear spin-1/2 (up, down).
// Basis order, fixed project-wide:
//   0:|+1,up>  1:|+1,dn>  2:|0,up>  3:|0,dn>  4:|-1,up>  5:|-1,dn>
inline constexpr int kDim = 6;

using Mat2 = Eigen::Matrix2cd;
using Mat6 = Eigen::Matrix<cplx, 6, 6>;
using Vec6 = Eigen::Matrix<cplx, 6, 1>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Interfaces carry times in ms; evolution kernels work in us so that a
// frequency in MHz times a duration in us is a phase in cycles.
inline constexpr double kMsToUs = 1000.0;

// Row offset of the 2x2 nuclear block for a given electron projection.
inline int block_offset(int m_s) { return 2 * (1 - m_s); }

}  // namespace nvspin
