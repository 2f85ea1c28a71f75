#include "nvspin/spin_model.hpp"

#include <cmath>
#include <stdexcept>

namespace nvspin {

void SpinSystemParams::validate() const {
  if (!(s1 >= 0.0 && s1 <= 1.0)) {
    throw std::invalid_argument("SpinSystemParams: s1 must be in [0,1]");
  }
  if (!(T1e > 0.0) || !(T2star_C > 0.0) || !(T2_C > 0.0)) {
    throw std::invalid_argument(
        "SpinSystemParams: T1e, T2star_C, T2_C must be positive");
  }
  if (!(B >= 0.0) || !std::isfinite(B) || !std::isfinite(nu_C)) {
    throw std::invalid_argument("SpinSystemParams: bad field parameters");
  }
  if (gamma_C.has_value()) {
    const double derived = *gamma_C * B;
    if (std::abs(derived - nu_C) > 1e-6) {
      throw std::invalid_argument(
          "SpinSystemParams: nu_C and B*gamma_C disagree beyond 1e-6 MHz");
    }
  }
}

const SpinOperatorSet& SpinOperatorSet::standard() {
  static const SpinOperatorSet ops = [] {
    SpinOperatorSet o;
    o.Sz.setZero();
    o.Iz.setZero();
    o.Ix.setZero();
    for (int m_s : {1, 0, -1}) {
      const int k = block_offset(m_s);
      o.Sz(k, k) = o.Sz(k + 1, k + 1) = static_cast<double>(m_s);
      o.Iz(k, k) = 0.5;
      o.Iz(k + 1, k + 1) = -0.5;
      o.Ix(k, k + 1) = o.Ix(k + 1, k) = 0.5;
    }
    o.Sz2 = o.Sz * o.Sz;
    return o;
  }();
  return ops;
}

Mat6 build_hamiltonian(const SpinSystemParams& params) {
  params.validate();
  const SpinOperatorSet& op = SpinOperatorSet::standard();
  Mat6 h = params.D * op.Sz2 - (params.nu_e() - params.A_N) * op.Sz -
           params.nu_C * op.Iz + params.A_zz * op.Sz * op.Iz +
           params.A_zx * op.Sz * op.Ix;
  return h;
}

Mat2 nuclear_block_hamiltonian(const SpinSystemParams& params, int m_s,
                               double extra_detuning_mhz) {
  if (m_s < -1 || m_s > 1) {
    throw std::domain_error("nuclear_block_hamiltonian: m_s not in {-1,0,1}");
  }
  const double nu = params.nu_C + extra_detuning_mhz;
  const double m = static_cast<double>(m_s);
  Mat2 h;
  const double z = -nu + m * params.A_zz;  // coefficient of Iz
  const double x = m * params.A_zx;        // coefficient of Ix
  h << 0.5 * z, 0.5 * x, 0.5 * x, -0.5 * z;
  return h;
}

double nuclear_precession_frequency(const SpinSystemParams& params, int m_s) {
  if (m_s < -1 || m_s > 1) {
    throw std::domain_error(
        "nuclear_precession_frequency: m_s not in {-1,0,1}");
  }
  const double m = static_cast<double>(m_s);
  return std::hypot(m * params.A_zx, params.nu_C - m * params.A_zz);
}

}  // namespace nvspin
