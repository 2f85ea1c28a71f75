#pragma once

#include <optional>

#include "nvspin/types.hpp"

namespace nvspin {

// Physical constants of the electron-13C pair plus the relaxation and
// preparation parameters used by the protocols.  Energies are in MHz
// (Hamiltonian divided by 2*pi), fields in gauss, times in ms.
struct SpinSystemParams {
  double D = 2870.0;     // zero-field splitting, MHz
  double B = 148.0;      // magnetic field along the NV axis, G
  double gamma_e = 2.8025;  // electron gyromagnetic ratio, MHz/G
  std::optional<double> gamma_C;  // 13C gyromagnetic ratio, MHz/G
  double nu_C = 0.158;   // 13C Larmor frequency, MHz
  double A_N = -2.16;    // 14N secular hyperfine (m_N = 1 shift), MHz
  double A_zz = -0.152;  // 13C secular hyperfine, MHz
  double A_zx = 0.110;   // 13C anisotropic hyperfine, MHz
  double s1 = 0.80;      // weight of |0,up> in the prepared state
  double T1e = 5.5;      // electron longitudinal relaxation time, ms
  double T2star_C = 8.66;  // FID dephasing constant, ms
  double T2_C = 14.10;     // Hahn dephasing constant, ms

  double nu_e() const { return gamma_e * B; }  // MHz

  // Single hopping rate of the electron T1 model, 1/ms (T1e = 1/(3 kappa)).
  double kappa() const { return 1.0 / (3.0 * T1e); }

  // Throws std::invalid_argument when a constraint is violated.  If
  // gamma_C is supplied, B*gamma_C must agree with nu_C to 1e-6 MHz.
  void validate() const;
};

// The 6x6 operators entering the Hamiltonian, in the fixed basis order.
struct SpinOperatorSet {
  Mat6 Sz, Sz2, Ix, Iz;
  static const SpinOperatorSet& standard();
};

// Secular Hamiltonian of the coupled pair, MHz:
//   D Sz^2 - (nu_e - A_N) Sz - nu_C Iz + A_zz Sz Iz + A_zx Sz Ix.
// Block-diagonal in m_S.
Mat6 build_hamiltonian(const SpinSystemParams& params);

// Traceless intra-block (nuclear) part of the m_S block of the Hamiltonian,
// MHz.  This is what drives all observable dynamics; the electron terms
// only add a constant inside each block.  extra_detuning shifts nu_C, used
// by the quasi-static ensemble engine.
Mat2 nuclear_block_hamiltonian(const SpinSystemParams& params, int m_s,
                               double extra_detuning_mhz = 0.0);

// Precession frequency of the nucleus conditioned on the electron level:
// sqrt((m_S A_zx)^2 + (nu_C - m_S A_zz)^2), MHz.  Equals the eigenvalue
// gap of the corresponding Hamiltonian block.
double nuclear_precession_frequency(const SpinSystemParams& params, int m_s);

}  // namespace nvspin
