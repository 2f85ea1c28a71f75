#pragma once

#include <optional>
#include <vector>

#include "nvspin/qcore.hpp"
#include "nvspin/spin_model.hpp"
#include "nvspin/types.hpp"

namespace nvspin {

// Population index order used by the 3x3 rate generator: (P0, P-1, P+1).
int pop_index(int m_s);

struct PopulationTriple {
  double P0 = 0.0, Pm1 = 0.0, Pp1 = 0.0;

  double sum() const { return P0 + Pm1 + Pp1; }
  double operator[](int i) const { return i == 0 ? P0 : (i == 1 ? Pm1 : Pp1); }
  // Throws unless each entry is in [0,1] and the sum is 1 within 1e-12.
  void validate() const;
};

// Classical hopping model for the electron T1 process.  The default
// connectivity hops 0 <-> +1 and 0 <-> -1 at the single rate kappa and
// leaves +1 <-> -1 unconnected; its generator has eigenvalues
// {0, -kappa, -3 kappa}, which is what produces the exp(-kappa tau) and
// exp(-3 kappa tau) population transients.
struct RateModel {
  struct Hop {
    int from_ms = 0;
    int to_ms = 0;
    double rate = 0.0;  // 1/ms
  };
  std::vector<Hop> hops;

  static RateModel standard(double kappa_per_ms);

  // Column-stochastic generator in the (P0, P-1, P+1) order; columns sum
  // to zero.
  Eigen::Matrix3d generator() const;
  // Throws if a rate is negative or a level index is out of range.
  void validate() const;
};

// Closed-form populations for the default connectivity and the prepared
// initial condition (P0, Pm1, Pp1)(0) = (s1, 0, 1-s1):
//   P0  = 1/3 - 2 (1/6 - s1/2) e^{-3 kappa tau}
//   P-1 = 1/3 +   (1/6 - s1/2) e^{-3 kappa tau} - (1-s1)/2 e^{-kappa tau}
//   P+1 = 1/3 +   (1/6 - s1/2) e^{-3 kappa tau} + (1-s1)/2 e^{-kappa tau}
PopulationTriple analytic_populations(double s1, double kappa_per_ms,
                                      double tau_ms);

// exp(G tau) applied to an arbitrary initial triple; numeric oracle for
// analytic_populations.
PopulationTriple numeric_populations(const PopulationTriple& initial,
                                     const RateModel& model, double tau_ms);

// Markovian generator for the 6-level system: secular block Hamiltonian
// plus jump operators.
//
// Electron hops are modeled nuclear-state-resolved, |to,n><from,n| for
// n in {up,dn} at rate kappa each: population transfer follows the rate
// model exactly while transferred nuclear coherence is destroyed, which
// is the stated incoherent character of the T1 process.  An optional
// nuclear pure-dephasing jump (2 Iz at rate gamma_phi) damps nuclear
// coherences as e^{-2 gamma_phi t}.  sigma_qs is carried as metadata for
// the quasi-static ensemble engine, not as a jump operator.
struct LindbladGenerator {
  Mat6 hamiltonian = Mat6::Zero();  // MHz
  struct Jump {
    Mat6 op;
    double rate = 0.0;  // 1/ms
  };
  std::vector<Jump> jumps;
  double sigma_qs_mhz = 0.0;

  // 36x36 superoperator acting on vec(rho), in 1/us.
  Eigen::MatrixXcd superoperator() const;
  double total_rate() const;  // 1/ms
  void validate() const;
};

LindbladGenerator build_lindblad(const SpinSystemParams& params,
                                 double gamma_phi_per_ms,
                                 double sigma_qs_mhz = 0.0,
                                 std::optional<double> kappa_per_ms = {},
                                 double extra_detuning_mhz = 0.0);

// Exact evolution by exp(L t) of the vectorized state.
DensityMatrix evolve_lindblad(const DensityMatrix& rho,
                              const LindbladGenerator& gen, double t_ms);

// Fixed-step RK4 integration of the master equation.  dt_ms <= 0 selects
// the default step min(0.01/nu_max, 0.01/kappa_max); a step with
// dt*||L|| > 0.1 is refused (std::domain_error) rather than integrated
// inaccurately.
DensityMatrix evolve_lindblad_rk4(const DensityMatrix& rho,
                                  const LindbladGenerator& gen, double t_ms,
                                  double dt_ms = 0.0);

// Block traces of a 6-level state in the (P0, P-1, P+1) order.
PopulationTriple populations(const DensityMatrix& rho);

}  // namespace nvspin
