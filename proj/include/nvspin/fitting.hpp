#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nvspin/protocols.hpp"
#include "nvspin/spin_model.hpp"

namespace nvspin {

struct FitOptions {
  int max_iterations = 500;
  double step_tol = 1e-8;   // relative step size
  double grad_tol = 1e-10;  // infinity norm of J'r
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::VectorXd sigma;  // 1-sigma from the local quadratic model
  std::vector<bool> fixed;
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;

  double value(const std::string& name) const;
  double uncertainty(const std::string& name) const;
  nlohmann::json to_json() const;
};

// y(x; theta) for scalar-abscissa models.
using ModelFn =
    std::function<double(double x, const Eigen::VectorXd& theta)>;
// General residual vector r(theta); the minimizer drives ||r||^2 down.
using ResidualFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& theta)>;

// Damped Gauss-Newton (Levenberg) with numeric central-difference
// Jacobians.  Non-convergence and singular Jacobians are flagged on the
// result, not thrown.  Entries of `fixed` mask parameters out of the fit.
FitResult least_squares_residual(const ResidualFn& residuals,
                                 const std::vector<std::string>& names,
                                 const Eigen::VectorXd& init,
                                 const std::vector<bool>& fixed = {},
                                 const FitOptions& opts = {});

FitResult least_squares(const ModelFn& model, const std::vector<double>& x,
                        const std::vector<double>& y,
                        const std::vector<std::string>& names,
                        const Eigen::VectorXd& init,
                        const std::vector<bool>& fixed = {},
                        const FitOptions& opts = {});

// Model library ------------------------------------------------------

// b + a sin(2 pi nu tau + phi); tau in ms, nu in MHz.
double segment_sinusoid_model(double tau_ms, double b, double a,
                              double nu_mhz, double phi_rad);
// (P0 + P-1)/2 - d0 with the rate-equation populations.
double background_model(double tau_ms, double kappa_per_ms, double d0,
                        double s1);
// P0 c0 e^{-rate tau} / 2.
double fid_envelope_model(double tau_ms, double c0, double rate_per_ms,
                          double kappa_per_ms, double s1);
// (P0 + P-1) c0 e^{-rate tau} / 2.
double hahn_envelope_model(double tau_ms, double c0, double rate_per_ms,
                           double kappa_per_ms, double s1);

// Segment analysis ----------------------------------------------------

struct SegmentAmplitude {
  double tau_ms = 0.0;      // window center
  double amplitude = 0.0;   // >= 0; sign folded into the phase
  double background = 0.0;
  double phase_rad = 0.0;
  double nu_mhz = 0.0;      // fixed or fitted frequency
  bool converged = false;
};

// Fixed-frequency sinusoid fit per window (nu free when fit_frequency).
// Windows must span at least two oscillation periods.
std::vector<SegmentAmplitude> extract_segment_amplitudes(
    const SignalTrace& trace,
    const std::vector<std::pair<int, int>>& windows, double nu_mhz,
    bool fit_frequency = false);

// Two-stage dephasing analysis ---------------------------------------

struct DephasingFitConfig {
  std::optional<double> fixed_kappa_per_ms;
  std::optional<double> fixed_d0;
  bool joint = false;  // single global fit instead of the two stages
};

struct DephasingFit {
  FitResult background;  // kappa_per_ms, d0
  FitResult envelope;    // c0, rate_per_ms
  double kappa_per_ms = 0.0;
  double d0 = 0.0;
  double c0 = 0.0;
  double T2_ms = 0.0;
  double T2_sigma_ms = 0.0;
  bool converged = false;

  nlohmann::json to_json() const;
};

// Background points pin (kappa, d0); amplitude points then pin
// (c0, T2) with the populations evaluated at the fitted kappa.
DephasingFit fit_dephasing(Protocol protocol,
                           const std::vector<SegmentAmplitude>& segments,
                           const SpinSystemParams& params,
                           const DephasingFitConfig& cfg = {});

}  // namespace nvspin
