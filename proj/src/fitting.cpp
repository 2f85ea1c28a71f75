#include "nvspin/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nvspin {

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values(static_cast<Eigen::Index>(i));
  }
  throw std::invalid_argument("FitResult: no parameter '" + name + "'");
}

double FitResult::uncertainty(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return sigma(static_cast<Eigen::Index>(i));
  }
  throw std::invalid_argument("FitResult: no parameter '" + name + "'");
}

nlohmann::json FitResult::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    params[names[i]] = {{"value", values(k)},
                        {"sigma", sigma(k)},
                        {"fixed", static_cast<bool>(fixed[i])}};
  }
  return {{"parameters", params},
          {"rss", rss},
          {"converged", converged},
          {"iterations", iterations}};
}

FitResult least_squares_residual(const ResidualFn& residuals,
                                 const std::vector<std::string>& names,
                                 const Eigen::VectorXd& init,
                                 const std::vector<bool>& fixed,
                                 const FitOptions& opts) {
  const int n_par = static_cast<int>(init.size());
  FitResult res;
  res.names = names;
  res.values = init;
  res.fixed = fixed.empty() ? std::vector<bool>(n_par, false) : fixed;
  res.sigma = Eigen::VectorXd::Constant(
      n_par, std::numeric_limits<double>::quiet_NaN());
  if (static_cast<int>(res.fixed.size()) != n_par ||
      static_cast<int>(names.size()) != n_par || !init.allFinite()) {
    throw std::invalid_argument("least_squares: inconsistent inputs");
  }

  std::vector<int> free_idx;
  for (int j = 0; j < n_par; ++j) {
    if (!res.fixed[j]) free_idx.push_back(j);
  }
  const int k = static_cast<int>(free_idx.size());

  Eigen::VectorXd r = residuals(res.values);
  const int n_data = static_cast<int>(r.size());
  if (!r.allFinite()) {
    res.rss = std::numeric_limits<double>::infinity();
    return res;
  }
  double rss = r.squaredNorm();
  res.rss = rss;
  if (k == 0) {
    res.converged = true;
    res.sigma.setZero();
    return res;
  }
  if (n_data < k) {
    throw std::invalid_argument(
        "least_squares: fewer data points than free parameters");
  }

  auto jacobian = [&](const Eigen::VectorXd& theta) {
    Eigen::MatrixXd jac(n_data, k);
    for (int c = 0; c < k; ++c) {
      const int j = free_idx[c];
      const double h = std::max(1e-7 * std::abs(theta(j)), 1e-9);
      Eigen::VectorXd tp = theta, tm = theta;
      tp(j) += h;
      tm(j) -= h;
      jac.col(c) = (residuals(tp) - residuals(tm)) / (2.0 * h);
    }
    return jac;
  };

  double lambda = 1e-3;
  bool stalled = false;
  int iter = 0;
  for (; iter < opts.max_iterations && !stalled; ++iter) {
    const Eigen::MatrixXd jac = jacobian(res.values);
    if (!jac.allFinite()) break;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    if (jtr.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    for (int tries = 0; tries < 25; ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() +=
          lambda * jtj.diagonal().cwiseMax(1e-12).matrix();
      const Eigen::LDLT<Eigen::MatrixXd> solver(damped);
      if (solver.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd step = solver.solve(-jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      Eigen::VectorXd trial = res.values;
      for (int c = 0; c < k; ++c) trial(free_idx[c]) += step(c);
      const Eigen::VectorXd r_trial = residuals(trial);
      const double rss_trial =
          r_trial.allFinite() ? r_trial.squaredNorm()
                              : std::numeric_limits<double>::infinity();
      if (rss_trial <= rss) {
        double rel_step = 0.0;
        for (int c = 0; c < k; ++c) {
          rel_step = std::max(rel_step,
                              std::abs(step(c)) /
                                  (std::abs(res.values(free_idx[c])) + 1e-12));
        }
        res.values = trial;
        r = r_trial;
        rss = rss_trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (rel_step < opts.step_tol) res.converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (!accepted || res.converged) {
      if (!accepted) stalled = true;
      break;
    }
  }
  res.iterations = iter + 1;
  res.rss = rss;

  if (res.converged) {
    // Covariance from the local quadratic model at the optimum.
    const Eigen::MatrixXd jac = jacobian(res.values);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const double dof = std::max(1, n_data - k);
    const double s2 = rss / dof;
    const Eigen::LDLT<Eigen::MatrixXd> solver(jtj);
    res.sigma.setZero();
    if (solver.info() == Eigen::Success) {
      const Eigen::MatrixXd cov = solver.solve(
          Eigen::MatrixXd::Identity(k, k));
      bool ok = cov.allFinite();
      for (int c = 0; c < k && ok; ++c) {
        const double var = s2 * cov(c, c);
        if (var < 0.0) {
          ok = false;
          break;
        }
        res.sigma(free_idx[c]) = std::sqrt(var);
      }
      if (!ok) {
        res.converged = false;
        res.sigma.setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    } else {
      res.converged = false;
      res.sigma.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return res;
}

FitResult least_squares(const ModelFn& model, const std::vector<double>& x,
                        const std::vector<double>& y,
                        const std::vector<std::string>& names,
                        const Eigen::VectorXd& init,
                        const std::vector<bool>& fixed,
                        const FitOptions& opts) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("least_squares: x/y size mismatch");
  }
  const auto residuals = [&](const Eigen::VectorXd& theta) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = y[i] - model(x[i], theta);
    }
    return r;
  };
  return least_squares_residual(residuals, names, init, fixed, opts);
}

double segment_sinusoid_model(double tau_ms, double b, double a,
                              double nu_mhz, double phi_rad) {
  return b + a * std::sin(kTwoPi * nu_mhz * tau_ms * kMsToUs + phi_rad);
}

double background_model(double tau_ms, double kappa_per_ms, double d0,
                        double s1) {
  const PopulationTriple p = analytic_populations(s1, kappa_per_ms,
                                                  std::max(tau_ms, 0.0));
  return 0.5 * (p.P0 + p.Pm1) - d0;
}

double fid_envelope_model(double tau_ms, double c0, double rate_per_ms,
                          double kappa_per_ms, double s1) {
  const PopulationTriple p = analytic_populations(s1, kappa_per_ms,
                                                  std::max(tau_ms, 0.0));
  return 0.5 * p.P0 * c0 * std::exp(-rate_per_ms * tau_ms);
}

double hahn_envelope_model(double tau_ms, double c0, double rate_per_ms,
                           double kappa_per_ms, double s1) {
  const PopulationTriple p = analytic_populations(s1, kappa_per_ms,
                                                  std::max(tau_ms, 0.0));
  return 0.5 * (p.P0 + p.Pm1) * c0 * std::exp(-rate_per_ms * tau_ms);
}

std::vector<SegmentAmplitude> extract_segment_amplitudes(
    const SignalTrace& trace,
    const std::vector<std::pair<int, int>>& windows, double nu_mhz,
    bool fit_frequency) {
  trace.validate();
  if (nu_mhz == 0.0) {
    throw std::invalid_argument("extract_segment_amplitudes: nu must be != 0");
  }
  std::vector<SegmentAmplitude> out;
  for (const auto& [begin, end] : windows) {
    if (begin < 0 || end > static_cast<int>(trace.tau_ms.size()) ||
        end - begin < 4) {
      throw std::invalid_argument(
          "extract_segment_amplitudes: bad window range");
    }
    const double span_ms = trace.tau_ms[end - 1] - trace.tau_ms[begin];
    if (span_ms * std::abs(nu_mhz) * kMsToUs < 2.0) {
      throw std::invalid_argument(
          "extract_segment_amplitudes: window shorter than 2 periods");
    }

    // Linear solve for b + alpha sin + beta cos gives an exact starting
    // point at fixed frequency.
    Eigen::MatrixXd basis(end - begin, 3);
    Eigen::VectorXd y(end - begin);
    for (int i = begin; i < end; ++i) {
      const double arg = kTwoPi * nu_mhz * trace.tau_ms[i] * kMsToUs;
      basis(i - begin, 0) = 1.0;
      basis(i - begin, 1) = std::sin(arg);
      basis(i - begin, 2) = std::cos(arg);
      y(i - begin) = trace.signal[i];
    }
    const Eigen::Vector3d lin =
        basis.colPivHouseholderQr().solve(y);
    const double a0 = std::hypot(lin(1), lin(2));
    const double phi0 = std::atan2(lin(2), lin(1));

    std::vector<double> xs(trace.tau_ms.begin() + begin,
                           trace.tau_ms.begin() + end);
    std::vector<double> ys(trace.signal.begin() + begin,
                           trace.signal.begin() + end);
    Eigen::VectorXd init(4);
    init << lin(0), a0, nu_mhz, phi0;
    const std::vector<bool> fixed{false, false, !fit_frequency, false};
    const FitResult fit = least_squares(
        [](double tau, const Eigen::VectorXd& th) {
          return segment_sinusoid_model(tau, th(0), th(1), th(2), th(3));
        },
        xs, ys, {"background", "amplitude", "nu_mhz", "phase_rad"}, init,
        fixed);

    SegmentAmplitude seg;
    seg.tau_ms = 0.5 * (trace.tau_ms[begin] + trace.tau_ms[end - 1]);
    seg.background = fit.values(0);
    seg.amplitude = fit.values(1);
    seg.nu_mhz = fit.values(2);
    seg.phase_rad = fit.values(3);
    seg.converged = fit.converged;
    if (seg.amplitude < 0.0) {
      seg.amplitude = -seg.amplitude;
      seg.phase_rad += kPi;
    }
    out.push_back(seg);
  }
  return out;
}

DephasingFit fit_dephasing(Protocol protocol,
                           const std::vector<SegmentAmplitude>& segments,
                           const SpinSystemParams& params,
                           const DephasingFitConfig& cfg) {
  if (segments.size() < 4) {
    throw std::invalid_argument("fit_dephasing: need >= 4 envelope points");
  }
  std::vector<double> tau, amps, bgs;
  for (const auto& s : segments) {
    tau.push_back(s.tau_ms);
    amps.push_back(s.amplitude);
    bgs.push_back(s.background);
  }
  const double s1 = params.s1;

  DephasingFit out;

  const bool is_fid = protocol == Protocol::FID;
  const auto envelope_fn = is_fid ? fid_envelope_model : hahn_envelope_model;

  // Deterministic starting points: kappa from the nominal T1e, d0 = 0,
  // c0 from the first window, decay rate from a log-linear regression of
  // the amplitudes.
  const double kappa_init =
      cfg.fixed_kappa_per_ms.value_or(params.kappa());
  double sum_t = 0.0, sum_l = 0.0, sum_tt = 0.0, sum_tl = 0.0;
  int n_log = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (amps[i] > 1e-12) {
      const double lg = std::log(amps[i]);
      sum_t += tau[i];
      sum_l += lg;
      sum_tt += tau[i] * tau[i];
      sum_tl += tau[i] * lg;
      ++n_log;
    }
  }
  double rate_init = 0.1;
  if (n_log >= 2) {
    const double denom = n_log * sum_tt - sum_t * sum_t;
    if (std::abs(denom) > 1e-30) {
      rate_init = std::max(-(n_log * sum_tl - sum_t * sum_l) / denom, 1e-4);
    }
  }

  if (cfg.joint) {
    // One global fit of (kappa, d0, c0, rate) against backgrounds and
    // amplitudes stacked into a single residual vector.
    Eigen::VectorXd init(4);
    const double c0_init =
        std::clamp(2.0 * amps.front() / std::max(s1, 1e-6), 0.05, 2.0);
    init << kappa_init, cfg.fixed_d0.value_or(0.0), c0_init, rate_init;
    std::vector<bool> fixed{cfg.fixed_kappa_per_ms.has_value(),
                            cfg.fixed_d0.has_value(), false, false};
    const auto residuals = [&](const Eigen::VectorXd& th) {
      Eigen::VectorXd r(2 * static_cast<Eigen::Index>(tau.size()));
      for (std::size_t i = 0; i < tau.size(); ++i) {
        r(static_cast<Eigen::Index>(i)) =
            bgs[i] - background_model(tau[i], th(0), th(1), s1);
        r(static_cast<Eigen::Index>(tau.size() + i)) =
            amps[i] - envelope_fn(tau[i], th(2), th(3), th(0), s1);
      }
      return r;
    };
    const FitResult joint = least_squares_residual(
        residuals, {"kappa_per_ms", "d0", "c0", "rate_per_ms"}, init, fixed);
    out.background = joint;
    out.envelope = joint;
    out.kappa_per_ms = joint.values(0);
    out.d0 = joint.values(1);
    out.c0 = joint.values(2);
    const double rate = joint.values(3);
    out.T2_ms = rate > 0.0 ? 1.0 / rate : 0.0;
    out.T2_sigma_ms =
        rate > 0.0 ? joint.sigma(3) / (rate * rate) : 0.0;
    out.converged = joint.converged && rate > 0.0;
    return out;
  }

  // Stage 1: background -> (kappa, d0).
  {
    Eigen::VectorXd init(2);
    init << kappa_init, cfg.fixed_d0.value_or(0.0);
    std::vector<bool> fixed{cfg.fixed_kappa_per_ms.has_value(),
                            cfg.fixed_d0.has_value()};
    out.background = least_squares(
        [&](double t, const Eigen::VectorXd& th) {
          return background_model(t, th(0), th(1), s1);
        },
        tau, bgs, {"kappa_per_ms", "d0"}, init, fixed);
    out.kappa_per_ms = out.background.values(0);
    out.d0 = out.background.values(1);
  }

  // Stage 2: envelope -> (c0, T2) with populations at the fitted kappa.
  {
    const double kappa = out.kappa_per_ms;
    const double p_first =
        is_fid ? analytic_populations(s1, kappa, tau.front()).P0
               : analytic_populations(s1, kappa, tau.front()).P0 +
                     analytic_populations(s1, kappa, tau.front()).Pm1;
    const double c0_init = std::clamp(
        2.0 * amps.front() / std::max(p_first, 1e-6), 0.05, 2.0);
    Eigen::VectorXd init(2);
    init << c0_init, rate_init;
    out.envelope = least_squares(
        [&](double t, const Eigen::VectorXd& th) {
          return envelope_fn(t, th(0), th(1), kappa, s1);
        },
        tau, amps, {"c0", "rate_per_ms"}, init);
    out.c0 = out.envelope.values(0);
    const double rate = out.envelope.values(1);
    out.T2_ms = rate > 0.0 ? 1.0 / rate : 0.0;
    out.T2_sigma_ms =
        rate > 0.0 ? out.envelope.sigma(1) / (rate * rate) : 0.0;
  }
  out.converged = out.background.converged && out.envelope.converged &&
                  out.T2_ms > 0.0;
  return out;
}

nlohmann::json DephasingFit::to_json() const {
  return {{"background_fit", background.to_json()},
          {"envelope_fit", envelope.to_json()},
          {"kappa_per_ms", kappa_per_ms},
          {"d0", d0},
          {"c0", c0},
          {"T2_ms", T2_ms},
          {"T2_sigma_ms", T2_sigma_ms},
          {"converged", converged}};
}

}  // namespace nvspin
