#include "nvspin/validation.hpp"

#include <cmath>

#include "nvspin/circuits.hpp"
#include "nvspin/fitting.hpp"
#include "nvspin/protocols.hpp"
#include "nvspin/qcore.hpp"
#include "nvspin/relaxation.hpp"
#include "nvspin/rng.hpp"
#include "nvspin/spin_model.hpp"

namespace nvspin {

namespace {

ValidationCheck make_check(const std::string& name, double value,
                           double tolerance, const std::string& detail = "") {
  return {name, value, tolerance, value <= tolerance, detail};
}

}  // namespace

std::vector<ValidationCheck> run_validation_suite() {
  std::vector<ValidationCheck> checks;
  const SpinSystemParams params;

  // Conditional nuclear precession frequencies against their rounded
  // reference values.
  {
    const double nu0 = nuclear_precession_frequency(params, 0);
    const double num1 = nuclear_precession_frequency(params, -1);
    const double nup1 = nuclear_precession_frequency(params, 1);
    checks.push_back(make_check("nu0 = 0.158 MHz", std::abs(nu0 - 0.158),
                                5e-4, "nu0 = " + std::to_string(nu0)));
    checks.push_back(make_check("nu(-1) = 0.110 MHz", std::abs(num1 - 0.110),
                                5e-4, "nu(-1) = " + std::to_string(num1)));
    checks.push_back(make_check("nu(+1) = 0.329 MHz", std::abs(nup1 - 0.329),
                                5e-4, "nu(+1) = " + std::to_string(nup1)));
  }

  // Frequency equals the eigenvalue gap of the corresponding block, for
  // randomized valid parameter sets.
  {
    Rng rng = Rng::substream(20240901, 77);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      SpinSystemParams p;
      p.nu_C = 0.05 + 0.4 * rng.uniform();
      p.A_zz = -0.4 + 0.8 * rng.uniform();
      p.A_zx = 0.4 * rng.uniform();
      for (int m_s : {-1, 0, 1}) {
        Eigen::SelfAdjointEigenSolver<Mat2> es(
            nuclear_block_hamiltonian(p, m_s), Eigen::EigenvaluesOnly);
        const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);
        const double nu = nuclear_precession_frequency(p, m_s);
        worst = std::max(worst, std::abs(gap - nu) / std::max(nu, 1e-12));
      }
    }
    checks.push_back(make_check("frequency = block eigen-gap (relative)",
                                worst, 1e-10));
  }

  // The Hamiltonian commutes with Sz: no elements outside the m_S blocks.
  {
    const Mat6 h = build_hamiltonian(params);
    double off = 0.0;
    for (int m_s : {1, 0, -1}) {
      const int k = block_offset(m_s);
      for (int r = k; r < k + 2; ++r) {
        for (int c = 0; c < 6; ++c) {
          if (c < k || c >= k + 2) off = std::max(off, std::abs(h(r, c)));
        }
      }
    }
    checks.push_back(make_check("Hamiltonian block-diagonal in m_S", off,
                                1e-14));
  }

  // Closed-form populations against the rate-matrix exponential.
  {
    const RateModel model = RateModel::standard(params.kappa());
    const PopulationTriple init{params.s1, 0.0, 1.0 - params.s1};
    double worst = 0.0, sum_dev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double tau = 10.0 * params.T1e * i / 1000.0;
      const PopulationTriple a =
          analytic_populations(params.s1, params.kappa(), tau);
      const PopulationTriple n = numeric_populations(init, model, tau);
      worst = std::max({worst, std::abs(a.P0 - n.P0), std::abs(a.Pm1 - n.Pm1),
                        std::abs(a.Pp1 - n.Pp1)});
      sum_dev = std::max(sum_dev, std::abs(a.sum() - 1.0));
    }
    checks.push_back(
        make_check("analytic vs rate-matrix populations", worst, 1e-10));
    checks.push_back(make_check("population sum = 1", sum_dev, 1e-12));
  }

  // Lindblad populations against the closed forms on a short grid.
  {
    const LindbladGenerator gen = build_lindblad(params, 0.0);
    DensityMatrix rho = mixed_state({{2, params.s1}, {1, 1.0 - params.s1}});
    rho = apply_unitary(rho,
                        gate_unitary(Gate::hadamard_nuclear({0}), params));
    double worst = 0.0, trace_dev = 0.0;
    for (double tau : {0.5, 2.0, 5.5, 11.0}) {
      const DensityMatrix evolved = evolve_lindblad(rho, gen, tau);
      const PopulationTriple p = populations(evolved);
      const PopulationTriple a =
          analytic_populations(params.s1, params.kappa(), tau);
      worst = std::max({worst, std::abs(p.P0 - a.P0), std::abs(p.Pm1 - a.Pm1),
                        std::abs(p.Pp1 - a.Pp1)});
      trace_dev = std::max(trace_dev, std::abs(evolved.trace() - 1.0));
    }
    checks.push_back(
        make_check("Lindblad populations vs closed form", worst, 1e-7));
    checks.push_back(make_check("Lindblad trace drift", trace_dev, 1e-9));
  }

  // RK4 agrees with the exact superoperator exponential.
  {
    const LindbladGenerator gen = build_lindblad(params, 0.02);
    DensityMatrix rho = mixed_state({{2, params.s1}, {1, 1.0 - params.s1}});
    rho = apply_unitary(rho,
                        gate_unitary(Gate::hadamard_nuclear({0}), params));
    const double tau = 0.05;  // ms
    const DensityMatrix exact = evolve_lindblad(rho, gen, tau);
    const DensityMatrix rk4 = evolve_lindblad_rk4(rho, gen, tau, 5e-6);
    const double dev = (exact.rho - rk4.rho).cwiseAbs().maxCoeff();
    checks.push_back(make_check("RK4 vs exact propagator", dev, 1e-7));
  }

  // SWAP: involution and the coherence-transfer block structure.
  {
    const UnitaryOperator swap = gate_unitary(Gate::swap_e0m1(), params);
    const double invol =
        (swap.u * swap.u - Mat6::Identity()).cwiseAbs().maxCoeff();
    checks.push_back(make_check("SWAP is an involution", invol, 1e-15));

    const PopulationTriple p =
        analytic_populations(params.s1, params.kappa(), 2.5);
    const cplx coh = 0.37 * std::exp(kI * 1.1);
    DensityMatrix state;
    state.rho.block<2, 2>(2, 2) << 0.5 * p.P0, 0.5 * p.P0 * coh,
        0.5 * p.P0 * std::conj(coh), 0.5 * p.P0;
    state.rho.block<2, 2>(4, 4) = 0.5 * p.Pm1 * Mat2::Identity();
    Mat2 nuc1;
    nuc1 << 0.7, cplx(0.0, 0.1), cplx(0.0, -0.1), 0.3;
    state.rho.block<2, 2>(0, 0) = p.Pp1 * nuc1;

    Mat6 expected = Mat6::Zero();
    expected(2, 2) = 0.5 * p.P0;
    expected(4, 4) = 0.5 * p.P0;
    expected(2, 4) = 0.5 * p.P0 * coh;
    expected(4, 2) = 0.5 * p.P0 * std::conj(coh);
    expected(3, 3) = 0.5 * p.Pm1;
    expected(5, 5) = 0.5 * p.Pm1;
    expected.block<2, 2>(0, 0) = p.Pp1 * nuc1;

    const DensityMatrix swapped = apply_unitary(state, swap);
    const double dev = (swapped.rho - expected).cwiseAbs().maxCoeff();
    checks.push_back(
        make_check("SWAP moves nuclear coherence to the electron", dev,
                   1e-12));
  }

  // Quasi-static noise: the echo refocuses what the FID loses.  A fast
  // phase ramp keeps the fit windows much shorter than the decay scale.
  {
    ProtocolConfig cfg;
    cfg.engine = Engine::ensemble;
    cfg.sigma_qs_mhz = 0.1;
    cfg.ensemble_size = 300;
    cfg.kappa_per_ms = 0.0;
    cfg.seed = 9;
    const double nu_ramp = 3.0;  // |detected frequency| in MHz
    const double span_ms = 3.0 / nu_ramp / kMsToUs;
    for (double center_us : {0.6, 1.9, 3.75, 5.0}) {
      cfg.segments.push_back({center_us / kMsToUs, span_ms, 24});
    }
    cfg.protocol = Protocol::Hahn;
    cfg.nu_d_mhz = -nu_ramp;
    const SignalTrace hahn = simulate_protocol(cfg, params);
    const auto hahn_amps = extract_segment_amplitudes(
        hahn, cfg.segment_ranges(), cfg.nu_signal_mhz(params));
    double hahn_spread = 0.0;
    for (const auto& s : hahn_amps) {
      hahn_spread = std::max(hahn_spread,
                             std::abs(s.amplitude - hahn_amps[0].amplitude));
    }
    checks.push_back(
        make_check("Hahn amplitude flat under quasi-static noise",
                   hahn_spread, 1e-3));

    cfg.protocol = Protocol::FID;
    cfg.nu_d_mhz = -nu_ramp - params.nu_C;
    const SignalTrace fid = simulate_protocol(cfg, params);
    const auto fid_amps = extract_segment_amplitudes(
        fid, cfg.segment_ranges(), cfg.nu_signal_mhz(params));
    // Gaussian ensemble average: amplitude(tau) ~ exp(-2 (pi sigma tau)^2).
    auto oracle = [&](double tau_us) {
      return std::exp(-2.0 * std::pow(kPi * cfg.sigma_qs_mhz * tau_us, 2));
    };
    const double ratio = fid_amps[2].amplitude / fid_amps[0].amplitude;
    const double expected = oracle(fid_amps[2].tau_ms * kMsToUs) /
                            oracle(fid_amps[0].tau_ms * kMsToUs);
    checks.push_back(make_check("FID Gaussian decay matches oracle",
                                std::abs(ratio - expected), 0.08,
                                "ratio = " + std::to_string(ratio)));
  }

  return checks;
}

}  // namespace nvspin
