#include "nvspin/circuits.hpp"

#include <cmath>
#include <stdexcept>

namespace nvspin {

Gate Gate::hadamard_nuclear(std::set<int> blocks) {
  Gate g;
  g.kind = GateKind::HadamardNuclear;
  g.blocks = std::move(blocks);
  return g;
}

Gate Gate::pi_x_nuclear(std::set<int> blocks) {
  Gate g;
  g.kind = GateKind::PiXNuclear;
  g.blocks = std::move(blocks);
  return g;
}

Gate Gate::swap_e0m1() {
  Gate g;
  g.kind = GateKind::SwapE0M1;
  return g;
}

Gate Gate::mw_pulse(double angle_deg, double phase_rad) {
  Gate g;
  g.kind = GateKind::MWPulse;
  g.angle_deg = angle_deg;
  g.phase_rad = phase_rad;
  return g;
}

Gate Gate::mw_pulse_ramped(double angle_deg, double nu_d_mhz,
                           double phi0_rad) {
  Gate g;
  g.kind = GateKind::MWPulse;
  g.angle_deg = angle_deg;
  g.ramp = PhaseRamp{nu_d_mhz, phi0_rad};
  return g;
}

Gate Gate::free_evolution(double tau_fraction) {
  Gate g;
  g.kind = GateKind::FreeEvolution;
  g.tau_fraction = tau_fraction;
  return g;
}

Gate mw90_phase(double nu_d_mhz, double tau_ms, double phi0_rad) {
  const double phase = kTwoPi * nu_d_mhz * tau_ms * kMsToUs + phi0_rad;
  return Gate::mw_pulse(90.0, phase);
}

void Circuit::validate() const {
  double fraction = 0.0;
  for (const auto& g : gates) {
    if (g.kind == GateKind::FreeEvolution) {
      if (g.tau_fraction < 0.0) {
        throw std::invalid_argument("Circuit: negative evolution fraction");
      }
      fraction += g.tau_fraction;
    }
  }
  if (fraction != 0.0 && std::abs(fraction - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "Circuit: free-evolution fractions must sum to 1");
  }
}

Circuit make_fid_circuit(double nu_d_mhz, double phi0_rad) {
  Circuit c;
  c.label = "FID";
  c.gates = {Gate::hadamard_nuclear({0}), Gate::free_evolution(1.0),
             Gate::swap_e0m1(),
             Gate::mw_pulse_ramped(90.0, nu_d_mhz, phi0_rad)};
  return c;
}

Circuit make_hahn_circuit(double nu_d_mhz, double phi0_rad) {
  Circuit c;
  c.label = "Hahn";
  c.gates = {Gate::hadamard_nuclear({0}), Gate::free_evolution(0.5),
             Gate::pi_x_nuclear({0, -1}),  Gate::free_evolution(0.5),
             Gate::swap_e0m1(),
             Gate::mw_pulse_ramped(90.0, nu_d_mhz, phi0_rad)};
  return c;
}

UnitaryOperator gate_unitary(const Gate& g, const SpinSystemParams& params) {
  params.validate();
  UnitaryOperator u;
  switch (g.kind) {
    case GateKind::HadamardNuclear: {
      if (g.blocks.empty()) {
        throw std::invalid_argument("gate_unitary: empty block set");
      }
      const double r = 1.0 / std::sqrt(2.0);
      for (int m_s : g.blocks) {
        const int k = block_offset(m_s);
        u.u(k, k) = r;
        u.u(k, k + 1) = r;
        u.u(k + 1, k) = r;
        u.u(k + 1, k + 1) = -r;
      }
      break;
    }
    case GateKind::PiXNuclear: {
      if (g.blocks.empty()) {
        throw std::invalid_argument("gate_unitary: empty block set");
      }
      for (int m_s : g.blocks) {
        const int k = block_offset(m_s);
        u.u(k, k) = 0.0;
        u.u(k + 1, k + 1) = 0.0;
        u.u(k, k + 1) = 1.0;
        u.u(k + 1, k) = 1.0;
      }
      break;
    }
    case GateKind::SwapE0M1: {
      // |0,dn> <-> |-1,up> exchanges the electron {|0>,|-1>} qubit with
      // the nucleus; |0,up> and |-1,dn> are fixed points.
      u.u(3, 3) = 0.0;
      u.u(4, 4) = 0.0;
      u.u(3, 4) = 1.0;
      u.u(4, 3) = 1.0;
      break;
    }
    case GateKind::MWPulse: {
      // Rotation of the electron {|0>,|-1>} transition; the pulse phase
      // sets the in-plane rotation axis.  Rotation sense and phase sign
      // are fixed so that a tau=0 readout pulse contributes +sin(phi0)
      // and the detected FID frequency is nu_C + nu_d.
      const double half = 0.5 * g.angle_deg * kPi / 180.0;
      const cplx c = std::cos(half);
      const cplx s = std::sin(half);
      const cplx e_plus = std::exp(kI * g.phase_rad);
      const cplx e_minus = std::exp(-kI * g.phase_rad);
      for (int n = 0; n < 2; ++n) {
        const int i0 = 2 + n;  // |0,n>
        const int i1 = 4 + n;  // |-1,n>
        u.u(i0, i0) = c;
        u.u(i1, i1) = c;
        u.u(i0, i1) = kI * e_minus * s;
        u.u(i1, i0) = kI * e_plus * s;
      }
      break;
    }
    case GateKind::FreeEvolution:
      throw std::invalid_argument(
          "gate_unitary: free evolution depends on the noise engine; use "
          "run_circuit or free_evolution_unitary");
  }
  return u;
}

UnitaryOperator free_evolution_unitary(const SpinSystemParams& params,
                                       double duration_ms,
                                       double extra_detuning_mhz) {
  UnitaryOperator u;
  const double t_us = duration_ms * kMsToUs;
  for (int m_s : {1, 0, -1}) {
    const int k = block_offset(m_s);
    const Mat2 h = nuclear_block_hamiltonian(params, m_s, extra_detuning_mhz);
    u.u.block<2, 2>(k, k) =
        matrix_exponential(-kI * kTwoPi * h, t_us).topLeftCorner<2, 2>();
  }
  return u;
}

namespace {

// Survivor evolution of one 2x2 block: unitary precession plus nuclear
// z-dephasing, solved exactly through the 4x4 block Liouvillian.
Mat2 evolve_block(const Mat2& rho_b, const Mat2& h_mhz,
                  double gamma_phi_per_ms, double t_ms) {
  const double t_us = t_ms * kMsToUs;
  const Mat2 id = Mat2::Identity();
  auto kron2 = [](const Mat2& a, const Mat2& b) {
    Eigen::Matrix<cplx, 4, 4> out;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
      }
    }
    return out;
  };
  // vec (column-major) Liouvillian: -i 2pi (I (x) H - H^T (x) I).
  Eigen::Matrix<cplx, 4, 4> l =
      -kI * kTwoPi * (kron2(id, h_mhz) - kron2(h_mhz.transpose(), id));
  if (gamma_phi_per_ms > 0.0) {
    Mat2 sz;
    sz << 1.0, 0.0, 0.0, -1.0;
    l += (gamma_phi_per_ms / kMsToUs) *
         (kron2(sz, sz) - Eigen::Matrix<cplx, 4, 4>::Identity());
  }
  const Eigen::Matrix<cplx, 4, 4> prop =
      matrix_exponential(l, t_us).topLeftCorner<4, 4>();
  Eigen::Matrix<cplx, 4, 1> v;
  v << rho_b(0, 0), rho_b(1, 0), rho_b(0, 1), rho_b(1, 1);
  v = prop * v;
  Mat2 out;
  out << v(0), v(2), v(1), v(3);
  return out;
}

// Free evolution with rate-equation population mixing: block populations
// follow the hopping model; within each block the surviving part evolves
// coherently (damped at its departure rate) and hopped-in population
// arrives nuclear-mixed, carrying no coherence.
DensityMatrix evolve_free_analytic(const DensityMatrix& rho,
                                   const SpinSystemParams& params,
                                   const EvolutionConfig& cfg,
                                   double duration_ms) {
  const double kappa = cfg.kappa(params);
  const RateModel model = RateModel::standard(kappa);
  const Eigen::Matrix3d g3 = model.generator();

  const PopulationTriple p = populations(rho);
  const PopulationTriple p_next = numeric_populations(p, model, duration_ms);

  DensityMatrix out;
  for (int m_s : {1, 0, -1}) {
    const int k = block_offset(m_s);
    const int b = pop_index(m_s);
    const double departure = -g3(b, b);  // 1/ms
    const double survive = std::exp(-departure * duration_ms);
    const Mat2 h = nuclear_block_hamiltonian(params, m_s,
                                             cfg.extra_detuning_mhz);
    const Mat2 survivors =
        survive *
        evolve_block(rho.rho.block<2, 2>(k, k), h, cfg.gamma_phi_per_ms,
                     duration_ms);
    const double arrived = p_next[b] - survive * p[b];
    out.rho.block<2, 2>(k, k) =
        survivors + 0.5 * std::max(arrived, 0.0) * Mat2::Identity();
  }
  return out;
}

}  // namespace

DensityMatrix evolve_free(const DensityMatrix& rho,
                          const SpinSystemParams& params,
                          const EvolutionConfig& cfg, double duration_ms) {
  if (duration_ms < 0.0) {
    throw std::invalid_argument("evolve_free: negative duration");
  }
  if (duration_ms == 0.0) return rho;
  const double kappa = cfg.kappa(params);
  if (kappa == 0.0 && cfg.gamma_phi_per_ms == 0.0) {
    // No incoherent channel: plain block-unitary propagation.
    return apply_unitary(rho, free_evolution_unitary(
                                  params, duration_ms,
                                  cfg.extra_detuning_mhz));
  }
  switch (cfg.engine) {
    case EvolutionEngine::analytic:
      return evolve_free_analytic(rho, params, cfg, duration_ms);
    case EvolutionEngine::lindblad: {
      const LindbladGenerator gen =
          build_lindblad(params, cfg.gamma_phi_per_ms, 0.0, kappa,
                         cfg.extra_detuning_mhz);
      return evolve_lindblad(rho, gen, duration_ms);
    }
  }
  throw std::logic_error("evolve_free: unknown engine");
}

DensityMatrix run_circuit(const DensityMatrix& rho0, const Circuit& c,
                          double tau_ms, const SpinSystemParams& params,
                          const EvolutionConfig& cfg) {
  if (tau_ms < 0.0) throw std::invalid_argument("run_circuit: negative tau");
  c.validate();
  DensityMatrix rho = rho0;
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::FreeEvolution) {
      rho = evolve_free(rho, params, cfg, g.tau_fraction * tau_ms);
    } else if (g.kind == GateKind::MWPulse && g.ramp.has_value()) {
      rho = apply_unitary(
          rho, gate_unitary(mw90_phase(g.ramp->nu_d_mhz, tau_ms,
                                       g.ramp->phi0_rad),
                            params));
    } else {
      rho = apply_unitary(rho, gate_unitary(g, params));
    }
  }
  return rho;
}

double readout_p0(const DensityMatrix& rho) {
  return ms_block(rho, 0).trace().real();
}

nlohmann::json circuit_to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& g : c.gates) {
    nlohmann::json jg;
    switch (g.kind) {
      case GateKind::HadamardNuclear: jg["kind"] = "hadamard_nuclear"; break;
      case GateKind::PiXNuclear: jg["kind"] = "pi_x_nuclear"; break;
      case GateKind::SwapE0M1: jg["kind"] = "swap_e0m1"; break;
      case GateKind::MWPulse: jg["kind"] = "mw_pulse"; break;
      case GateKind::FreeEvolution: jg["kind"] = "free_evolution"; break;
    }
    if (!g.blocks.empty()) jg["blocks"] = g.blocks;
    if (g.kind == GateKind::MWPulse) {
      jg["angle_deg"] = g.angle_deg;
      if (g.ramp.has_value()) {
        jg["phase_ramp"] = {{"nu_d_mhz", g.ramp->nu_d_mhz},
                            {"phi0_rad", g.ramp->phi0_rad}};
      } else {
        jg["phase_rad"] = g.phase_rad;
      }
    }
    if (g.kind == GateKind::FreeEvolution) {
      jg["tau_fraction"] = g.tau_fraction;
    }
    gates.push_back(jg);
  }
  return nlohmann::json{{"label", c.label}, {"gates", gates}};
}

Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c;
  c.label = j.at("label").get<std::string>();
  for (const auto& jg : j.at("gates")) {
    const std::string kind = jg.at("kind").get<std::string>();
    Gate g;
    if (kind == "hadamard_nuclear") {
      g = Gate::hadamard_nuclear(
          jg.value("blocks", std::set<int>{0}));
    } else if (kind == "pi_x_nuclear") {
      g = Gate::pi_x_nuclear(jg.value("blocks", std::set<int>{0, -1}));
    } else if (kind == "swap_e0m1") {
      g = Gate::swap_e0m1();
    } else if (kind == "mw_pulse") {
      const double angle = jg.at("angle_deg").get<double>();
      if (jg.contains("phase_ramp")) {
        g = Gate::mw_pulse_ramped(
            angle, jg["phase_ramp"].at("nu_d_mhz").get<double>(),
            jg["phase_ramp"].at("phi0_rad").get<double>());
      } else {
        g = Gate::mw_pulse(angle, jg.value("phase_rad", 0.0));
      }
    } else if (kind == "free_evolution") {
      g = Gate::free_evolution(jg.value("tau_fraction", 1.0));
    } else {
      throw std::invalid_argument("circuit_from_json: unknown gate kind '" +
                                  kind + "'");
    }
    c.gates.push_back(std::move(g));
  }
  c.validate();
  return c;
}

}  // namespace nvspin
