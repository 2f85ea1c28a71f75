#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "nvspin/qcore.hpp"
#include "nvspin/relaxation.hpp"
#include "nvspin/spin_model.hpp"

namespace nvspin {

enum class GateKind {
  HadamardNuclear,  // 2x2 Hadamard on the nucleus inside listed m_S blocks
  PiXNuclear,       // 180-degree x rotation (sigma_x) in listed blocks
  SwapE0M1,         // |0,dn> <-> |-1,up>; identity on the m_S=+1 block
  MWPulse,          // electron {|0>,|-1>} rotation, identity on the nucleus
  FreeEvolution,    // share of the swept evolution time tau
};

// Phase of a readout pulse ramped with the free-precession time:
// phi = 2 pi nu_d tau + phi0.
struct PhaseRamp {
  double nu_d_mhz = 0.0;
  double phi0_rad = 0.0;
};

struct Gate {
  GateKind kind = GateKind::FreeEvolution;
  std::set<int> blocks;        // nuclear gates
  double angle_deg = 0.0;      // MWPulse
  double phase_rad = 0.0;      // MWPulse, resolved phase
  std::optional<PhaseRamp> ramp;  // MWPulse, tau-dependent phase
  double tau_fraction = 0.0;   // FreeEvolution

  static Gate hadamard_nuclear(std::set<int> blocks = {0});
  static Gate pi_x_nuclear(std::set<int> blocks = {0, -1});
  static Gate swap_e0m1();
  static Gate mw_pulse(double angle_deg, double phase_rad);
  static Gate mw_pulse_ramped(double angle_deg, double nu_d_mhz,
                              double phi0_rad);
  static Gate free_evolution(double tau_fraction);
};

// 90-degree readout pulse with the ramped phase resolved at a given tau.
Gate mw90_phase(double nu_d_mhz, double tau_ms, double phi0_rad);

struct Circuit {
  std::string label = "custom";
  std::vector<Gate> gates;

  // FreeEvolution fractions must sum to 0 or 1 (a single swept tau).
  void validate() const;
};

// FID:  H(nuclear,{0}) - tau - SWAP - MW90(phi(tau)).
Circuit make_fid_circuit(double nu_d_mhz, double phi0_rad);
// Hahn: H(nuclear,{0}) - tau/2 - 180x({0,-1}) - tau/2 - SWAP - MW90(phi(tau)).
Circuit make_hahn_circuit(double nu_d_mhz, double phi0_rad);

// How FreeEvolution segments are propagated.
enum class EvolutionEngine {
  analytic,  // block-unitary survivors + rate-equation population mixing
  lindblad,  // exact 36x36 superoperator exponential
};

struct EvolutionConfig {
  EvolutionEngine engine = EvolutionEngine::analytic;
  std::optional<double> kappa_per_ms;  // default: params.kappa()
  double gamma_phi_per_ms = 0.0;       // nuclear pure dephasing
  double extra_detuning_mhz = 0.0;     // quasi-static shift of nu_C

  double kappa(const SpinSystemParams& p) const {
    return kappa_per_ms.value_or(p.kappa());
  }
};

// 6x6 unitary of an instantaneous gate.  FreeEvolution is rejected here;
// its propagation depends on the noise configuration (see run_circuit).
UnitaryOperator gate_unitary(const Gate& g, const SpinSystemParams& params);

// Noise-free propagator of the block Hamiltonians for a fixed duration.
UnitaryOperator free_evolution_unitary(const SpinSystemParams& params,
                                       double duration_ms,
                                       double extra_detuning_mhz = 0.0);

// One free-evolution segment under the configured engine.
DensityMatrix evolve_free(const DensityMatrix& rho,
                          const SpinSystemParams& params,
                          const EvolutionConfig& cfg, double duration_ms);

// Applies the gates in order, substituting tau into FreeEvolution
// segments and ramped pulse phases.
DensityMatrix run_circuit(const DensityMatrix& rho0, const Circuit& c,
                          double tau_ms, const SpinSystemParams& params,
                          const EvolutionConfig& cfg);

// Population of the electron |0> level (trace of the m_S=0 block).
double readout_p0(const DensityMatrix& rho);

// Structured-text (JSON) description: name, gate list, block sets.
nlohmann::json circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const nlohmann::json& j);

}  // namespace nvspin
