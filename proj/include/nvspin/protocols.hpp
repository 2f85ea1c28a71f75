#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nvspin/circuits.hpp"
#include "nvspin/spin_model.hpp"

namespace nvspin {

enum class Protocol { FID, Hahn };

// Simulation engine for a protocol sweep.
//  analytic : closed-form signal model (populations from the rate
//             equations, exponential coherence envelopes)
//  lindblad : full 6-level master-equation circuit simulation
//  ensemble : circuit simulation averaged over quasi-static nuclear
//             detunings delta-nu ~ Normal(0, sigma_qs)
enum class Engine { analytic, lindblad, ensemble };

// Photon-count readout channel.  Each shot yields Poisson counts with
// mean lambda = p*lambda_bright + (1-p)*lambda_dark; the normalized
// estimate is unbiased for p.  d0 is a fixed normalization offset
// subtracted from the reported signal.
struct ReadoutModel {
  double lambda_bright = 0.5;  // mean photons per shot when in |0>
  double lambda_dark = 0.15;   // mean photons per shot otherwise
  double d0 = 0.0;             // normalization offset
};

// One densely sampled window of the tau sweep.  The oscillation at
// |nu_signal| ~ 0.342 MHz only needs resolving inside short windows
// around each envelope sample point.
struct SegmentSpec {
  double center_ms = 0.0;
  double span_ms = 0.0;
  int points = 0;
};

struct ProtocolConfig {
  Protocol protocol = Protocol::FID;
  std::vector<SegmentSpec> segments;      // empty: default grid
  std::vector<double> explicit_tau_ms;    // overrides segments when set
  double nu_d_mhz = -0.5;                 // readout phase-ramp detuning
  double phi0_rad = 0.0;
  Engine engine = Engine::analytic;
  long long shots = 0;                    // 0 = noiseless
  int ensemble_size = 400;
  double sigma_qs_mhz = 0.0;              // quasi-static detuning std-dev
  std::uint64_t seed = 1;
  ReadoutModel readout;
  double gamma_phi_per_ms = 0.0;          // nuclear pure-dephasing rate
  std::optional<double> kappa_per_ms;     // default: params.kappa()
  double c0_fid = 1.0;                    // analytic-engine amplitudes
  double c0_hahn = 1.0;
  int threads = 1;

  void validate() const;

  // Detected oscillation frequency, signed: nu_C + nu_d for the FID,
  // nu_d for the Hahn echo.
  double nu_signal_mhz(const SpinSystemParams& params) const;

  // Copy with the default segment grid filled in when none was given.
  ProtocolConfig resolved(const SpinSystemParams& params) const;

  // Both require a resolved grid (explicit taus or segments).
  std::vector<double> tau_grid_ms() const;
  std::vector<std::pair<int, int>> segment_ranges() const;
};

// Detuning conventions that give both protocols the same detected
// frequency: nu_d^FID = -0.5 MHz, nu_d^Hahn = nu_d^FID + nu_C.
double default_nu_d(Protocol p, const SpinSystemParams& params);

std::vector<SegmentSpec> default_segments(Protocol p, double nu_signal_mhz);

struct SignalTrace {
  std::vector<double> tau_ms;
  std::vector<double> signal;
  std::vector<double> sigma;  // per-point standard error (0 = exact)
  std::vector<long long> counts;  // summed photon counts per point
  std::vector<std::pair<int, int>> segments;  // [begin,end) index ranges
  nlohmann::json meta;

  void validate() const;
};

// Closed-form FID signal:
//   p(tau) = 1/2 [P0 + P-1 + P0 c_FID(tau) sin(2 pi (nu_C+nu_d) tau + phi0)]
// with c_FID(tau) = c0 exp(-tau/T2*).
SignalTrace fid_analytic(const ProtocolConfig& cfg,
                         const SpinSystemParams& params);

// Closed-form Hahn-echo signal:
//   p(tau) = 1/2 [P0 + P-1] [1 + c_Hahn(tau) sin(2 pi nu_d tau + phi0)]
// with c_Hahn(tau) = c0 exp(-tau/T2).
SignalTrace hahn_analytic(const ProtocolConfig& cfg,
                          const SpinSystemParams& params);

// Circuit-level simulation (engine lindblad or ensemble).
SignalTrace simulate_protocol(const ProtocolConfig& cfg,
                              const SpinSystemParams& params);

// Poisson photon noise on an existing trace; deterministic per-point
// substreams keyed by (seed, point index).
SignalTrace add_shot_noise(const SignalTrace& trace,
                           const ProtocolConfig& cfg);

// Full pipeline: engine dispatch plus shot noise when shots > 0.
SignalTrace simulate_trace(const ProtocolConfig& cfg,
                           const SpinSystemParams& params);

// CSV columns: tau_ms,signal,stderr.  JSON carries the full config echo.
void write_trace_csv(const SignalTrace& trace, const std::string& path);
void write_trace_json(const SignalTrace& trace, const std::string& path);
SignalTrace read_trace(const std::string& path);

}  // namespace nvspin
