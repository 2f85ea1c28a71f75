#include "nvspin/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nvspin/rng.hpp"
#include "nvspin/serialize.hpp"

namespace nvspin {

namespace {

constexpr std::uint64_t kPurposeShot = 1;
constexpr std::uint64_t kPurposeEnsemble = 2;

// Index-addressed parallel loop; results are written by index so the
// outcome is identical for any thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

double checked_signal(double p) {
  if (!std::isfinite(p)) {
    throw std::runtime_error("protocol: non-finite signal value");
  }
  return p;
}

}  // namespace

void ProtocolConfig::validate() const {
  if (shots < 0) throw std::invalid_argument("ProtocolConfig: shots < 0");
  if (ensemble_size <= 0 && engine == Engine::ensemble) {
    throw std::invalid_argument("ProtocolConfig: ensemble_size must be > 0");
  }
  if (sigma_qs_mhz < 0.0 || gamma_phi_per_ms < 0.0) {
    throw std::invalid_argument("ProtocolConfig: negative noise rate");
  }
  if (kappa_per_ms.has_value() && *kappa_per_ms < 0.0) {
    throw std::invalid_argument("ProtocolConfig: negative kappa");
  }
  if (!(readout.lambda_bright > readout.lambda_dark) ||
      readout.lambda_dark < 0.0) {
    throw std::invalid_argument(
        "ProtocolConfig: need lambda_bright > lambda_dark >= 0");
  }
  if (threads < 1) throw std::invalid_argument("ProtocolConfig: threads < 1");
  if (explicit_tau_ms.empty() && segments.empty()) return;
  const auto grid = tau_grid_ms();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) {
      throw std::invalid_argument("ProtocolConfig: negative tau");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument(
          "ProtocolConfig: tau grid must be strictly increasing");
    }
  }
}

ProtocolConfig ProtocolConfig::resolved(const SpinSystemParams& params) const {
  ProtocolConfig out = *this;
  if (out.explicit_tau_ms.empty() && out.segments.empty()) {
    out.segments = default_segments(protocol, nu_signal_mhz(params));
  }
  return out;
}

double ProtocolConfig::nu_signal_mhz(const SpinSystemParams& params) const {
  return protocol == Protocol::FID ? params.nu_C + nu_d_mhz : nu_d_mhz;
}

double default_nu_d(Protocol p, const SpinSystemParams& params) {
  const double nu_d_fid = -0.5;
  return p == Protocol::FID ? nu_d_fid : nu_d_fid + params.nu_C;
}

std::vector<SegmentSpec> default_segments(Protocol p, double nu_signal_mhz) {
  const double period_ms = 1.0 / (std::abs(nu_signal_mhz) * kMsToUs);
  const double span = 3.0 * period_ms;
  const int n_windows = 14;
  const double first = 0.25, last = 27.0;
  std::vector<SegmentSpec> segs;
  for (int k = 0; k < n_windows; ++k) {
    const double center =
        first + (last - first) * k / static_cast<double>(n_windows - 1);
    segs.push_back({center, span, 30});
  }
  (void)p;
  return segs;
}

std::vector<double> ProtocolConfig::tau_grid_ms() const {
  if (!explicit_tau_ms.empty()) return explicit_tau_ms;
  if (segments.empty()) {
    throw std::logic_error(
        "ProtocolConfig: tau grid unresolved; call resolved() first");
  }
  std::vector<double> grid;
  for (const auto& s : segments) {
    if (s.points < 2 || s.span_ms <= 0.0) {
      throw std::invalid_argument("SegmentSpec: need points >= 2, span > 0");
    }
    for (int j = 0; j < s.points; ++j) {
      grid.push_back(s.center_ms +
                     s.span_ms * (static_cast<double>(j) / (s.points - 1) -
                                  0.5));
    }
  }
  return grid;
}

std::vector<std::pair<int, int>> ProtocolConfig::segment_ranges() const {
  std::vector<std::pair<int, int>> ranges;
  if (!explicit_tau_ms.empty()) {
    ranges.emplace_back(0, static_cast<int>(explicit_tau_ms.size()));
    return ranges;
  }
  if (segments.empty()) {
    throw std::logic_error(
        "ProtocolConfig: tau grid unresolved; call resolved() first");
  }
  int begin = 0;
  for (const auto& s : segments) {
    ranges.emplace_back(begin, begin + s.points);
    begin += s.points;
  }
  return ranges;
}

void SignalTrace::validate() const {
  if (tau_ms.size() != signal.size() ||
      (!sigma.empty() && sigma.size() != signal.size())) {
    throw std::invalid_argument("SignalTrace: length mismatch");
  }
}

namespace {

SignalTrace make_trace_skeleton(const ProtocolConfig& cfg,
                                const SpinSystemParams& params) {
  SignalTrace trace;
  trace.tau_ms = cfg.tau_grid_ms();
  trace.signal.assign(trace.tau_ms.size(), 0.0);
  trace.sigma.assign(trace.tau_ms.size(), 0.0);
  trace.segments = cfg.segment_ranges();
  trace.meta = {{"schema_version", 1},
                {"spin", spin_params_to_json(params)},
                {"protocol", protocol_config_to_json(cfg)}};
  return trace;
}

}  // namespace

SignalTrace fid_analytic(const ProtocolConfig& cfg,
                         const SpinSystemParams& params) {
  if (cfg.protocol != Protocol::FID) {
    throw std::invalid_argument("fid_analytic: config protocol is not FID");
  }
  params.validate();
  const ProtocolConfig rc = cfg.resolved(params);
  rc.validate();
  const double kappa = rc.kappa_per_ms.value_or(params.kappa());
  const double nu_s = rc.nu_signal_mhz(params);
  SignalTrace trace = make_trace_skeleton(rc, params);
  for (std::size_t i = 0; i < trace.tau_ms.size(); ++i) {
    const double tau = trace.tau_ms[i];
    const PopulationTriple p = analytic_populations(params.s1, kappa, tau);
    const double c_fid = rc.c0_fid * std::exp(-tau / params.T2star_C);
    const double phase = kTwoPi * nu_s * tau * kMsToUs + rc.phi0_rad;
    const double value =
        0.5 * (p.P0 + p.Pm1 + p.P0 * c_fid * std::sin(phase));
    trace.signal[i] = checked_signal(value) - rc.readout.d0;
  }
  return trace;
}

SignalTrace hahn_analytic(const ProtocolConfig& cfg,
                          const SpinSystemParams& params) {
  if (cfg.protocol != Protocol::Hahn) {
    throw std::invalid_argument("hahn_analytic: config protocol is not Hahn");
  }
  params.validate();
  const ProtocolConfig rc = cfg.resolved(params);
  rc.validate();
  const double kappa = rc.kappa_per_ms.value_or(params.kappa());
  SignalTrace trace = make_trace_skeleton(rc, params);
  for (std::size_t i = 0; i < trace.tau_ms.size(); ++i) {
    const double tau = trace.tau_ms[i];
    const PopulationTriple p = analytic_populations(params.s1, kappa, tau);
    const double c_hahn = rc.c0_hahn * std::exp(-tau / params.T2_C);
    const double phase = kTwoPi * rc.nu_d_mhz * tau * kMsToUs + rc.phi0_rad;
    const double value =
        0.5 * (p.P0 + p.Pm1) * (1.0 + c_hahn * std::sin(phase));
    trace.signal[i] = checked_signal(value) - rc.readout.d0;
  }
  return trace;
}

SignalTrace simulate_protocol(const ProtocolConfig& cfg,
                              const SpinSystemParams& params) {
  if (cfg.engine != Engine::lindblad && cfg.engine != Engine::ensemble) {
    throw std::invalid_argument(
        "simulate_protocol: engine must be lindblad or ensemble");
  }
  params.validate();
  const ProtocolConfig rc = cfg.resolved(params);
  rc.validate();

  const Circuit circuit = rc.protocol == Protocol::FID
                              ? make_fid_circuit(rc.nu_d_mhz, rc.phi0_rad)
                              : make_hahn_circuit(rc.nu_d_mhz, rc.phi0_rad);
  const DensityMatrix rho0 =
      mixed_state({{2, params.s1}, {1, 1.0 - params.s1}});

  SignalTrace trace = make_trace_skeleton(rc, params);
  const int n = static_cast<int>(trace.tau_ms.size());

  if (rc.engine == Engine::lindblad) {
    EvolutionConfig evo;
    evo.engine = EvolutionEngine::lindblad;
    evo.kappa_per_ms = rc.kappa_per_ms;
    evo.gamma_phi_per_ms = rc.gamma_phi_per_ms;
    parallel_for(n, rc.threads, [&](int i) {
      const DensityMatrix rho =
          run_circuit(rho0, circuit, trace.tau_ms[i], params, evo);
      trace.signal[i] = checked_signal(readout_p0(rho)) - rc.readout.d0;
    });
    return trace;
  }

  // Quasi-static ensemble: one detuning per member, identical across the
  // whole sweep of that member (noise frozen within a repetition).
  std::vector<double> detunings(rc.ensemble_size);
  for (int m = 0; m < rc.ensemble_size; ++m) {
    Rng rng = Rng::substream(rc.seed, kPurposeEnsemble, m);
    detunings[m] = rc.sigma_qs_mhz * rng.normal();
  }
  parallel_for(n, rc.threads, [&](int i) {
    double sum = 0.0, sum2 = 0.0;
    for (int m = 0; m < rc.ensemble_size; ++m) {
      EvolutionConfig evo;
      evo.engine = EvolutionEngine::analytic;
      evo.kappa_per_ms = rc.kappa_per_ms;
      evo.gamma_phi_per_ms = rc.gamma_phi_per_ms;
      evo.extra_detuning_mhz = detunings[m];
      const DensityMatrix rho =
          run_circuit(rho0, circuit, trace.tau_ms[i], params, evo);
      const double p = checked_signal(readout_p0(rho));
      sum += p;
      sum2 += p * p;
    }
    const double nmem = static_cast<double>(rc.ensemble_size);
    const double mean = sum / nmem;
    trace.signal[i] = mean - rc.readout.d0;
    trace.sigma[i] =
        rc.ensemble_size > 1
            ? std::sqrt(std::max(0.0, (sum2 / nmem - mean * mean) /
                                          (nmem - 1.0)))
            : 0.0;
  });
  return trace;
}

SignalTrace add_shot_noise(const SignalTrace& trace,
                           const ProtocolConfig& cfg) {
  if (cfg.shots <= 0) {
    throw std::invalid_argument("add_shot_noise: shots must be > 0");
  }
  trace.validate();
  const double lb = cfg.readout.lambda_bright;
  const double ld = cfg.readout.lambda_dark;
  const double shots = static_cast<double>(cfg.shots);

  SignalTrace out = trace;
  out.counts.assign(trace.signal.size(), 0);
  for (std::size_t i = 0; i < trace.signal.size(); ++i) {
    // The photon channel sees the physical population, before the d0
    // normalization offset.
    const double p =
        std::clamp(trace.signal[i] + cfg.readout.d0, 0.0, 1.0);
    const double mean_total = shots * (ld + p * (lb - ld));
    Rng rng = Rng::substream(cfg.seed, kPurposeShot, i);
    const long long total = rng.poisson(mean_total);
    out.counts[i] = total;
    const double denom = shots * (lb - ld);
    out.signal[i] =
        (static_cast<double>(total) - shots * ld) / denom - cfg.readout.d0;
    out.sigma[i] =
        std::sqrt(std::max(static_cast<double>(total), 1.0)) / denom;
  }
  return out;
}

SignalTrace simulate_trace(const ProtocolConfig& cfg,
                           const SpinSystemParams& params) {
  SignalTrace trace;
  switch (cfg.engine) {
    case Engine::analytic:
      trace = cfg.protocol == Protocol::FID ? fid_analytic(cfg, params)
                                            : hahn_analytic(cfg, params);
      break;
    case Engine::lindblad:
    case Engine::ensemble:
      trace = simulate_protocol(cfg, params);
      break;
  }
  if (cfg.shots > 0) trace = add_shot_noise(trace, cfg);
  return trace;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(const SignalTrace& trace, const std::string& path) {
  trace.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "tau_ms,signal,stderr\n";
  for (std::size_t i = 0; i < trace.tau_ms.size(); ++i) {
    os << format_double(trace.tau_ms[i]) << ',' << format_double(trace.signal[i])
       << ',' << format_double(trace.sigma.empty() ? 0.0 : trace.sigma[i])
       << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_trace_json(const SignalTrace& trace, const std::string& path) {
  trace.validate();
  nlohmann::json j = trace.meta;
  j["schema_version"] = 1;
  j["tau_ms"] = trace.tau_ms;
  j["signal"] = trace.signal;
  j["stderr"] = trace.sigma;
  if (!trace.counts.empty()) j["counts"] = trace.counts;
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& [b, e] : trace.segments) segs.push_back({b, e});
  j["segments"] = segs;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

SignalTrace read_trace(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  SignalTrace trace;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    nlohmann::json j;
    is >> j;
    trace.tau_ms = j.at("tau_ms").get<std::vector<double>>();
    trace.signal = j.at("signal").get<std::vector<double>>();
    trace.sigma = j.value("stderr", std::vector<double>(trace.tau_ms.size()));
    if (j.contains("counts")) {
      trace.counts = j["counts"].get<std::vector<long long>>();
    }
    if (j.contains("segments")) {
      for (const auto& s : j["segments"]) {
        trace.segments.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
      }
    }
    trace.meta = j;
    trace.meta.erase("tau_ms");
    trace.meta.erase("signal");
    trace.meta.erase("stderr");
    trace.meta.erase("counts");
    trace.meta.erase("segments");
  } else {
    std::string line;
    if (!std::getline(is, line)) {
      throw std::runtime_error("empty trace file: " + path);
    }
    if (line.rfind("tau_ms", 0) != 0) {
      throw std::runtime_error("bad CSV header in " + path);
    }
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string cell;
      std::vector<double> row;
      while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
      if (row.size() < 2) throw std::runtime_error("bad CSV row in " + path);
      trace.tau_ms.push_back(row[0]);
      trace.signal.push_back(row[1]);
      trace.sigma.push_back(row.size() > 2 ? row[2] : 0.0);
    }
  }
  trace.validate();
  return trace;
}

}  // namespace nvspin
