#include "nvspin/serialize.hpp"

#include <set>
#include <stdexcept>

namespace nvspin {

using nlohmann::json;

void require_known_keys(const json& j,
                        std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: expected an object at " + where);
  }
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "' in " +
                                  where);
    }
  }
}

std::string protocol_name(Protocol p) {
  return p == Protocol::FID ? "fid" : "hahn";
}

Protocol protocol_from_name(const std::string& name) {
  if (name == "fid") return Protocol::FID;
  if (name == "hahn") return Protocol::Hahn;
  throw std::invalid_argument("config: unknown protocol '" + name + "'");
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::analytic: return "analytic";
    case Engine::lindblad: return "lindblad";
    case Engine::ensemble: return "ensemble";
  }
  return "analytic";
}

Engine engine_from_name(const std::string& name) {
  if (name == "analytic") return Engine::analytic;
  if (name == "lindblad") return Engine::lindblad;
  if (name == "ensemble") return Engine::ensemble;
  throw std::invalid_argument("config: unknown engine '" + name + "'");
}

json spin_params_to_json(const SpinSystemParams& p) {
  json j{{"D_mhz", p.D},
         {"B_gauss", p.B},
         {"gamma_e_mhz_per_g", p.gamma_e},
         {"nu_C_mhz", p.nu_C},
         {"A_N_mhz", p.A_N},
         {"A_zz_mhz", p.A_zz},
         {"A_zx_mhz", p.A_zx},
         {"s1", p.s1},
         {"T1e_ms", p.T1e},
         {"T2star_C_ms", p.T2star_C},
         {"T2_C_ms", p.T2_C}};
  if (p.gamma_C.has_value()) j["gamma_C_mhz_per_g"] = *p.gamma_C;
  return j;
}

SpinSystemParams spin_params_from_json(const json& j) {
  require_known_keys(j,
                     {"D_mhz", "B_gauss", "gamma_e_mhz_per_g",
                      "gamma_C_mhz_per_g", "nu_C_mhz", "A_N_mhz", "A_zz_mhz",
                      "A_zx_mhz", "s1", "T1e_ms", "T2star_C_ms", "T2_C_ms"},
                     "spin");
  SpinSystemParams p;
  p.D = j.value("D_mhz", p.D);
  p.B = j.value("B_gauss", p.B);
  p.gamma_e = j.value("gamma_e_mhz_per_g", p.gamma_e);
  if (j.contains("gamma_C_mhz_per_g")) {
    p.gamma_C = j["gamma_C_mhz_per_g"].get<double>();
    if (!j.contains("nu_C_mhz")) p.nu_C = *p.gamma_C * p.B;
  }
  p.nu_C = j.value("nu_C_mhz", p.nu_C);
  p.A_N = j.value("A_N_mhz", p.A_N);
  p.A_zz = j.value("A_zz_mhz", p.A_zz);
  p.A_zx = j.value("A_zx_mhz", p.A_zx);
  p.s1 = j.value("s1", p.s1);
  p.T1e = j.value("T1e_ms", p.T1e);
  p.T2star_C = j.value("T2star_C_ms", p.T2star_C);
  p.T2_C = j.value("T2_C_ms", p.T2_C);
  p.validate();
  return p;
}

json protocol_config_to_json(const ProtocolConfig& c) {
  json j{{"protocol", protocol_name(c.protocol)},
         {"nu_d_mhz", c.nu_d_mhz},
         {"phi0_rad", c.phi0_rad},
         {"engine", engine_name(c.engine)},
         {"shots", c.shots},
         {"ensemble_size", c.ensemble_size},
         {"sigma_qs_mhz", c.sigma_qs_mhz},
         {"seed", c.seed},
         {"gamma_phi_per_ms", c.gamma_phi_per_ms},
         {"c0_fid", c.c0_fid},
         {"c0_hahn", c.c0_hahn},
         {"threads", c.threads},
         {"readout",
          {{"lambda_bright", c.readout.lambda_bright},
           {"lambda_dark", c.readout.lambda_dark},
           {"d0", c.readout.d0}}}};
  if (c.kappa_per_ms.has_value()) j["kappa_per_ms"] = *c.kappa_per_ms;
  if (!c.explicit_tau_ms.empty()) {
    j["tau_ms"] = c.explicit_tau_ms;
  } else if (!c.segments.empty()) {
    json segs = json::array();
    for (const auto& s : c.segments) {
      segs.push_back({{"center_ms", s.center_ms},
                      {"span_ms", s.span_ms},
                      {"points", s.points}});
    }
    j["segments"] = segs;
  }
  return j;
}

ProtocolConfig protocol_config_from_json(const json& j) {
  require_known_keys(
      j,
      {"protocol", "nu_d_mhz", "phi0_rad", "engine", "shots", "ensemble_size",
       "sigma_qs_mhz", "seed", "gamma_phi_per_ms", "kappa_per_ms", "c0_fid",
       "c0_hahn", "threads", "readout", "tau_ms", "segments"},
      "protocol");
  ProtocolConfig c;
  if (j.contains("protocol")) {
    c.protocol = protocol_from_name(j["protocol"].get<std::string>());
  }
  c.nu_d_mhz = j.value("nu_d_mhz", c.nu_d_mhz);
  c.phi0_rad = j.value("phi0_rad", c.phi0_rad);
  if (j.contains("engine")) {
    c.engine = engine_from_name(j["engine"].get<std::string>());
  }
  c.shots = j.value("shots", c.shots);
  c.ensemble_size = j.value("ensemble_size", c.ensemble_size);
  c.sigma_qs_mhz = j.value("sigma_qs_mhz", c.sigma_qs_mhz);
  c.seed = j.value("seed", c.seed);
  c.gamma_phi_per_ms = j.value("gamma_phi_per_ms", c.gamma_phi_per_ms);
  if (j.contains("kappa_per_ms")) {
    c.kappa_per_ms = j["kappa_per_ms"].get<double>();
  }
  c.c0_fid = j.value("c0_fid", c.c0_fid);
  c.c0_hahn = j.value("c0_hahn", c.c0_hahn);
  c.threads = j.value("threads", c.threads);
  if (j.contains("readout")) {
    const json& r = j["readout"];
    require_known_keys(r, {"lambda_bright", "lambda_dark", "d0"},
                       "protocol.readout");
    c.readout.lambda_bright = r.value("lambda_bright", c.readout.lambda_bright);
    c.readout.lambda_dark = r.value("lambda_dark", c.readout.lambda_dark);
    c.readout.d0 = r.value("d0", c.readout.d0);
  }
  if (j.contains("tau_ms")) {
    c.explicit_tau_ms = j["tau_ms"].get<std::vector<double>>();
  }
  if (j.contains("segments")) {
    for (const auto& js : j["segments"]) {
      require_known_keys(js, {"center_ms", "span_ms", "points"},
                         "protocol.segments[]");
      c.segments.push_back(SegmentSpec{js.at("center_ms").get<double>(),
                                       js.at("span_ms").get<double>(),
                                       js.at("points").get<int>()});
    }
  }
  c.validate();
  return c;
}

}  // namespace nvspin
