// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/sim.hpp"
#include "otfsim/textio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace otfsim {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string token;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t a = 0; a < v.size(); ++a) s += (a ? ", " : "") + num(v[a]);
  return s;
}

template <class T, class F>
std::string name_list(const std::vector<T>& v, F name) {
  std::string s;
  for (std::size_t a = 0; a < v.size(); ++a) s += (a ? ", " : "") + name(v[a]);
  return s;
}

int to_int(const KeyValue& kv, const std::string& ctx) {
  const long long v = parse_int(kv, ctx);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(ctx + " line " + std::to_string(kv.line) + ": '" + kv.key + "' is out of range");
  return static_cast<int>(v);
}

std::optional<double> optional_double(const KeyValue& kv, const std::string& ctx) {
  if (kv.value == "auto") return std::nullopt;
  return parse_double(kv, ctx);
}

// rethrows a parse failure of one key with its location
template <class F>
auto located(const KeyValue& kv, const std::string& ctx, F f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + " line " + std::to_string(kv.line) + ": '" + kv.key + "': " + e.what());
  }
}

using Setter = std::function<void(ScenarioConfig&, const KeyValue&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["M"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.frame.M = to_int(kv, x); };
    t["N"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.frame.N = to_int(kv, x); };
    t["K"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.K = to_int(kv, x); };
    t["delta_f_hz"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.frame.delta_f = parse_double(kv, x);
      c.frame.T = 1.0 / c.frame.delta_f;
    };
    t["P0"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.P0 = parse_double(kv, x); };
    t["profile"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.profile = located(kv, x, [&] { return parse_profile_name(kv.value); });
    };
    t["profile_file"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string&) { c.profile_file = kv.value; };
    t["delay_spread_s"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.delay_spread_s = optional_double(kv, x);
    };
    t["max_doppler_hz"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.max_doppler_hz = optional_double(kv, x);
    };
    t["los_doppler_hz"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.los_doppler_hz = optional_double(kv, x);
    };
    t["snr_db"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.snr_db = parse_double_list(kv, x); };
    t["epsilon"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.epsilon = parse_double_list(kv, x);
    };
    t["epsilon_fixed"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.epsilon_fixed = parse_double(kv, x);
    };
    t["seed"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.seed = parse_u64(kv, x); };
    t["realizations"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.realizations = to_int(kv, x);
    };
    t["oma_schemes"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.oma_schemes.clear();
      for (const auto& s : split_list(kv.value)) c.oma_schemes.push_back(located(kv, x, [&] { return parse_oma_name(s); }));
    };
    t["ddoidma_g1"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.ddoidma_g1 = to_int(kv, x); };
    t["ddoidma_g2"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.ddoidma_g2 = to_int(kv, x); };
    t["cfo_access"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.cfo_access = located(kv, x, [&] { return parse_oma_name(kv.value); });
    };
    t["earth_radius_m"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.constants.earth_radius_m = parse_double(kv, x);
    };
    t["satellite_height_m"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.constants.satellite_height_m = parse_double(kv, x);
    };
    t["elevation_deg"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.constants.elevation_deg = parse_double(kv, x);
    };
    t["v_sat_mps"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.constants.v_sat_mps = parse_double(kv, x);
    };
    t["v_terminal_kmh"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.constants.v_terminal_kmh = parse_double(kv, x);
    };
    t["carrier_hz"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.constants.carrier_hz = parse_double(kv, x);
    };
    t["ber_frames"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.ber.frames = to_int(kv, x); };
    t["ber_snr_db"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.ber.snr_db = parse_double_list(kv, x);
    };
    t["ber_schemes"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.ber.schemes.clear();
      for (const auto& s : split_list(kv.value)) c.ber.schemes.push_back(located(kv, x, [&] { return parse_ber_scheme(s); }));
    };
    t["modulation"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.ber.modulation = located(kv, x, [&] { return parse_modulation(kv.value); });
    };
    t["zc_root"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.ber.zc_root = to_int(kv, x); };
    t["pilot_slots"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.ber.pilot_slots = to_int(kv, x);
    };
    t["opt_M"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.optimizer.M = to_int(kv, x); };
    t["opt_N"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.optimizer.N = to_int(kv, x); };
    t["opt_K"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.optimizer.K = to_int(kv, x); };
    t["opt_full_grid"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.full_grid = parse_bool(kv, x);
    };
    t["opt_realizations"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.realizations = to_int(kv, x);
    };
    t["opt_snr_db"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.snr_db = parse_double_list(kv, x);
    };
    t["ccp_xi0"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.optimizer.ccp.xi0 = parse_double(kv, x); };
    t["ccp_mu"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.optimizer.ccp.mu = parse_double(kv, x); };
    t["ccp_xi_max"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.ccp.xi_max = parse_double(kv, x);
    };
    t["ccp_delta1_rel"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.ccp.delta1_rel = parse_double(kv, x);
    };
    t["ccp_delta2_rel"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.ccp.delta2_rel = parse_double(kv, x);
    };
    t["ccp_m_max"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) { c.optimizer.ccp.m_max = to_int(kv, x); };
    t["ccp_eps_bigM_rel"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.ccp.eps_bigM_rel = parse_double(kv, x);
    };
    t["ccp_solver_tol"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.ccp.solver_tol = parse_double(kv, x);
    };
    t["ccp_round_threshold"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      c.optimizer.ccp.round_threshold = parse_double(kv, x);
    };
    t["ccp_init"] = [](ScenarioConfig& c, const KeyValue& kv, const std::string& x) {
      if (kv.value == "ddma") {
        c.optimizer.ccp.init = CcpInit::kDdma;
      } else if (kv.value == "best-oma") {
        c.optimizer.ccp.init = CcpInit::kBestOma;
      } else {
        throw ConfigError(x + " line " + std::to_string(kv.line) + ": 'ccp_init' must be ddma or best-oma, got '" + kv.value + "'");
      }
    };
    return t;
  }();
  return table;
}

void apply(ScenarioConfig& cfg, const KeyValue& kv, const std::string& context) {
  const auto& t = setters();
  const auto it = t.find(kv.key);
  if (it == t.end()) {
    throw ConfigError(context + " line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
  }
  it->second(cfg, kv, context);
}

}  // namespace

void ScenarioConfig::validate() const {
  frame.validate();
  if (K < 1) throw ConfigError("K must be at least 1");
  if (!(P0 > 0.0)) throw ConfigError("P0 must be positive");
  if (snr_db.empty()) throw ConfigError("snr_db list is empty");
  if (epsilon.empty()) throw ConfigError("epsilon list is empty");
  for (double e : epsilon) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilon values must lie in [0, 1]");
  }
  if (!(epsilon_fixed >= 0.0 && epsilon_fixed <= 1.0)) throw ConfigError("epsilon_fixed must lie in [0, 1]");
  if (realizations < 1) throw ConfigError("realizations must be at least 1");
  if (oma_schemes.empty()) throw ConfigError("oma_schemes is empty");
  if ((ddoidma_g1 == 0) != (ddoidma_g2 == 0)) throw ConfigError("set both ddoidma_g1 and ddoidma_g2, or neither");
  if (ber.frames < 1) throw ConfigError("ber_frames must be at least 1");
  if (ber.snr_db.empty()) throw ConfigError("ber_snr_db list is empty");
  if (ber.schemes.empty()) throw ConfigError("ber_schemes is empty");
  if (optimizer.M < 1 || optimizer.N < 1 || optimizer.K < 1) throw ConfigError("opt_M, opt_N and opt_K must be positive");
  if (optimizer.realizations < 1) throw ConfigError("opt_realizations must be at least 1");
  if (optimizer.snr_db.empty()) throw ConfigError("opt_snr_db list is empty");
  optimizer.ccp.validate();
}

void apply_config_line(ScenarioConfig& cfg, const std::string& line, const std::string& context) {
  std::istringstream in(line);
  for_each_key_value(in, context, [&](const KeyValue& kv) { apply(cfg, kv, context); });
}

ScenarioConfig load_config(std::istream& in, const std::string& context) {
  ScenarioConfig cfg;
  for_each_key_value(in, context, [&](const KeyValue& kv) { apply(cfg, kv, context); });
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return load_config(in, path);
}

void write_config(std::ostream& out, const ScenarioConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string("auto"); };
  const auto& o = c.optimizer;
  out << "M = " << c.frame.M << "\n"
      << "N = " << c.frame.N << "\n"
      << "K = " << c.K << "\n"
      << "delta_f_hz = " << num(c.frame.delta_f) << "\n"
      << "P0 = " << num(c.P0) << "\n"
      << "profile = " << profile_name_string(c.profile) << "\n";
  if (!c.profile_file.empty()) out << "profile_file = " << c.profile_file << "\n";
  out << "delay_spread_s = " << opt(c.delay_spread_s) << "\n"
      << "max_doppler_hz = " << opt(c.max_doppler_hz) << "\n"
      << "los_doppler_hz = " << opt(c.los_doppler_hz) << "\n"
      << "snr_db = " << num_list(c.snr_db) << "\n"
      << "epsilon = " << num_list(c.epsilon) << "\n"
      << "epsilon_fixed = " << num(c.epsilon_fixed) << "\n"
      << "seed = " << c.seed << "\n"
      << "realizations = " << c.realizations << "\n"
      << "oma_schemes = " << name_list(c.oma_schemes, oma_name) << "\n"
      << "ddoidma_g1 = " << c.ddoidma_g1 << "\n"
      << "ddoidma_g2 = " << c.ddoidma_g2 << "\n"
      << "cfo_access = " << oma_name(c.cfo_access) << "\n"
      << "earth_radius_m = " << num(c.constants.earth_radius_m) << "\n"
      << "satellite_height_m = " << num(c.constants.satellite_height_m) << "\n"
      << "elevation_deg = " << num(c.constants.elevation_deg) << "\n"
      << "v_sat_mps = " << num(c.constants.v_sat_mps) << "\n"
      << "v_terminal_kmh = " << num(c.constants.v_terminal_kmh) << "\n"
      << "carrier_hz = " << num(c.constants.carrier_hz) << "\n"
      << "ber_frames = " << c.ber.frames << "\n"
      << "ber_snr_db = " << num_list(c.ber.snr_db) << "\n"
      << "ber_schemes = " << name_list(c.ber.schemes, ber_scheme_name) << "\n"
      << "modulation = " << modulation_name(c.ber.modulation) << "\n"
      << "zc_root = " << c.ber.zc_root << "\n"
      << "pilot_slots = " << c.ber.pilot_slots << "\n"
      << "opt_M = " << o.M << "\n"
      << "opt_N = " << o.N << "\n"
      << "opt_K = " << o.K << "\n"
      << "opt_full_grid = " << (o.full_grid ? "true" : "false") << "\n"
      << "opt_realizations = " << o.realizations << "\n"
      << "opt_snr_db = " << num_list(o.snr_db) << "\n"
      << "ccp_xi0 = " << num(o.ccp.xi0) << "\n"
      << "ccp_mu = " << num(o.ccp.mu) << "\n"
      << "ccp_xi_max = " << num(o.ccp.xi_max) << "\n"
      << "ccp_delta1_rel = " << num(o.ccp.delta1_rel) << "\n"
      << "ccp_delta2_rel = " << num(o.ccp.delta2_rel) << "\n"
      << "ccp_m_max = " << o.ccp.m_max << "\n"
      << "ccp_eps_bigM_rel = " << num(o.ccp.eps_bigM_rel) << "\n"
      << "ccp_solver_tol = " << num(o.ccp.solver_tol) << "\n"
      << "ccp_round_threshold = " << num(o.ccp.round_threshold) << "\n"
      << "ccp_init = " << (o.ccp.init == CcpInit::kDdma ? "ddma" : "best-oma") << "\n";
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::ostringstream s;
  write_config(s, cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace otfsim
