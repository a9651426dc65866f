// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/sim.hpp"

#include "otfsim/linkmodel.hpp"
#include "otfsim/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef OTFSIM_VERSION
#define OTFSIM_VERSION "0.0.0"
#endif

namespace otfsim {

std::string version_string() { return OTFSIM_VERSION; }

namespace {

enum : std::uint64_t { kScenarioChannelTag = 11 };

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ScheduleMask scenario_mask(const ScenarioConfig& cfg, OmaScheme scheme, const FrameParams& p, int K) {
  if (scheme == OmaScheme::kDdoidma && cfg.ddoidma_g1 > 0) return ddoidma_mask(p, K, cfg.ddoidma_g1, cfg.ddoidma_g2);
  return oma_mask(scheme, p, K);
}

std::vector<UserChannel> shifted(const std::vector<UserChannel>& ch, double eps, const FrameParams& p) {
  std::vector<UserChannel> out;
  out.reserve(ch.size());
  for (const auto& c : ch) out.push_back(with_cfo(c, {eps}, p));
  return out;
}

void require_integer_shift(double eps, const FrameParams& p) {
  if (!integer_cfo_shift({eps}, p)) {
    throw ConfigError("epsilon = " + fmt(eps) + " gives eps*N = " + fmt(eps * p.N) +
                      "; the OTFS rate needs an integer Doppler shift");
  }
}

}  // namespace

ChannelProfile scenario_profile(const ScenarioConfig& cfg, const FrameParams& p) {
  ChannelProfile prof = cfg.profile_file.empty() ? builtin_profile(cfg.profile, p) : load_profile_file(cfg.profile_file, p);
  if (cfg.delay_spread_s) prof.delay_spread_s = *cfg.delay_spread_s;
  if (cfg.max_doppler_hz) prof.max_doppler_hz = *cfg.max_doppler_hz;
  if (cfg.los_doppler_hz) prof.los_doppler_hz = *cfg.los_doppler_hz;
  return prof;
}

std::vector<UserChannel> scenario_channels(const ScenarioConfig& cfg, const ChannelProfile& profile,
                                           const FrameParams& p, int K, int r) {
  std::vector<UserChannel> ch;
  ch.reserve(K);
  for (int i = 0; i < K; ++i) {
    Rng rng = substream(cfg.seed, {kScenarioChannelTag, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(i)});
    ch.push_back(realize_channel(profile, p, rng, i));
  }
  return ch;
}

ExperimentReport run_sumrate_oma(const ScenarioConfig& cfg) {
  cfg.validate();
  const FrameParams& p = cfg.frame;
  const ChannelProfile profile = scenario_profile(cfg, p);
  require_integer_shift(cfg.epsilon_fixed, p);
  std::vector<PowerGrid> powers;
  for (auto s : cfg.oma_schemes) powers.push_back(uniform_power(scenario_mask(cfg, s, p, cfg.K), cfg.P0));

  const int R = cfg.realizations;
  const std::size_t S = cfg.snr_db.size(), A = powers.size();
  std::vector<double> rate(static_cast<std::size_t>(R) * S * A, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < R; ++r) {
    const auto ch = shifted(scenario_channels(cfg, profile, p, cfg.K, r), cfg.epsilon_fixed, p);
    for (std::size_t s = 0; s < S; ++s) {
      const double n0 = LinkBudget::from_snr_db(cfg.P0, cfg.snr_db[s], p).N0;
      for (std::size_t a = 0; a < A; ++a) rate[(r * S + s) * A + a] = otfs_sum_rate(powers[a], ch, n0);
    }
  }

  ExperimentReport rep{"sumrate-oma", {"snr_db", "scheme", "sum_rate", "realizations", "seed"}, {}, config_hash(cfg), cfg.seed, {}};
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double acc = 0.0;
      for (int r = 0; r < R; ++r) acc += rate[(r * S + s) * A + a];
      rep.rows.push_back({fmt(cfg.snr_db[s]), oma_name(cfg.oma_schemes[a]), fmt(acc / R), std::to_string(R),
                          std::to_string(cfg.seed)});
    }
  }
  return rep;
}

ExperimentReport run_sumrate_cfo(const ScenarioConfig& cfg) {
  cfg.validate();
  const FrameParams& p = cfg.frame;
  const ChannelProfile profile = scenario_profile(cfg, p);
  for (double eps : cfg.epsilon) require_integer_shift(eps, p);
  const ScheduleMask mask = scenario_mask(cfg, cfg.cfo_access, p, cfg.K);
  const PowerGrid dd = uniform_power(mask, cfg.P0, Domain::kDD);
  const PowerGrid tf = uniform_power(mask, cfg.P0, Domain::kTF);

  const int R = cfg.realizations;
  const std::size_t E = cfg.epsilon.size(), S = cfg.snr_db.size();
  // [r][e][s][otfs, ofdm]
  std::vector<double> rate(static_cast<std::size_t>(R) * E * S * 2, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < R; ++r) {
    const auto ch = scenario_channels(cfg, profile, p, cfg.K, r);
    for (std::size_t e = 0; e < E; ++e) {
      const double eps = cfg.epsilon[e];
      const auto ch_dd = shifted(ch, eps, p);
      std::vector<OfdmBlocks> blocks;
      for (const auto& c : ch) blocks.push_back(ofdm_blocks_from_channel(c, p, {eps}));
      for (std::size_t s = 0; s < S; ++s) {
        const double n0 = LinkBudget::from_snr_db(cfg.P0, cfg.snr_db[s], p).N0;
        const std::size_t at = ((r * E + e) * S + s) * 2;
        rate[at] = otfs_sum_rate(dd, ch_dd, n0);
        rate[at + 1] = ofdm_sum_rate(tf, blocks, n0);
      }
    }
  }

  // single unit path per user, no CFO
  std::vector<UserChannel> ideal;
  for (int i = 0; i < cfg.K; ++i) ideal.push_back({i, {Path{}}});

  ExperimentReport rep{"sumrate-cfo", {"epsilon", "snr_db", "modulation", "sum_rate", "realizations", "seed"}, {}, config_hash(cfg),
                       cfg.seed, {}};
  const std::string R_s = std::to_string(R), seed_s = std::to_string(cfg.seed);
  for (std::size_t e = 0; e < E; ++e) {
    for (std::size_t s = 0; s < S; ++s) {
      double otfs = 0.0, ofdm = 0.0;
      for (int r = 0; r < R; ++r) {
        otfs += rate[((r * E + e) * S + s) * 2];
        ofdm += rate[((r * E + e) * S + s) * 2 + 1];
      }
      const double n0 = LinkBudget::from_snr_db(cfg.P0, cfg.snr_db[s], p).N0;
      const std::string eps_s = fmt(cfg.epsilon[e]), snr_s = fmt(cfg.snr_db[s]);
      rep.rows.push_back({eps_s, snr_s, "OTFS", fmt(otfs / R), R_s, seed_s});
      rep.rows.push_back({eps_s, snr_s, "OFDM", fmt(ofdm / R), R_s, seed_s});
      rep.rows.push_back({eps_s, snr_s, "ideal", fmt(otfs_sum_rate(dd, ideal, n0)), R_s, seed_s});
    }
  }
  return rep;
}

ExperimentReport run_ber(const ScenarioConfig& cfg) {
  cfg.validate();
  BerConfig b;
  b.frame = cfg.frame;
  b.profile = scenario_profile(cfg, cfg.frame);
  b.modulation = cfg.ber.modulation;
  b.schemes = cfg.ber.schemes;
  b.snr_db = cfg.ber.snr_db;
  b.epsilon = cfg.epsilon;
  b.frames = cfg.ber.frames;
  b.seed = cfg.seed;
  b.zc_root = cfg.ber.zc_root;
  b.pilot_slots = cfg.ber.pilot_slots;
  const auto results = ber_monte_carlo(b);

  ExperimentReport rep{"ber", {"scheme", "snr_db", "epsilon", "frames", "bits", "errors", "ber", "seed"}, {}, config_hash(cfg),
                       cfg.seed, {}};
  for (const auto& r : results) {
    rep.rows.push_back({ber_scheme_name(r.scheme), fmt(r.snr_db), fmt(r.epsilon), std::to_string(r.frames),
                        std::to_string(r.bits), std::to_string(r.errors), fmt(r.ber), std::to_string(r.seed)});
  }
  return rep;
}

ExperimentReport run_optimizer(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto& o = cfg.optimizer;
  const FrameParams p = o.full_grid ? cfg.frame : FrameParams::make(o.M, o.N, cfg.frame.delta_f);
  const int K = o.full_grid ? cfg.K : o.K;
  const ChannelProfile profile = scenario_profile(cfg, p);
  require_integer_shift(cfg.epsilon_fixed, p);
  std::vector<PowerGrid> powers;
  for (auto s : cfg.oma_schemes) powers.push_back(uniform_power(scenario_mask(cfg, s, p, K), cfg.P0));

  const int R = o.realizations;
  const std::size_t S = o.snr_db.size(), A = powers.size();
  const int jobs = R * static_cast<int>(S);
  std::vector<std::vector<double>> oma(jobs);
  std::vector<CcpResult> ccp(jobs);
  std::vector<std::string> errors(jobs);
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < jobs; ++j) {
    const int r = j / static_cast<int>(S);
    const std::size_t s = j % S;
    try {
      const auto ch = shifted(scenario_channels(cfg, profile, p, K, r), cfg.epsilon_fixed, p);
      const LinkBudget budget = LinkBudget::from_snr_db(cfg.P0, o.snr_db[s], p);
      for (const auto& pw : powers) oma[j].push_back(otfs_sum_rate(pw, ch, budget.N0));
      ccp[j] = penalty_ccp(ch, p, budget, o.ccp);
    } catch (const SolverError& e) {
      errors[j] = std::string("realization ") + std::to_string(r) + ", snr " + fmt(o.snr_db[s]) + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw SolverError(e, -1, 0.0, 0.0);
  }

  ExperimentReport rep{"optimize",
                       {"snr_db", "scheme", "sum_rate", "mean_iterations", "converged_runs", "realizations", "seed"},
                       {},
                       config_hash(cfg),
                       cfg.seed,
                       {}};
  const std::string R_s = std::to_string(R), seed_s = std::to_string(cfg.seed);
  std::ostringstream trace;
  trace << "realization,snr_db,iteration,objective,sum_a,xi,delta_rho_l1,delta_a_l1,relaxed_rate,rounded_rate,"
           "newton_iterations,method\n";
  for (std::size_t s = 0; s < S; ++s) {
    double rate = 0.0, iters = 0.0;
    int conv = 0;
    for (int r = 0; r < R; ++r) {
      const auto& c = ccp[r * S + s];
      rate += c.sum_rate;
      iters += c.iterations;
      conv += c.converged ? 1 : 0;
      for (const auto& t : c.trace) {
        char buf[512];
        std::snprintf(buf, sizeof buf, "%d,%.10g,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d,%s\n", r, o.snr_db[s],
                      t.iteration, t.objective, t.sum_a, t.xi, t.delta_rho_l1, t.delta_a_l1, t.relaxed_rate,
                      t.rounded_rate, t.newton_iterations, t.method.c_str());
        trace << buf;
      }
    }
    const std::string snr_s = fmt(o.snr_db[s]);
    rep.rows.push_back({snr_s, "CCP", fmt(rate / R), fmt(iters / R), std::to_string(conv), R_s, seed_s});
    for (std::size_t a = 0; a < A; ++a) {
      double acc = 0.0;
      for (int r = 0; r < R; ++r) acc += oma[r * S + s][a];
      rep.rows.push_back({snr_s, oma_name(cfg.oma_schemes[a]), fmt(acc / R), "0", "0", R_s, seed_s});
    }
  }
  rep.attachments.emplace_back("optimize_trace.csv", trace.str());
  return rep;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  for (std::size_t c = 0; c < report.columns.size(); ++c) out << (c ? "," : "") << report.columns[c];
  out << "\n";
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << "\n";
  }
}

void emit_report(const ExperimentReport& report, const ScenarioConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  auto open = [&](const std::string& name) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path + "'");
    return f;
  };
  {
    auto f = open(report.id + ".csv");
    write_report_csv(f, report);
    if (!f) throw IoError("write failed for " + report.id + ".csv");
  }
  {
    auto f = open(report.id + ".meta");
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(report.config_hash));
    f << "experiment = " << report.id << "\n"
      << "config_hash = fnv1a64:" << hash << "\n"
      << "seed = " << report.seed << "\n"
      << "otfsim_version = " << version_string() << "\n"
      << "eigen_version = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n"
      << "rows = " << report.rows.size() << "\n"
      << "# scenario constants (not used by the models)\n"
      << "earth_radius_m = " << fmt(cfg.constants.earth_radius_m) << "\n"
      << "satellite_height_m = " << fmt(cfg.constants.satellite_height_m) << "\n"
      << "elevation_deg = " << fmt(cfg.constants.elevation_deg) << "\n"
      << "v_sat_mps = " << fmt(cfg.constants.v_sat_mps) << "\n"
      << "v_terminal_kmh = " << fmt(cfg.constants.v_terminal_kmh) << "\n"
      << "carrier_hz = " << fmt(cfg.constants.carrier_hz) << "\n"
      << "# resolved config\n";
    write_config(f, cfg);
    if (!f) throw IoError("write failed for " + report.id + ".meta");
  }
  for (const auto& [name, content] : report.attachments) {
    auto f = open(name);
    f << content;
    if (!f) throw IoError("write failed for " + name);
  }
}

}  // namespace otfsim
