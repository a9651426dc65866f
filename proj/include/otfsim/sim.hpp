// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Scenario configuration and the experiment drivers behind the CLI.

#pragma once

#include "otfsim/access.hpp"
#include "otfsim/allocator.hpp"
#include "otfsim/channel.hpp"
#include "otfsim/common.hpp"
#include "otfsim/rxchain.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace otfsim {

/// LEO geometry; carried into report metadata only.
struct ScenarioConstants {
  double earth_radius_m = 6371e3;
  double satellite_height_m = 1500e3;
  double elevation_deg = 50.0;
  double v_sat_mps = 7.11e3;
  double v_terminal_kmh = 500.0;
  double carrier_hz = 2e9;
};

struct OptimizerSettings {
  int M = 16;
  int N = 8;
  int K = 4;
  bool full_grid = false;  ///< run on the scenario grid instead of M x N x K above
  int realizations = 10;
  std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30};
  CcpConfig ccp;
};

struct BerSettings {
  int frames = 200;
  std::vector<double> snr_db{0, 5, 10, 15, 20, 25};
  std::vector<BerScheme> schemes{std::begin(kAllBerSchemes), std::end(kAllBerSchemes)};
  Modulation modulation = Modulation::kQpsk;
  int zc_root = 1;
  int pilot_slots = 2;
};

/// Every tunable of the experiments. Defaults follow the LEO system table
/// (M = 64, N = 16, K = 4, 15 kHz, 2 GHz).
struct ScenarioConfig {
  FrameParams frame = FrameParams::make(64, 16, 15e3);
  int K = 4;
  double P0 = 1.0;
  ProfileName profile = ProfileName::kNtnTdlD;
  std::string profile_file;  ///< overrides `profile` when set
  std::optional<double> delay_spread_s;
  std::optional<double> max_doppler_hz;
  std::optional<double> los_doppler_hz;
  std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30};
  std::vector<double> epsilon{0.25, 0.3125, 0.375, 0.4375, 0.5};
  double epsilon_fixed = 0.25;  ///< used by the OMA and optimizer sweeps
  std::uint64_t seed = 1;
  int realizations = 100;
  std::vector<OmaScheme> oma_schemes{std::begin(kAllOmaSchemes), std::end(kAllOmaSchemes)};
  int ddoidma_g1 = 0;  ///< 0: sqrt(K)
  int ddoidma_g2 = 0;
  OmaScheme cfo_access = OmaScheme::kDdma;  ///< layout shared by OTFS and OFDM in the CFO sweep
  ScenarioConstants constants;
  BerSettings ber;
  OptimizerSettings optimizer;

  void validate() const;
};

/// Strict key = value parser: unknown keys and malformed values raise
/// ConfigError naming the key and line.
ScenarioConfig load_config(std::istream& in, const std::string& context = "config");
ScenarioConfig load_config_file(const std::string& path);
/// Applies "key = value" overrides on top of an existing config.
void apply_config_line(ScenarioConfig& cfg, const std::string& line, const std::string& context);
/// Canonical text form; load_config(write_config(c)) reproduces c.
void write_config(std::ostream& out, const ScenarioConfig& cfg);

/// 64-bit FNV-1a of the canonical text form.
std::uint64_t config_hash(const ScenarioConfig& cfg);

/// Channel profile after applying the file / override fields.
ChannelProfile scenario_profile(const ScenarioConfig& cfg, const FrameParams& p);

/// Per-user channels of realization r; users draw from independent substreams.
std::vector<UserChannel> scenario_channels(const ScenarioConfig& cfg, const ChannelProfile& profile,
                                           const FrameParams& p, int K, int r);

struct ExperimentReport {
  std::string id;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  /// Extra CSV files written next to the main one, as (file name, content).
  std::vector<std::pair<std::string, std::string>> attachments;
};

ExperimentReport run_sumrate_oma(const ScenarioConfig& cfg);
ExperimentReport run_sumrate_cfo(const ScenarioConfig& cfg);
ExperimentReport run_ber(const ScenarioConfig& cfg);
ExperimentReport run_optimizer(const ScenarioConfig& cfg);

/// Writes <dir>/<id>.csv, <dir>/<id>.meta and the attachments.
void emit_report(const ExperimentReport& report, const ScenarioConfig& cfg, const std::string& dir);
void write_report_csv(std::ostream& out, const ExperimentReport& report);

std::string version_string();

}  // namespace otfsim
