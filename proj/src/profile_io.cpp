// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/channel.hpp"
#include "otfsim/textio.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace otfsim {

ChannelProfile load_profile(std::istream& in, const FrameParams& p) {
  ChannelProfile prof;
  prof.name = ProfileName::kCustom;
  prof.label = "custom";
  bool have_spread = false, have_doppler = false, have_los = false;

  for_each_key_value(in, "profile", [&](const KeyValue& kv) {
    if (kv.key == "name") {
      prof.label = kv.value;
    } else if (kv.key == "delay_spread_s") {
      prof.delay_spread_s = parse_double(kv, "profile");
      have_spread = true;
    } else if (kv.key == "max_doppler_hz") {
      prof.max_doppler_hz = parse_double(kv, "profile");
      have_doppler = true;
    } else if (kv.key == "los_doppler_hz") {
      prof.los_doppler_hz = parse_double(kv, "profile");
      have_los = true;
    } else if (kv.key == "tap") {
      std::istringstream ts(kv.value);
      ProfileTap tap;
      std::string fading, extra;
      if (!(ts >> tap.normalized_delay >> tap.power_db >> fading) || (ts >> extra)) {
        throw ConfigError("profile line " + std::to_string(kv.line) +
                          ": tap needs '<normalized_delay> <power_db> <LOS|Rayleigh>'");
      }
      if (fading == "LOS" || fading == "los" || fading == "Ricean") {
        tap.fading = Fading::kRiceanLos;
      } else if (fading == "Rayleigh" || fading == "rayleigh" || fading == "NLOS") {
        tap.fading = Fading::kRayleigh;
      } else {
        throw ConfigError("profile line " + std::to_string(kv.line) + ": unknown fading '" + fading + "'");
      }
      if (tap.normalized_delay < 0.0) {
        throw ConfigError("profile line " + std::to_string(kv.line) + ": negative normalized delay");
      }
      prof.taps.push_back(tap);
    } else {
      throw ConfigError("profile line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    }
  });

  if (prof.taps.empty()) throw ConfigError("profile: no taps given");
  if (!have_spread) {
    double max_delay = 0.0;
    for (const auto& t : prof.taps) max_delay = std::max(max_delay, t.normalized_delay);
    prof.delay_spread_s = default_delay_spread(p, max_delay);
  }
  if (!have_doppler) prof.max_doppler_hz = kDefaultMaxDopplerHz;
  if (!have_los) prof.los_doppler_hz = prof.max_doppler_hz;
  if (prof.delay_spread_s < 0.0 || prof.max_doppler_hz < 0.0) {
    throw ConfigError("profile: delay spread and Doppler must be nonnegative");
  }
  return prof;
}

ChannelProfile load_profile_file(const std::string& path, const FrameParams& p) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile file '" + path + "'");
  return load_profile(in, p);
}

void write_profile(std::ostream& out, const ChannelProfile& profile) {
  const auto old = out.precision(17);
  out << "name = " << profile.label << "\n";
  out << "delay_spread_s = " << profile.delay_spread_s << "\n";
  out << "max_doppler_hz = " << profile.max_doppler_hz << "\n";
  out << "los_doppler_hz = " << profile.los_doppler_hz << "\n";
  for (const auto& t : profile.taps) {
    out << "tap = " << t.normalized_delay << " " << t.power_db << " "
        << (t.fading == Fading::kRiceanLos ? "LOS" : "Rayleigh") << "\n";
  }
  out.precision(old);
}

}  // namespace otfsim
