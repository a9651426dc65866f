// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace otfsim {

namespace {

struct MergedTap {
  double normalized_delay = 0.0;
  double los_power = 0.0;      // linear
  double diffuse_power = 0.0;  // linear
  bool los = false;
  double total() const { return los_power + diffuse_power; }
};

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// A LOS row absorbs the Rayleigh rows at its normalized delay; every other
// row is its own tap. Output is sorted by mean power, strongest first.
std::vector<MergedTap> merge_taps(const ChannelProfile& profile) {
  std::vector<MergedTap> merged;
  std::vector<bool> used(profile.taps.size(), false);
  for (std::size_t t = 0; t < profile.taps.size(); ++t) {
    const auto& tap = profile.taps[t];
    if (tap.fading != Fading::kRiceanLos) continue;
    MergedTap m{tap.normalized_delay, db_to_linear(tap.power_db), 0.0, true};
    used[t] = true;
    for (std::size_t u = 0; u < profile.taps.size(); ++u) {
      const auto& other = profile.taps[u];
      if (used[u] || other.fading != Fading::kRayleigh) continue;
      if (std::abs(other.normalized_delay - tap.normalized_delay) < 1e-12) {
        m.diffuse_power += db_to_linear(other.power_db);
        used[u] = true;
      }
    }
    merged.push_back(m);
  }
  for (std::size_t t = 0; t < profile.taps.size(); ++t) {
    if (used[t]) continue;
    const auto& tap = profile.taps[t];
    merged.push_back({tap.normalized_delay, 0.0, db_to_linear(tap.power_db), false});
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const MergedTap& a, const MergedTap& b) { return a.total() > b.total(); });
  return merged;
}

// Folds a Doppler tap into the unambiguous range [-N/2, N/2).
int alias_doppler(long long k, int N) {
  const int half = N / 2;
  return wrap(k + half, N) - half;
}

bool cell_taken(const std::vector<Path>& paths, int l, int k, int N) {
  return std::any_of(paths.begin(), paths.end(), [&](const Path& q) {
    return q.delay_tap == l && wrap(q.doppler_tap, N) == wrap(k, N);
  });
}

// gamma^(k q) with gamma = exp(j 2 pi / MN), reduced exactly for integer k.
cd lattice_phase(long long k, long long q, int mn) {
  const long long e = ((k % mn) * (q % mn)) % mn;
  return std::polar(1.0, kTwoPi * static_cast<double>(e) / mn);
}

}  // namespace

void UserChannel::validate(const FrameParams& p) const {
  if (paths.empty()) throw ChannelError("user " + std::to_string(user_id) + ": channel has no paths");
  for (std::size_t a = 0; a < paths.size(); ++a) {
    const auto& path = paths[a];
    if (path.delay_tap < 0 || path.delay_tap >= p.M) {
      throw ChannelError("user " + std::to_string(user_id) + ": delay tap " +
                         std::to_string(path.delay_tap) + " outside [0, " + std::to_string(p.M - 1) + "]");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (paths[b].delay_tap == path.delay_tap &&
          wrap(paths[b].doppler_tap, p.N) == wrap(path.doppler_tap, p.N)) {
        throw ChannelError("user " + std::to_string(user_id) + ": paths " + std::to_string(b) + " and " +
                           std::to_string(a) + " share lattice cell (" + std::to_string(path.delay_tap) +
                           ", " + std::to_string(wrap(path.doppler_tap, p.N)) + ")");
      }
    }
  }
}

double default_delay_spread(const FrameParams& p, double max_normalized_delay) {
  double taps_per_unit = 8.0;
  if (max_normalized_delay > 0.0 && taps_per_unit * max_normalized_delay > p.M - 1) {
    taps_per_unit = (p.M - 1) / max_normalized_delay;
  }
  return taps_per_unit / (p.M * p.delta_f);
}

ChannelProfile builtin_profile(ProfileName name, const FrameParams& p) {
  ChannelProfile prof;
  prof.name = name;
  switch (name) {
    case ProfileName::kNtnTdlB:
      prof.label = "NTN-TDL-B";
      prof.taps = {{0.0, 0.0, Fading::kRayleigh},
                   {0.7429, -1.973, Fading::kRayleigh},
                   {0.7410, -4.332, Fading::kRayleigh},
                   {5.792, -11.914, Fading::kRayleigh}};
      break;
    case ProfileName::kNtnTdlD:
      prof.label = "NTN-TDL-D";
      prof.taps = {{0.0, -0.284, Fading::kRiceanLos},
                   {0.0, -11.991, Fading::kRayleigh},
                   {0.5596, -9.887, Fading::kRayleigh},
                   {7.3340, -16.771, Fading::kRayleigh}};
      break;
    case ProfileName::kCustom:
      throw ConfigError("custom profiles must be loaded from a file");
  }
  double max_delay = 0.0;
  for (const auto& t : prof.taps) max_delay = std::max(max_delay, t.normalized_delay);
  prof.delay_spread_s = default_delay_spread(p, max_delay);
  prof.max_doppler_hz = kDefaultMaxDopplerHz;
  prof.los_doppler_hz = kDefaultMaxDopplerHz;
  return prof;
}

ProfileName parse_profile_name(const std::string& s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "ntn-tdl-b" || lower == "tdl-b") return ProfileName::kNtnTdlB;
  if (lower == "ntn-tdl-d" || lower == "tdl-d") return ProfileName::kNtnTdlD;
  throw ConfigError("unknown channel profile '" + s + "' (expected ntn-tdl-b or ntn-tdl-d)");
}

std::string profile_name_string(ProfileName name) {
  switch (name) {
    case ProfileName::kNtnTdlB: return "ntn-tdl-b";
    case ProfileName::kNtnTdlD: return "ntn-tdl-d";
    case ProfileName::kCustom: return "custom";
  }
  return "custom";
}

int merged_tap_count(const ChannelProfile& profile) {
  return static_cast<int>(merge_taps(profile).size());
}

std::vector<double> merged_tap_powers(const ChannelProfile& profile) {
  std::vector<double> out;
  for (const auto& m : merge_taps(profile)) out.push_back(m.total());
  return out;
}

UserChannel realize_channel(const ChannelProfile& profile, const FrameParams& p, Rng& rng, int user_id) {
  if (profile.taps.empty()) throw ChannelError(profile.label + ": profile has no taps");
  const auto merged = merge_taps(profile);
  const double total = std::accumulate(merged.begin(), merged.end(), 0.0,
                                       [](double acc, const MergedTap& m) { return acc + m.total(); });
  const double delay_scale = profile.delay_spread_s * p.M * p.delta_f;
  const double doppler_scale = profile.max_doppler_hz * p.N * p.T;

  UserChannel ch;
  ch.user_id = user_id;
  for (const auto& tap : merged) {
    Path path;
    path.delay_tap = static_cast<int>(std::lround(tap.normalized_delay * delay_scale));
    if (path.delay_tap >= p.M) {
      throw ChannelError(profile.label + ": normalized delay " + std::to_string(tap.normalized_delay) +
                         " maps to tap " + std::to_string(path.delay_tap) + " >= M = " + std::to_string(p.M));
    }
    const double los_amp = std::sqrt(tap.los_power / total);
    const double diffuse_var = tap.diffuse_power / total;
    if (tap.los) {
      path.doppler_tap = alias_doppler(std::llround(profile.los_doppler_hz * p.N * p.T), p.N);
      if (cell_taken(ch.paths, path.delay_tap, path.doppler_tap, p.N)) {
        throw ChannelError(profile.label + ": LOS tap collides with an earlier path");
      }
    } else {
      int attempt = 0;
      do {
        if (attempt++ == kMaxDopplerRedraws) {
          throw ChannelError(profile.label + ": no free Doppler cell for delay tap " +
                             std::to_string(path.delay_tap) + " after " + std::to_string(kMaxDopplerRedraws) +
                             " draws");
        }
        const double theta = kTwoPi * uniform01(rng);
        path.doppler_tap = alias_doppler(std::llround(doppler_scale * std::cos(theta)), p.N);
      } while (cell_taken(ch.paths, path.delay_tap, path.doppler_tap, p.N));
    }
    const double los_phase = kTwoPi * uniform01(rng);
    path.gain = std::polar(los_amp, los_phase) + complex_gaussian(rng, diffuse_var);
    ch.paths.push_back(path);
  }
  return ch;
}

UserChannel random_channel(int P, const FrameParams& p, Rng& rng, int user_id) {
  if (P < 1 || P > p.size()) throw ChannelError("random_channel: need 1 <= P <= MN");
  std::vector<int> cells(p.size());
  std::iota(cells.begin(), cells.end(), 0);
  UserChannel ch;
  ch.user_id = user_id;
  for (int a = 0; a < P; ++a) {
    std::uniform_int_distribution<int> pick(a, p.size() - 1);
    std::swap(cells[a], cells[pick(rng)]);
    const int l = cells[a] % p.M;
    const int k = cells[a] / p.M;
    ch.paths.push_back({complex_gaussian(rng, 1.0 / P), l, alias_doppler(k, p.N)});
  }
  return ch;
}

std::optional<int> integer_cfo_shift(const CfoModel& cfo, const FrameParams& p) {
  const double shift = cfo.epsilon * p.N;
  const double rounded = std::round(shift);
  if (std::abs(shift - rounded) > 1e-9) return std::nullopt;
  return static_cast<int>(rounded);
}

UserChannel with_cfo(const UserChannel& ch, const CfoModel& cfo, const FrameParams& p) {
  const auto shift = integer_cfo_shift(cfo, p);
  if (!shift) {
    throw ChannelError("CFO epsilon = " + std::to_string(cfo.epsilon) +
                       " is a fractional Doppler shift for N = " + std::to_string(p.N));
  }
  UserChannel out = ch;
  for (auto& path : out.paths) {
    path.gain *= lattice_phase(*shift, path.delay_tap, p.size());
    path.doppler_tap += *shift;
  }
  return out;
}

EffectiveChannel build_H_TD(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo) {
  ch.validate(p);
  const int mn = p.size();
  CMatrix h = CMatrix::Zero(mn, mn);
  for (const auto& path : ch.paths) {
    for (int col = 0; col < mn; ++col) {
      h(wrap(col + path.delay_tap, mn), col) += path.gain * lattice_phase(path.doppler_tap, col, mn);
    }
  }
  if (cfo.epsilon != 0.0) {
    for (int q = 0; q < mn; ++q) h.row(q) *= std::polar(1.0, kTwoPi * cfo.epsilon * q / p.M);
  }
  return {Domain::kTD, std::move(h)};
}

CMatrix td_to_dd(const CMatrix& h_td, const FrameParams& p) {
  const int M = p.M, N = p.N, mn = p.size();
  if (h_td.rows() != mn || h_td.cols() != mn) throw DimensionError("td_to_dd: expected MN x MN matrix");
  const CMatrix fn = dft_matrix(N);
  CMatrix left(mn, mn);
  // (F_N kron I_M) acting on column c is the N-point DFT across slots.
#pragma omp parallel for schedule(static)
  for (int c = 0; c < mn; ++c) {
    Eigen::Map<const CMatrix> block(h_td.col(c).data(), M, N);
    Eigen::Map<CMatrix>(left.col(c).data(), M, N).noalias() = block * fn;
  }
  // Right factor: columns grouped by slot, so one GEMM over (MN*M) x N.
  CMatrix out(mn, mn);
  Eigen::Map<const CMatrix> lv(left.data(), static_cast<Eigen::Index>(mn) * M, N);
  Eigen::Map<CMatrix>(out.data(), static_cast<Eigen::Index>(mn) * M, N).noalias() = lv * fn.adjoint();
  return out;
}

CMatrix td_to_tf(const CMatrix& h_td, const FrameParams& p) {
  const int M = p.M, N = p.N, mn = p.size();
  if (h_td.rows() != mn || h_td.cols() != mn) throw DimensionError("td_to_tf: expected MN x MN matrix");
  const CMatrix fm = dft_matrix(M);
  const CMatrix fm_h = fm.adjoint();
  CMatrix left(mn, mn);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < mn; ++c) {
    Eigen::Map<const CMatrix> block(h_td.col(c).data(), M, N);
    Eigen::Map<CMatrix>(left.col(c).data(), M, N).noalias() = fm * block;
  }
  CMatrix out(mn, mn);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    out.middleCols(static_cast<Eigen::Index>(n) * M, M).noalias() =
        left.middleCols(static_cast<Eigen::Index>(n) * M, M) * fm_h;
  }
  return out;
}

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

CMatrix td_to_dd_dense(const CMatrix& h_td, const FrameParams& p) {
  const CMatrix left = kron(dft_matrix(p.N), CMatrix::Identity(p.M, p.M));
  return left * h_td * left.adjoint();
}

CMatrix td_to_tf_dense(const CMatrix& h_td, const FrameParams& p) {
  const CMatrix left = kron(CMatrix::Identity(p.N, p.N), dft_matrix(p.M));
  return left * h_td * left.adjoint();
}

EffectiveChannel build_H_DD(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo) {
  return {Domain::kDD, td_to_dd(build_H_TD(ch, p, cfo).matrix, p)};
}

EffectiveChannel build_H_TF(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo) {
  return {Domain::kTF, td_to_tf(build_H_TD(ch, p, cfo).matrix, p)};
}

CVector apply_cfo(const CVector& s, const CfoModel& cfo, const FrameParams& p) {
  if (s.size() != p.size()) throw DimensionError("apply_cfo: length must be MN");
  CVector out(s.size());
  for (Eigen::Index q = 0; q < s.size(); ++q) {
    out[q] = s[q] * std::polar(1.0, kTwoPi * cfo.epsilon * static_cast<double>(q) / p.M);
  }
  return out;
}

void add_awgn(CVector& x, double n0, Rng& rng) {
  if (n0 <= 0.0) return;
  for (Eigen::Index q = 0; q < x.size(); ++q) x[q] += complex_gaussian(rng, n0);
}

CVector apply_channel(const CVector& s, const EffectiveChannel& h_td, double n0, Rng& rng) {
  if (h_td.matrix.cols() != s.size()) throw DimensionError("apply_channel: channel/signal size mismatch");
  if (n0 < 0.0) throw DimensionError("apply_channel: N0 must be nonnegative");
  CVector r = h_td.matrix * s;
  add_awgn(r, n0, rng);
  return r;
}

}  // namespace otfsim
