// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Linear time-varying channels on the integer delay-Doppler lattice: 3GPP
// NTN-TDL profiles, per-user path realizations and the effective MN x MN
// channel matrices in the TD, DD and TF representations.

#pragma once

#include "otfsim/common.hpp"
#include "otfsim/ddgrid.hpp"
#include "otfsim/rng.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace otfsim {

/// One propagation path: tau = delay_tap / (M delta_f), nu = doppler_tap / (N T).
/// The Doppler tap is a signed integer; grids index it modulo N.
struct Path {
  cd gain{1.0, 0.0};
  int delay_tap = 0;
  int doppler_tap = 0;
};

/// A user's path list. paths[0] is the path that carries the desired signal.
struct UserChannel {
  int user_id = 0;
  std::vector<Path> paths;

  /// Throws ChannelError when empty, when a delay leaves [0, M-1], or when two
  /// paths land on the same (delay, Doppler mod N) cell.
  void validate(const FrameParams& p) const;
};

enum class Fading { kRayleigh, kRiceanLos };
enum class ProfileName { kNtnTdlB, kNtnTdlD, kCustom };

struct ProfileTap {
  double normalized_delay = 0.0;
  double power_db = 0.0;
  Fading fading = Fading::kRayleigh;
};

/// Power delay profile plus the scaling that maps it onto the lattice.
/// A LOS row and the Rayleigh rows sharing its normalized delay form one
/// Ricean path.
struct ChannelProfile {
  ProfileName name = ProfileName::kCustom;
  std::string label;
  std::vector<ProfileTap> taps;
  double delay_spread_s = 0.0;  ///< tau_spread
  double max_doppler_hz = 0.0;  ///< f_d
  double los_doppler_hz = 0.0;  ///< fixed Doppler of the LOS component
};

/// Table values of the built-in profiles, with delay spread and Doppler
/// scaled for the given frame (see default_delay_spread / kDefaultMaxDopplerHz).
ChannelProfile builtin_profile(ProfileName name, const FrameParams& p);
ProfileName parse_profile_name(const std::string& s);
std::string profile_name_string(ProfileName name);

/// 8 / (M delta_f), shrunk when needed so the largest normalized delay of the
/// profile still maps inside [0, M-1].
double default_delay_spread(const FrameParams& p, double max_normalized_delay);

/// Residual per-path Doppler spread after common-Doppler pre-compensation.
inline constexpr double kDefaultMaxDopplerHz = 3750.0;

/// Key-value text form of a profile:
///   name = NTN-TDL-D
///   delay_spread_s = 8.33e-6
///   max_doppler_hz = 3750
///   los_doppler_hz = 3750
///   tap = 0 -0.284 LOS
///   tap = 0.5596 -9.887 Rayleigh
/// Blank lines and '#' comments are ignored; unknown keys are rejected.
ChannelProfile load_profile(std::istream& in, const FrameParams& p);
ChannelProfile load_profile_file(const std::string& path, const FrameParams& p);
void write_profile(std::ostream& out, const ChannelProfile& profile);

/// One path per (merged) profile tap: Rayleigh taps ~ CN(0, power), the LOS
/// tap a unit-modulus LOS term of random phase plus diffuse scatter, powers
/// normalized to unit sum. Strongest mean tap comes first. Doppler taps are
/// round(f_d cos(theta) N T) with theta ~ U[0, 2pi); a collision with an
/// earlier path is re-drawn up to kMaxDopplerRedraws times.
UserChannel realize_channel(const ChannelProfile& profile, const FrameParams& p, Rng& rng,
                            int user_id = 0);

inline constexpr int kMaxDopplerRedraws = 8;

/// Number of paths realize_channel produces for a profile.
int merged_tap_count(const ChannelProfile& profile);

/// Mean linear power per merged tap before normalization, in output order.
std::vector<double> merged_tap_powers(const ChannelProfile& profile);

/// Random integer-tap channel with P distinct lattice cells and CN(0, 1/P)
/// gains; used for unit tests and small synthetic instances.
UserChannel random_channel(int P, const FrameParams& p, Rng& rng, int user_id = 0);

/// Normalized CFO epsilon = f_offset / delta_f.
struct CfoModel {
  double epsilon = 0.0;
};

/// Channel seen after a CFO with integer eps*N: every Doppler tap moves by
/// eps*N and gains pick up exp(j 2 pi eps N l_p / MN). Throws when eps*N is
/// not an integer.
UserChannel with_cfo(const UserChannel& ch, const CfoModel& cfo, const FrameParams& p);

/// eps * N rounded when it is an integer to within 1e-9, nullopt otherwise.
std::optional<int> integer_cfo_shift(const CfoModel& cfo, const FrameParams& p);

struct EffectiveChannel {
  Domain domain = Domain::kTD;
  CMatrix matrix;
};

/// sum_p h_p Pi^l_p Delta^k_p, optionally left-multiplied by the CFO ramp.
EffectiveChannel build_H_TD(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo = {});
/// (F_N kron I_M) H_TD (F_N^H kron I_M), evaluated slot-wise.
EffectiveChannel build_H_DD(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo = {});
/// (I_N kron F_M) H_TD (I_N kron F_M^H), evaluated block-wise.
EffectiveChannel build_H_TF(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo = {});

/// Conjugations of an arbitrary TD matrix, shared by the builders above.
CMatrix td_to_dd(const CMatrix& h_td, const FrameParams& p);
CMatrix td_to_tf(const CMatrix& h_td, const FrameParams& p);

/// Dense references that materialize the Kronecker factors explicitly.
/// O((MN)^3); meant for tests and benchmarks on small grids.
CMatrix td_to_dd_dense(const CMatrix& h_td, const FrameParams& p);
CMatrix td_to_tf_dense(const CMatrix& h_td, const FrameParams& p);

/// s[q] * exp(j 2 pi eps q / M) over the whole frame.
CVector apply_cfo(const CVector& s, const CfoModel& cfo, const FrameParams& p);

/// r = H_TD s + w with w ~ CN(0, N0 I).
CVector apply_channel(const CVector& s, const EffectiveChannel& h_td, double n0, Rng& rng);

/// Adds CN(0, n0) noise in place.
void add_awgn(CVector& x, double n0, Rng& rng);

}  // namespace otfsim
