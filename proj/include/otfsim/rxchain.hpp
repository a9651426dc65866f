// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Detection chains for the BER experiments: LMMSE for OTFS, genie one-tap
// and pilot-aided (ZC pilot, LS estimate, Moose CFO) receivers for OFDM,
// plus Gray-mapped constellations and the Monte-Carlo driver.

#pragma once

#include "otfsim/channel.hpp"
#include "otfsim/common.hpp"
#include "otfsim/ddgrid.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <string>
#include <vector>

namespace otfsim {

enum class Modulation { kQpsk, kQam16 };

std::string modulation_name(Modulation m);
Modulation parse_modulation(const std::string& s);

/// Unit-energy Gray-labeled constellation; points[label] is the symbol whose
/// bits (MSB first) spell label.
class Constellation {
 public:
  explicit Constellation(Modulation order);

  Modulation order() const { return order_; }
  int bits_per_symbol() const { return bits_; }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<cd>& points() const { return points_; }

  cd map(unsigned label) const { return points_[label]; }
  /// Nearest point, decided per axis.
  unsigned demap(cd y) const;

 private:
  Modulation order_;
  int bits_ = 0;
  int levels_ = 0;   // per axis
  double scale_ = 1.0;
  std::vector<cd> points_;
  std::vector<unsigned> axis_gray_;  // amplitude index -> per-axis label
};

/// x_hat = H^H (H H^H + (N0 / rho_bar) I)^-1 y. The Cholesky factor is built
/// once and reused for every received vector.
class LmmseFilter {
 public:
  LmmseFilter(const CMatrix& H, double n0, double rho_bar);

  CVector apply(const CVector& y) const;
  int size() const { return static_cast<int>(h_.cols()); }

 private:
  CMatrix h_;
  Eigen::LLT<CMatrix> llt_;
};

CVector lmmse_detect(const CVector& y, const CMatrix& H, double n0, double rho_bar);

/// Per-symbol matched filter, x_hat[c] = h_c^H y / |h_c|^2.
CVector matched_filter_detect(const CVector& y, const CMatrix& H);

using SparseCMatrix = Eigen::SparseMatrix<cd>;

/// H_TD from the path list without forming the dense matrix; identical to
/// build_H_TD entry by entry.
SparseCMatrix sparse_H_TD(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo = {});

/// The same LMMSE estimate for a sparse channel. Used on the time-domain
/// frame: with rectangular pulses the DD transform is unitary, so filtering
/// r with H_TD and then demodulating equals filtering y_DD with H_DD.
class SparseLmmseFilter {
 public:
  SparseLmmseFilter(const SparseCMatrix& H, double n0, double rho_bar);

  CVector apply(const CVector& y) const;

 private:
  SparseCMatrix h_;
  Eigen::SimplicialLLT<SparseCMatrix> llt_;
};

struct OnetapOutput {
  TFGrid x;
  std::vector<std::uint8_t> erased;  ///< per (m,n), column-major
  int erasures = 0;
};

inline constexpr double kErasureGain = 1e-12;

/// x_hat[m,n] = Y[m,n] / gains[m,n]; gains below kErasureGain are erased
/// and their output set to zero.
OnetapOutput ofdm_onetap_detect(const TFGrid& y, const CMatrix& gains);

/// Diagonals of the TF blocks (n,n): gains(m,n) = H_TF[nM+m, nM+m].
CMatrix ofdm_onetap_gains(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo = {});

/// Zadoff-Chu sequence, phase pi u m^2 / M for even M and pi u m (m+1) / M
/// for odd M. Throws ConfigError unless gcd(u, M) = 1.
CVector zc_pilot(int M, int root);

/// H_hat[m] = Y[m] / pilot[m].
CVector ls_channel_estimate(const CVector& y_pilot, const CVector& pilot);

/// (1 / 2 pi) arg(sum y2 conj(y1)) in (-0.5, 0.5]. Throws ChannelError when
/// the correlation vanishes.
double moose_cfo_estimate(const CVector& y1, const CVector& y2);

/// r[q] exp(-j 2 pi eps_hat q / M).
CVector cfo_compensate(const CVector& r, double eps_hat, const FrameParams& p);

enum class BerScheme { kOtfsLmmse, kOfdmOnetap, kOfdmPractical };

inline constexpr BerScheme kAllBerSchemes[] = {BerScheme::kOtfsLmmse, BerScheme::kOfdmOnetap,
                                              BerScheme::kOfdmPractical};

std::string ber_scheme_name(BerScheme s);
BerScheme parse_ber_scheme(const std::string& s);

/// Single-link BER sweep. SNR is P0 / (MN N0) with unit-energy symbols.
/// The practical OFDM frame carries the ZC pilot in slots 0 and 1 and data
/// in slots 2..N-1; the other schemes fill the whole grid.
struct BerConfig {
  FrameParams frame;
  ChannelProfile profile;
  Modulation modulation = Modulation::kQpsk;
  std::vector<BerScheme> schemes{std::begin(kAllBerSchemes), std::end(kAllBerSchemes)};
  std::vector<double> snr_db;
  std::vector<double> epsilon;
  long frames = 100;
  std::uint64_t seed = 1;
  int zc_root = 1;
  int pilot_slots = 2;

  void validate() const;
};

struct BerResult {
  BerScheme scheme = BerScheme::kOtfsLmmse;
  double snr_db = 0.0;
  double epsilon = 0.0;
  long frames = 0;
  long long bits = 0;
  long long errors = 0;
  double ber = 0.0;
  std::uint64_t seed = 0;
};

/// Rows ordered by epsilon, then SNR, then scheme. Frame f draws its channel,
/// data and noise from substreams tagged by f only, so every scheme, SNR and
/// epsilon sees the same realizations.
std::vector<BerResult> ber_monte_carlo(const BerConfig& cfg);

/// One frame of one scheme; returns the bit errors and adds the bit count.
/// Exposed so the sweep can be checked frame by frame.
long long ber_frame(const BerConfig& cfg, BerScheme scheme, double snr_db, double epsilon, long frame,
                    long long* bits);

void write_ber_csv(std::ostream& out, const std::vector<BerResult>& rows);

}  // namespace otfsim
