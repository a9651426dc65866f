// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Symbol-wise DD input-output relation, interference split and analytic
// SINR / sum-rate for OTFS, plus the block-wise TF model used for OFDM.

#pragma once

#include "otfsim/channel.hpp"
#include "otfsim/common.hpp"
#include "otfsim/ddgrid.hpp"

#include <vector>

namespace otfsim {

/// Nonnegative M x N x K power tensor, flat in tensor_index order. For the TF
/// domain the two grid axes are subcarrier m and OFDM symbol n.
struct PowerGrid {
  Domain domain = Domain::kDD;
  int M = 0;
  int N = 0;
  int K = 0;
  RVector rho;

  static PowerGrid zeros(const FrameParams& p, int K, Domain domain = Domain::kDD);

  double& operator()(int i, int l, int k) { return rho[tensor_index(M, N, i, l, k)]; }
  double operator()(int i, int l, int k) const { return rho[tensor_index(M, N, i, l, k)]; }
  double total() const { return rho.sum(); }

  /// Sum over users at every (l,k), length MN.
  RVector per_block_total() const;

  /// Throws DimensionError on shape mismatch and ConfigError on negative entries.
  void validate(const FrameParams& p) const;
};

struct LinkBudget {
  double P0 = 1.0;
  double N0 = 1.0;

  /// N0 chosen so that P0 / (MN N0) equals the requested SNR.
  static LinkBudget from_snr_db(double P0, double snr_db, const FrameParams& p);
  double snr(const FrameParams& p) const { return P0 / (p.size() * N0); }
};

struct InterferenceBreakdown {
  double desired = 0.0;
  double mpsi = 0.0;
  double mui = 0.0;
  double noise = 0.0;
};

struct OfdmBreakdown {
  double desired = 0.0;
  double ici = 0.0;
  double isi = 0.0;
  double noise = 0.0;
};

/// g_{l,k}^{i,p}: the per-symbol coefficient of a path, including the extra
/// Doppler phase picked up when the delay shift wraps around the frame.
cd effective_coeff(int l, int k, const Path& path, const FrameParams& p);

struct SymbolwiseOutput {
  cd value;  ///< noiseless Y_DD^(i)[l,k]
  cd desired;
  cd mpsi;
  cd mui;
};

/// Evaluates the symbol-wise relation at receive index (l,k) of user i.
/// x[j] is user j's transmitted DD grid; ch[i] is user i's channel.
SymbolwiseOutput symbolwise_output(const std::vector<DDGrid>& x, const std::vector<UserChannel>& ch, int i,
                                   int l, int k, const FrameParams& p);

/// Whole received grid of user i assembled symbol by symbol.
DDGrid symbolwise_grid(const std::vector<DDGrid>& x, const std::vector<UserChannel>& ch, int i,
                       const FrameParams& p);

/// Expected desired / MPSI / MUI powers at (i,l,k) for CN(0, rho) symbols.
InterferenceBreakdown otfs_breakdown(int i, int l, int k, const PowerGrid& rho,
                                     const std::vector<UserChannel>& ch, double n0);

double otfs_sinr(int i, int l, int k, const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);

/// SINR of every (i,l,k), flat in tensor_index order. The parallel kernel
/// folds all users into one total-power grid; the serial reference expands
/// every (j,p) term.
RVector otfs_sinr_grid(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);
RVector otfs_sinr_grid_serial(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);

/// sum_{i,l,k} 1/2 log2(1 + SINR).
double otfs_sum_rate(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);
/// Per-user sum rates with the same pre-log.
std::vector<double> otfs_user_rates(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);

/// TF blocks of one user's channel: h0[n] = block (n,n), h1[n] = block
/// (n,n-1) (h1[0] is zero). residual_energy is the squared Frobenius norm of
/// every other block.
struct OfdmBlocks {
  std::vector<CMatrix> h0;
  std::vector<CMatrix> h1;
  double residual_energy = 0.0;
};

/// Slices a full MN x MN H_TF.
OfdmBlocks ofdm_block_channels(const EffectiveChannel& h_tf, const FrameParams& p);

/// Same blocks built straight from the path list without forming H_TF.
OfdmBlocks ofdm_blocks_from_channel(const UserChannel& ch, const FrameParams& p, const CfoModel& cfo = {});

OfdmBreakdown ofdm_breakdown(int i, int m, int n, const PowerGrid& rho, const std::vector<OfdmBlocks>& blocks,
                             double n0);

/// sum over (i,m,n) of 1/2 log2(1 + desired / (ICI + ISI + N0)).
double ofdm_sum_rate(const PowerGrid& rho, const std::vector<OfdmBlocks>& blocks, double n0);

}  // namespace otfsim
