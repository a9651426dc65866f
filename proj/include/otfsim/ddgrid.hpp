// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Lattice transforms between the delay-Doppler (DD), time-frequency (TF) and
// time-delay (TD) representations of one frame, and the OTFS modem built on
// them. All DFT matrices are unitary; vec() stacks columns (delay first).

#pragma once

#include "otfsim/common.hpp"

namespace otfsim {

enum class Domain { kDD, kTF, kTD };

/// M x N complex grid tagged with its domain so DD/TF/TD data cannot be mixed
/// up at call sites.
template <Domain D>
struct Grid {
  CMatrix data;

  Grid() = default;
  explicit Grid(CMatrix m) : data(std::move(m)) {}
  static Grid zeros(const FrameParams& p) { return Grid(CMatrix::Zero(p.M, p.N)); }

  int rows() const { return static_cast<int>(data.rows()); }
  int cols() const { return static_cast<int>(data.cols()); }
  cd& operator()(int a, int b) { return data(a, b); }
  cd operator()(int a, int b) const { return data(a, b); }
};

using DDGrid = Grid<Domain::kDD>;
using TFGrid = Grid<Domain::kTF>;
using TDGrid = Grid<Domain::kTD>;

/// Diagonal transmit/receive pulse samples g(qT/M), q = 0..M-1.
struct PulseShape {
  RVector g_tx;
  RVector g_rx;

  static PulseShape rectangular(int M) { return {RVector::Ones(M), RVector::Ones(M)}; }
};

/// Unitary n-point DFT matrix, F[a,b] = exp(-j 2 pi a b / n) / sqrt(n).
CMatrix dft_matrix(int n);

CVector vec(const CMatrix& grid);
CMatrix unvec(const CVector& v, int M, int N);

/// X_TF = F_M X_DD F_N^H.
TFGrid isfft(const DDGrid& x, const FrameParams& p);
/// Y_DD = F_M^H Y_TF F_N, the inverse of isfft.
DDGrid sfft(const TFGrid& y, const FrameParams& p);

/// Per-slot M-point IDFT, (I_N kron F_M^H) x_TF.
CVector heisenberg(const CVector& x_tf, const FrameParams& p);
/// Per-slot M-point DFT, (I_N kron F_M) y_TD.
CVector wigner(const CVector& y_td, const FrameParams& p);

/// Time-domain frame s = vec(G_tx X_TD) with X_TD = X_DD F_N^H.
CVector otfs_modulate(const DDGrid& x, const PulseShape& pulse, const FrameParams& p);
/// Y_DD = G_rx unvec(r) F_N, i.e. Wigner transform followed by the SFFT.
DDGrid otfs_demodulate(const CVector& r, const PulseShape& pulse, const FrameParams& p);

}  // namespace otfsim
