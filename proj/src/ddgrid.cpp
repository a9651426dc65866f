// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/ddgrid.hpp"

#include <cmath>
#include <string>

namespace otfsim {

void FrameParams::validate() const {
  if (M < 1 || N < 1) throw DimensionError("frame needs M >= 1 and N >= 1");
  if (!(delta_f > 0.0)) throw DimensionError("subcarrier spacing must be positive");
  if (std::abs(T * delta_f - 1.0) > 1e-12) throw DimensionError("T * delta_f must equal 1");
}

namespace {

void require_grid(const CMatrix& m, const FrameParams& p, const char* what) {
  if (m.rows() != p.M || m.cols() != p.N) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(p.M) + "x" +
                         std::to_string(p.N) + " grid, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

void require_length(const CVector& v, const FrameParams& p, const char* what) {
  if (v.size() != p.size()) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(p.size()) +
                         ", got " + std::to_string(v.size()));
  }
}

}  // namespace

CMatrix dft_matrix(int n) {
  CMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      // reduce a*b mod n first so large grids keep full phase accuracy
      const double phase = -kTwoPi * static_cast<double>((static_cast<long long>(a) * b) % n) / n;
      f(a, b) = std::polar(scale, phase);
    }
  }
  return f;
}

CVector vec(const CMatrix& grid) {
  return Eigen::Map<const CVector>(grid.data(), grid.size());
}

CMatrix unvec(const CVector& v, int M, int N) {
  if (M < 1 || N < 1 || v.size() != static_cast<Eigen::Index>(M) * N) {
    throw DimensionError("unvec: length " + std::to_string(v.size()) + " does not match " +
                         std::to_string(M) + "x" + std::to_string(N));
  }
  return Eigen::Map<const CMatrix>(v.data(), M, N);
}

TFGrid isfft(const DDGrid& x, const FrameParams& p) {
  require_grid(x.data, p, "isfft");
  return TFGrid(dft_matrix(p.M) * x.data * dft_matrix(p.N).adjoint());
}

DDGrid sfft(const TFGrid& y, const FrameParams& p) {
  require_grid(y.data, p, "sfft");
  return DDGrid(dft_matrix(p.M).adjoint() * y.data * dft_matrix(p.N));
}

CVector heisenberg(const CVector& x_tf, const FrameParams& p) {
  require_length(x_tf, p, "heisenberg");
  return vec(dft_matrix(p.M).adjoint() * unvec(x_tf, p.M, p.N));
}

CVector wigner(const CVector& y_td, const FrameParams& p) {
  require_length(y_td, p, "wigner");
  return vec(dft_matrix(p.M) * unvec(y_td, p.M, p.N));
}

CVector otfs_modulate(const DDGrid& x, const PulseShape& pulse, const FrameParams& p) {
  require_grid(x.data, p, "otfs_modulate");
  if (pulse.g_tx.size() != p.M) throw DimensionError("otfs_modulate: pulse length must be M");
  const CMatrix x_td = x.data * dft_matrix(p.N).adjoint();
  return vec(pulse.g_tx.cast<cd>().asDiagonal() * x_td);
}

DDGrid otfs_demodulate(const CVector& r, const PulseShape& pulse, const FrameParams& p) {
  require_length(r, p, "otfs_demodulate");
  if (pulse.g_rx.size() != p.M) throw DimensionError("otfs_demodulate: pulse length must be M");
  const CMatrix y_td = pulse.g_rx.cast<cd>().asDiagonal() * unvec(r, p.M, p.N);
  return DDGrid(y_td * dft_matrix(p.N));
}

}  // namespace otfsim
