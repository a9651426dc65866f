// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations for the tests. Nothing here calls the
// library's transforms: DFTs are written out by hand, Kronecker factors are
// materialized and channels are applied sample by sample.

#pragma once

#include "otfsim/channel.hpp"
#include "otfsim/common.hpp"
#include "otfsim/linkmodel.hpp"
#include "otfsim/rng.hpp"

#include <cmath>
#include <vector>

namespace otfsim::oracle {

inline CMatrix dft(int n) {
  CMatrix f(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) f(a, b) = std::polar(1.0 / std::sqrt(n), -kTwoPi * a * b / n);
  }
  return f;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline CMatrix eye(int n) { return CMatrix::Identity(n, n); }

inline CMatrix random_grid(int rows, int cols, Rng& rng) {
  CMatrix x(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) x(r, c) = complex_gaussian(rng, 1.0);
  }
  return x;
}

inline CVector random_vector(int n, Rng& rng) { return random_grid(n, 1, rng).col(0); }

inline CVector flatten(const CMatrix& x) { return Eigen::Map<const CVector>(x.data(), x.size()); }

/// r[q] = sum_p h_p exp(j 2 pi k_p (q - l_p) / MN) s[(q - l_p) mod MN].
inline CVector td_channel(const UserChannel& ch, const CVector& s, const FrameParams& p) {
  const int mn = p.size();
  CVector r = CVector::Zero(mn);
  for (const auto& path : ch.paths) {
    for (int q = 0; q < mn; ++q) {
      const double ph = kTwoPi * path.doppler_tap * static_cast<double>(q - path.delay_tap) / mn;
      r[q] += path.gain * std::polar(1.0, ph) * s[wrap(q - path.delay_tap, mn)];
    }
  }
  return r;
}

/// Dense H_TD assembled column by column from td_channel.
inline CMatrix td_matrix(const UserChannel& ch, const FrameParams& p) {
  const int mn = p.size();
  CMatrix h(mn, mn);
  for (int c = 0; c < mn; ++c) h.col(c) = td_channel(ch, CVector::Unit(mn, c), p);
  return h;
}

/// DD channel through explicit Kronecker factors.
inline CMatrix dd_matrix(const UserChannel& ch, const FrameParams& p) {
  const CMatrix fn = kron(dft(p.N), eye(p.M));
  return fn * td_matrix(ch, p) * fn.adjoint();
}

inline CMatrix tf_matrix(const UserChannel& ch, const FrameParams& p) {
  const CMatrix fm = kron(eye(p.N), dft(p.M));
  return fm * td_matrix(ch, p) * fm.adjoint();
}

/// Expected desired / MPSI / MUI powers read off the DD channel matrices:
/// the power user j contributes at row r through a set of paths is
/// sum_c |H[r,c]|^2 rho_j[c].
inline InterferenceBreakdown matrix_breakdown(int i, int l, int k, const PowerGrid& rho,
                                              const std::vector<UserChannel>& ch, double n0) {
  const FrameParams p{rho.M, rho.N, 15e3, 1.0 / 15e3};
  const int mn = p.size(), row = l + rho.M * k;
  UserChannel main{i, {ch[i].paths[0]}};
  UserChannel rest{i, {ch[i].paths.begin() + 1, ch[i].paths.end()}};
  const CMatrix h_all = dd_matrix(ch[i], p);
  const CMatrix h_main = dd_matrix(main, p);
  const CMatrix h_rest = rest.paths.empty() ? CMatrix::Zero(mn, mn) : dd_matrix(rest, p);
  InterferenceBreakdown b;
  b.noise = n0;
  for (int c = 0; c < mn; ++c) {
    b.desired += std::norm(h_main(row, c)) * rho(i, c % rho.M, c / rho.M);
    b.mpsi += std::norm(h_rest(row, c)) * rho(i, c % rho.M, c / rho.M);
    for (int j = 0; j < rho.K; ++j) {
      if (j != i) b.mui += std::norm(h_all(row, c)) * rho(j, c % rho.M, c / rho.M);
    }
  }
  return b;
}

inline double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace otfsim::oracle
