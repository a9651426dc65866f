// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Index tables and log-sum evaluations shared by the DC terms, the
// subproblem solvers and the CCP loop. Works in any power unit: pass rho
// with N0, or rho / P0 with N0 / P0.

#pragma once

#include "otfsim/channel.hpp"
#include "otfsim/common.hpp"

#include <vector>

namespace otfsim::detail {

inline constexpr double kInvLn2 = 1.4426950408889634;

class DcModel {
 public:
  DcModel(const std::vector<UserChannel>& ch, int M, int N, int K);

  int M() const { return M_; }
  int N() const { return N_; }
  int K() const { return K_; }
  int blocks() const { return mn_; }
  int size() const { return mn_ * K_; }

  /// T[i,r] = sum_p w_p S[back_p(r)] + n0 and I[i,r] = T[i,r] minus the
  /// desired term, both flat as r + MN i.
  void totals(const RVector& x, double n0, RVector& T, RVector& I) const;

  static double log_sum(const RVector& v);

  /// dQ/dx at each block (identical across users), length MN.
  RVector grad_Q(const RVector& T) const;
  /// dZ/dx, length MNK; gather form, parallel over (user, block).
  RVector grad_Z(const RVector& I) const;
  /// Same quantity, scattered from each receive symbol.
  RVector grad_Z_scatter(const RVector& I) const;
  /// -d2Q/dS2 over blocks (positive semidefinite), MN x MN.
  RMatrix hess_Q(const RVector& T) const;

 private:
  int M_, N_, K_, mn_;
  std::vector<std::vector<double>> w_;
  std::vector<std::vector<int>> back_;  // [i][p * mn + r] -> transmit block
  std::vector<std::vector<int>> fwd_;   // [i][p * mn + c] -> receive block
};

}  // namespace otfsim::detail
