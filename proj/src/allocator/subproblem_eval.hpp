// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "allocator/dc_model.hpp"
#include "otfsim/allocator.hpp"

namespace otfsim::detail {

/// Objective pieces of one subproblem in normalized units. phi is the
/// minimization form, -(Q_bar - Z_hat - xi sum a) up to a constant.
struct SubproblemEval {
  explicit SubproblemEval(const SubproblemSpec& spec);

  const SubproblemSpec& spec;
  DcModel model;
  RVector c7;  ///< s_m - s_m^2
  RVector d7;  ///< 1 - 2 s_m

  double q_bar(const RVector& x) const;
  /// phi and its gradient with respect to (x, a); s does not enter phi.
  double phi(const RVector& x, const RVector& a) const;
  void grad_phi(const RVector& x, RVector& gx, double& ga) const;
  /// Maximization objective Q_bar - Z_hat - xi sum a.
  double objective(const RVector& x, const RVector& a) const;
};

AllocationState to_state(const SubproblemSpec& spec, const RVector& x, const RVector& s, const RVector& a);

}  // namespace otfsim::detail
