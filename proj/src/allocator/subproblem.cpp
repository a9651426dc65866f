// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "allocator/subproblem_eval.hpp"

#include <algorithm>
#include <cmath>

namespace otfsim {
namespace detail {

SubproblemEval::SubproblemEval(const SubproblemSpec& sp)
    : spec(sp), model(sp.channels, sp.M, sp.N, sp.K) {
  c7 = sp.s_m.array() - sp.s_m.array().square();
  d7 = 1.0 - 2.0 * sp.s_m.array();
}

double SubproblemEval::q_bar(const RVector& x) const {
  RVector T, I;
  model.totals(x, spec.n0, T, I);
  return DcModel::log_sum(T);
}

double SubproblemEval::phi(const RVector& x, const RVector& a) const {
  return -q_bar(x) + spec.grad_Z.dot(x) + spec.xi * a.sum();
}

void SubproblemEval::grad_phi(const RVector& x, RVector& gx, double& ga) const {
  RVector T, I;
  model.totals(x, spec.n0, T, I);
  gx = spec.grad_Z - model.grad_Q(T).replicate(spec.K, 1);
  ga = spec.xi;
}

double SubproblemEval::objective(const RVector& x, const RVector& a) const {
  return q_bar(x) - spec.Z_m - spec.grad_Z.dot(x - spec.x_m) - spec.xi * a.sum();
}

AllocationState to_state(const SubproblemSpec& spec, const RVector& x, const RVector& s, const RVector& a) {
  return {spec.M, spec.N, spec.K, x * spec.P0, s, a};
}

}  // namespace detail

void CcpConfig::validate() const {
  if (!(xi0 > 0.0) || !(mu >= 1.0) || !(xi_max >= xi0) || !(delta1_rel > 0.0) || !(delta2_rel > 0.0) ||
      m_max < 1 || !(eps_bigM_rel > 0.0) || !(solver_tol > 0.0)) {
    throw ConfigError("optimizer settings: need xi0 > 0, mu >= 1, xi_max >= xi0, positive tolerances, m_max >= 1");
  }
  if (!(round_threshold > 0.0 && round_threshold < 1.0)) throw ConfigError("round_threshold must lie in (0, 1)");
}

AllocationState AllocationState::zeros(const FrameParams& p, int K) {
  const Eigen::Index n = static_cast<Eigen::Index>(p.size()) * K;
  return {p.M, p.N, K, RVector::Zero(n), RVector::Zero(n), RVector::Zero(n)};
}

AllocationState AllocationState::from_schedule(const ScheduleMask& mask, const PowerGrid& power) {
  if (mask.M != power.M || mask.N != power.N || mask.K != power.K) {
    throw DimensionError("schedule and power grid shapes differ");
  }
  AllocationState st{mask.M, mask.N, mask.K, power.rho, RVector::Zero(power.rho.size()),
                     RVector::Zero(power.rho.size())};
  for (std::size_t t = 0; t < mask.s.size(); ++t) st.s[static_cast<Eigen::Index>(t)] = mask.s[t];
  return st;
}

PowerGrid AllocationState::power() const { return {Domain::kDD, M, N, K, rho}; }

SubproblemSpec build_subproblem(const AllocationState& at_m, double xi, const std::vector<UserChannel>& ch,
                                const LinkBudget& budget, const CcpConfig& cfg) {
  SubproblemSpec spec;
  spec.M = at_m.M;
  spec.N = at_m.N;
  spec.K = at_m.K;
  spec.P0 = budget.P0;
  spec.n0 = budget.N0 / budget.P0;
  spec.eps = cfg.eps_bigM_rel;
  spec.xi = xi;
  spec.channels = ch;
  spec.x_m = at_m.rho / budget.P0;
  spec.s_m = at_m.s;
  const detail::DcModel model(ch, spec.M, spec.N, spec.K);
  RVector T, I;
  model.totals(spec.x_m, spec.n0, T, I);
  spec.Z_m = detail::DcModel::log_sum(I);
  spec.grad_Z = model.grad_Z(I);
  return spec;
}

double subproblem_objective(const SubproblemSpec& spec, const AllocationState& z) {
  const detail::SubproblemEval ev(spec);
  return ev.objective(z.rho / spec.P0, z.a);
}

double subproblem_violation(const SubproblemSpec& spec, const AllocationState& z) {
  const RVector x = z.rho / spec.P0;
  const int mn = spec.M * spec.N;
  double v = std::max(0.0, x.sum() - 1.0);
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const double s = z.s[t], a = z.a[t], sm = spec.s_m[t];
    v = std::max({v, -x[t], x[t] - s, s - 1.0 + spec.eps - x[t], s * s - s, -a,
                  (sm - sm * sm) + (1.0 - 2.0 * sm) * (s - sm) - a});
  }
  for (int c = 0; c < mn; ++c) {
    double occ = 0.0;
    for (int i = 0; i < spec.K; ++i) occ += z.s[c + static_cast<Eigen::Index>(i) * mn];
    v = std::max(v, occ - 1.0);
  }
  return v;
}

}  // namespace otfsim
