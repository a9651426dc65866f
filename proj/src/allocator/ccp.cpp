// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace otfsim {

// The first-order fallback only has to make progress when the interior
// point stalls; a bounded run keeps one bad subproblem from dominating.
constexpr int kPgFallbackIters = 300;

AllocationState ccp_initial_state(const std::vector<UserChannel>& ch, const FrameParams& p, int K,
                                  const LinkBudget& budget, CcpInit init, std::string* label) {
  if (init == CcpInit::kDdma) {
    const auto mask = ddma_mask(p, K);
    if (label) *label = "DDMA";
    return AllocationState::from_schedule(mask, uniform_power(mask, budget.P0));
  }
  double best = -1.0;
  AllocationState out;
  for (auto scheme : kAllOmaSchemes) {
    ScheduleMask mask;
    try {
      mask = oma_mask(scheme, p, K);
    } catch (const ConfigError&) {
      continue;  // layout does not fit this grid
    }
    const PowerGrid power = uniform_power(mask, budget.P0);
    const double rate = otfs_sum_rate(power, ch, budget.N0);
    if (rate > best) {
      best = rate;
      out = AllocationState::from_schedule(mask, power);
      if (label) *label = oma_name(scheme);
    }
  }
  if (best < 0.0) throw ConfigError("no multiple-access layout fits M = " + std::to_string(p.M) +
                                    ", N = " + std::to_string(p.N) + ", K = " + std::to_string(K));
  return out;
}

RoundedSchedule round_schedule(const AllocationState& state, double threshold, double P0) {
  const FrameParams p{state.M, state.N, 15e3, 1.0 / 15e3};
  RoundedSchedule out{ScheduleMask::empty(p, state.K), PowerGrid::zeros(p, state.K)};
  const int mn = state.M * state.N;
  for (int c = 0; c < mn; ++c) {
    int owner = -1;
    for (int i = 0; i < state.K; ++i) {
      const Eigen::Index t = c + static_cast<Eigen::Index>(i) * mn;
      if (state.s[t] > threshold && (owner < 0 || state.rho[t] > state.rho[c + static_cast<Eigen::Index>(owner) * mn])) {
        owner = i;
      }
    }
    if (owner >= 0) {
      const Eigen::Index t = c + static_cast<Eigen::Index>(owner) * mn;
      out.mask.s[static_cast<std::size_t>(t)] = 1;
      out.power.rho[t] = std::max(0.0, state.rho[t]);
    }
  }
  const double total = out.power.rho.sum();
  if (total > 0.0) out.power.rho *= P0 / total;
  return out;
}

CcpResult penalty_ccp(const std::vector<UserChannel>& ch, const FrameParams& p, const LinkBudget& budget,
                      const CcpConfig& cfg) {
  std::string label;
  const int K = static_cast<int>(ch.size());
  const auto init = ccp_initial_state(ch, p, K, budget, cfg.init, &label);
  return penalty_ccp(ch, p, budget, cfg, init, label);
}

CcpResult penalty_ccp(const std::vector<UserChannel>& ch, const FrameParams& p, const LinkBudget& budget,
                      const CcpConfig& cfg, const AllocationState& init, const std::string& init_label) {
  cfg.validate();
  const int K = static_cast<int>(ch.size());
  if (init.M != p.M || init.N != p.N || init.K != K) throw DimensionError("initial state does not match the grid");
  const double delta1 = cfg.delta1_rel * budget.P0;
  const double delta2 = cfg.delta2_rel * p.size() * K;

  CcpResult res;
  res.init_label = init_label;
  AllocationState state = init;
  state.a = state.s.array() - state.s.array().square();

  auto rounded = round_schedule(state, cfg.round_threshold, budget.P0);
  res.init_rate = otfs_sum_rate(init.power(), ch, budget.N0);
  res.schedule = rounded.mask;
  res.power = rounded.power;
  res.sum_rate = otfs_sum_rate(rounded.power, ch, budget.N0);

  double xi = cfg.xi0;
  for (int m = 0; m < cfg.m_max; ++m) {
    const SubproblemSpec spec = build_subproblem(state, xi, ch, budget, cfg);
    SubproblemResult sol;
    try {
      sol = solve_subproblem(spec, cfg.solver_tol);
    } catch (SolverError&) {
      sol = solve_subproblem_pg(spec, cfg.solver_tol, kPgFallbackIters);
    }
    CcpTraceRow row;
    row.iteration = m + 1;
    row.objective = sol.objective;
    row.sum_a = sol.state.a.sum();
    row.xi = xi;
    row.delta_rho_l1 = (sol.state.rho - state.rho).lpNorm<1>();
    row.delta_a_l1 = (sol.state.a - state.a).lpNorm<1>();
    row.relaxed_rate = otfs_sum_rate(sol.state.power(), ch, budget.N0);
    rounded = round_schedule(sol.state, cfg.round_threshold, budget.P0);
    row.rounded_rate = otfs_sum_rate(rounded.power, ch, budget.N0);
    row.newton_iterations = sol.iterations;
    row.method = sol.method;
    res.trace.push_back(row);

    if (row.rounded_rate > res.sum_rate) {
      res.sum_rate = row.rounded_rate;
      res.schedule = rounded.mask;
      res.power = rounded.power;
    }
    res.final_rounded_rate = row.rounded_rate;
    state = sol.state;
    res.iterations = m + 1;
    xi = std::min(cfg.mu * xi, cfg.xi_max);
    if (row.delta_rho_l1 <= delta1 && row.delta_a_l1 <= delta2) {
      res.converged = true;
      break;
    }
  }
  res.final_state = state;
  res.final_a_l1 = state.a.lpNorm<1>();
  res.max_binary_violation = (state.s.array() * (state.s.array() - 1.0)).abs().maxCoeff();
  return res;
}

void write_trace_csv(std::ostream& out, const std::vector<CcpTraceRow>& trace) {
  out << "iteration,objective,sum_a,xi,delta_rho_l1,delta_a_l1,relaxed_rate,rounded_rate,newton_iterations,method\n";
  char buf[512];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d,%s\n", r.iteration, r.objective,
                  r.sum_a, r.xi, r.delta_rho_l1, r.delta_a_l1, r.relaxed_rate, r.rounded_rate, r.newton_iterations,
                  r.method.c_str());
    out << buf;
  }
}

}  // namespace otfsim
