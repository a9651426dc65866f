// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Joint power allocation and symbol scheduling. The sum rate is written as a
// difference of concave log-sums (Q - Z); the Z part is linearized around
// the current iterate and the binary schedule constraint is handled by a
// penalized slack, giving a sequence of convex subproblems.

#pragma once

#include "otfsim/access.hpp"
#include "otfsim/channel.hpp"
#include "otfsim/common.hpp"
#include "otfsim/linkmodel.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace otfsim {

class SolverError : public Error {
 public:
  SolverError(const std::string& what, int newton_iteration, double dual_residual, double gap)
      : Error(ErrorCategory::kSolver, what),
        newton_iteration(newton_iteration),
        dual_residual(dual_residual),
        gap(gap) {}

  int newton_iteration;
  double dual_residual;
  double gap;
  int ccp_iteration = -1;
};

/// Relaxed optimizer variables, each M x N x K in tensor_index order.
struct AllocationState {
  int M = 0;
  int N = 0;
  int K = 0;
  RVector rho;
  RVector s;
  RVector a;

  static AllocationState zeros(const FrameParams& p, int K);
  /// Binary schedule with matching power and zero slack.
  static AllocationState from_schedule(const ScheduleMask& mask, const PowerGrid& power);
  PowerGrid power() const;
};

enum class CcpInit { kDdma, kBestOma };

struct CcpConfig {
  double xi0 = 1.0;
  double mu = 3.0;
  double xi_max = 1e4;
  double delta1_rel = 1e-3;  ///< delta1 = delta1_rel * P0
  double delta2_rel = 1e-4;  ///< delta2 = delta2_rel * MNK
  int m_max = 50;
  double eps_bigM_rel = 1e-6;  ///< eps_bigM = eps_bigM_rel * P0
  double solver_tol = 1e-7;
  double round_threshold = 0.5;
  CcpInit init = CcpInit::kDdma;

  void validate() const;
};

struct DcTerms {
  double Q_bar = 0.0;
  double Z_bar = 0.0;
  RVector grad_Z;  ///< filled by dc_decompose_with_grad only
};

/// Q_bar and Z_bar in bits (no 1/2 pre-log): Q_bar - Z_bar = sum log2(1 + SINR).
DcTerms dc_decompose(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);
DcTerms dc_decompose_with_grad(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);

/// Exact dZ_bar/drho. The parallel kernel gathers, for each transmit block,
/// the receive symbols it reaches; the serial reference scatters from each
/// receive symbol.
RVector grad_Zbar(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);
RVector grad_Zbar_serial(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);
/// dQ_bar/drho (the same for every user at a given block).
RVector grad_Qbar(const PowerGrid& rho, const std::vector<UserChannel>& ch, double n0);

/// First-order expansion of Z_bar about rho_m evaluated at rho.
double linearize_Z(const PowerGrid& rho, const PowerGrid& rho_m, const DcTerms& at_m);

/// One convex subproblem, stored in normalized units x = rho / P0 (the
/// objective is invariant to this scaling).
struct SubproblemSpec {
  int M = 0;
  int N = 0;
  int K = 0;
  double P0 = 1.0;
  double n0 = 1.0;  ///< N0 / P0
  double eps = 0.0;  ///< eps_bigM / P0
  double xi = 1.0;
  std::vector<UserChannel> channels;
  RVector x_m;
  RVector s_m;
  double Z_m = 0.0;  ///< Z_bar at x_m
  RVector grad_Z;    ///< dZ_bar/dx at x_m

  int size() const { return M * N * K; }
};

SubproblemSpec build_subproblem(const AllocationState& at_m, double xi, const std::vector<UserChannel>& ch,
                                const LinkBudget& budget, const CcpConfig& cfg);

/// Q_bar(x) - Z_hat(x; x_m) - xi * sum(a) at a state in rho units.
double subproblem_objective(const SubproblemSpec& spec, const AllocationState& z);
/// Largest violation of C1-C8 at a state in rho units (0 when feasible).
double subproblem_violation(const SubproblemSpec& spec, const AllocationState& z);

struct SubproblemResult {
  AllocationState state;
  double objective = 0.0;
  int iterations = 0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string method;
};

/// Primal-dual interior point. Throws SolverError on iteration limit or a
/// failed line search.
SubproblemResult solve_subproblem(const SubproblemSpec& spec, double tol);
/// Accelerated projected gradient with a Dykstra projection; slower, used
/// when the interior point method fails.
SubproblemResult solve_subproblem_pg(const SubproblemSpec& spec, double tol, int max_iter = 20000);

struct CcpTraceRow {
  int iteration = 0;
  double objective = 0.0;  ///< subproblem objective at the new point
  double sum_a = 0.0;
  double xi = 0.0;
  double delta_rho_l1 = 0.0;
  double delta_a_l1 = 0.0;
  double relaxed_rate = 0.0;  ///< 1/2 pre-log sum rate of the relaxed power
  double rounded_rate = 0.0;  ///< 1/2 pre-log sum rate after rounding
  int newton_iterations = 0;
  std::string method;
};

struct CcpResult {
  AllocationState final_state;  ///< last relaxed iterate
  ScheduleMask schedule;        ///< best rounded schedule seen
  PowerGrid power;
  double sum_rate = 0.0;            ///< of (schedule, power)
  double final_rounded_rate = 0.0;  ///< rounding of the last iterate alone
  double init_rate = 0.0;
  std::string init_label;
  int iterations = 0;
  bool converged = false;
  double final_a_l1 = 0.0;
  double max_binary_violation = 0.0;  ///< max |s (s - 1)| of the last iterate
  std::vector<CcpTraceRow> trace;
};

/// Starting point: uniform DDMA, or the best of the four OMA layouts that
/// fit the grid.
AllocationState ccp_initial_state(const std::vector<UserChannel>& ch, const FrameParams& p, int K,
                                  const LinkBudget& budget, CcpInit init, std::string* label = nullptr);

CcpResult penalty_ccp(const std::vector<UserChannel>& ch, const FrameParams& p, const LinkBudget& budget,
                      const CcpConfig& cfg);
CcpResult penalty_ccp(const std::vector<UserChannel>& ch, const FrameParams& p, const LinkBudget& budget,
                      const CcpConfig& cfg, const AllocationState& init, const std::string& init_label);

struct RoundedSchedule {
  ScheduleMask mask;
  PowerGrid power;
};

/// s > threshold becomes 1; a block claimed by several users goes to the one
/// with the larger rho. Power off the schedule is dropped and the rest is
/// scaled back up to P0.
RoundedSchedule round_schedule(const AllocationState& state, double threshold, double P0);

void write_trace_csv(std::ostream& out, const std::vector<CcpTraceRow>& trace);

}  // namespace otfsim
