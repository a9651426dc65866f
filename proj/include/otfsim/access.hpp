// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Orthogonal multiple-access layouts of the DD grid.

#pragma once

#include "otfsim/common.hpp"
#include "otfsim/linkmodel.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace otfsim {

/// Binary M x N x K occupancy tensor in tensor_index order.
struct ScheduleMask {
  int M = 0;
  int N = 0;
  int K = 0;
  std::vector<std::uint8_t> s;

  static ScheduleMask empty(const FrameParams& p, int K);

  bool operator()(int i, int l, int k) const { return s[tensor_index(M, N, i, l, k)] != 0; }
  void set(int i, int l, int k, bool on) { s[tensor_index(M, N, i, l, k)] = on ? 1 : 0; }

  int active_count() const;
  int user_count(int i) const;
  /// True when no (l,k) is held by more than one user.
  bool disjoint() const;

  bool operator==(const ScheduleMask&) const = default;
};

enum class OmaScheme { kDdma, kDodma, kDdodma, kDdoidma };

inline constexpr OmaScheme kAllOmaSchemes[] = {OmaScheme::kDdma, OmaScheme::kDodma, OmaScheme::kDdodma,
                                              OmaScheme::kDdoidma};

std::string oma_name(OmaScheme s);
OmaScheme parse_oma_name(const std::string& s);

/// User i (0-based) owns delay rows [i M/K, (i+1) M/K).
ScheduleMask ddma_mask(const FrameParams& p, int K);
/// User i owns Doppler columns [i N/K, (i+1) N/K).
ScheduleMask dodma_mask(const FrameParams& p, int K);
/// User i owns tile (i / sqrt(K), i mod sqrt(K)) of a sqrt(K) x sqrt(K)
/// partition; the first tile index runs along delay.
ScheduleMask ddodma_mask(const FrameParams& p, int K);
/// User i owns l = (i mod g1) + g1 v, k = (i / g1) + g2 u.
ScheduleMask ddoidma_mask(const FrameParams& p, int K, int g1, int g2);
/// g1 = g2 = sqrt(K); K must be a perfect square.
ScheduleMask ddoidma_mask(const FrameParams& p, int K);

ScheduleMask oma_mask(OmaScheme scheme, const FrameParams& p, int K);

/// P0 split evenly over the active blocks.
PowerGrid uniform_power(const ScheduleMask& mask, double P0, Domain domain = Domain::kDD);

/// "l,k,user" rows for every active block, user 0-based, with a header line.
void write_mask_csv(std::ostream& out, const ScheduleMask& mask);

/// Integer square root of K, or -1 when K is not a perfect square.
int exact_sqrt(int K);

}  // namespace otfsim
