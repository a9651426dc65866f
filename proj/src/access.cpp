// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/access.hpp"

#include <algorithm>
#include <ostream>

namespace otfsim {

ScheduleMask ScheduleMask::empty(const FrameParams& p, int K) {
  if (K < 1) throw DimensionError("schedule needs K >= 1");
  return {p.M, p.N, K, std::vector<std::uint8_t>(static_cast<std::size_t>(p.size()) * K, 0)};
}

int ScheduleMask::active_count() const {
  return static_cast<int>(std::count(s.begin(), s.end(), std::uint8_t{1}));
}

int ScheduleMask::user_count(int i) const {
  const auto b = s.begin() + static_cast<std::ptrdiff_t>(i) * M * N;
  return static_cast<int>(std::count(b, b + M * N, std::uint8_t{1}));
}

bool ScheduleMask::disjoint() const {
  for (int r = 0; r < M * N; ++r) {
    int owners = 0;
    for (int i = 0; i < K; ++i) owners += s[r + static_cast<std::size_t>(i) * M * N];
    if (owners > 1) return false;
  }
  return true;
}

std::string oma_name(OmaScheme s) {
  switch (s) {
    case OmaScheme::kDdma: return "DDMA";
    case OmaScheme::kDodma: return "DoDMA";
    case OmaScheme::kDdodma: return "DDoDMA";
    case OmaScheme::kDdoidma: return "DDoIDMA";
  }
  return "?";
}

OmaScheme parse_oma_name(const std::string& s) {
  for (auto scheme : kAllOmaSchemes) {
    std::string a = oma_name(scheme), b = s;
    std::transform(a.begin(), a.end(), a.begin(), ::tolower);
    std::transform(b.begin(), b.end(), b.begin(), ::tolower);
    if (a == b) return scheme;
  }
  throw ConfigError("unknown multiple-access scheme '" + s + "'");
}

int exact_sqrt(int K) {
  if (K < 0) return -1;
  int r = 0;
  while ((r + 1) * (r + 1) <= K) ++r;
  return r * r == K ? r : -1;
}

namespace {

void require(bool ok, const std::string& scheme, const std::string& why) {
  if (!ok) throw ConfigError(scheme + ": " + why);
}

}  // namespace

ScheduleMask ddma_mask(const FrameParams& p, int K) {
  require(K >= 1 && p.M % K == 0, "DDMA", "K = " + std::to_string(K) + " must divide M = " + std::to_string(p.M));
  auto mask = ScheduleMask::empty(p, K);
  const int rows = p.M / K;
  for (int i = 0; i < K; ++i) {
    for (int k = 0; k < p.N; ++k) {
      for (int l = i * rows; l < (i + 1) * rows; ++l) mask.set(i, l, k, true);
    }
  }
  return mask;
}

ScheduleMask dodma_mask(const FrameParams& p, int K) {
  require(K >= 1 && p.N % K == 0, "DoDMA", "K = " + std::to_string(K) + " must divide N = " + std::to_string(p.N));
  auto mask = ScheduleMask::empty(p, K);
  const int cols = p.N / K;
  for (int i = 0; i < K; ++i) {
    for (int k = i * cols; k < (i + 1) * cols; ++k) {
      for (int l = 0; l < p.M; ++l) mask.set(i, l, k, true);
    }
  }
  return mask;
}

ScheduleMask ddodma_mask(const FrameParams& p, int K) {
  const int r = exact_sqrt(K);
  require(r >= 1, "DDoDMA", "K = " + std::to_string(K) + " is not a perfect square");
  require(p.M % r == 0 && p.N % r == 0, "DDoDMA",
          "sqrt(K) = " + std::to_string(r) + " must divide M and N");
  auto mask = ScheduleMask::empty(p, K);
  const int h = p.M / r, w = p.N / r;
  for (int i = 0; i < K; ++i) {
    const int tl = i / r, tk = i % r;
    for (int k = tk * w; k < (tk + 1) * w; ++k) {
      for (int l = tl * h; l < (tl + 1) * h; ++l) mask.set(i, l, k, true);
    }
  }
  return mask;
}

ScheduleMask ddoidma_mask(const FrameParams& p, int K, int g1, int g2) {
  require(g1 >= 1 && g2 >= 1 && g1 * g2 == K, "DDoIDMA", "need K = g1 * g2");
  require(p.M % g1 == 0, "DDoIDMA", "g1 = " + std::to_string(g1) + " must divide M = " + std::to_string(p.M));
  require(p.N % g2 == 0, "DDoIDMA", "g2 = " + std::to_string(g2) + " must divide N = " + std::to_string(p.N));
  auto mask = ScheduleMask::empty(p, K);
  for (int i = 0; i < K; ++i) {
    for (int u = 0; u < p.N / g2; ++u) {
      for (int v = 0; v < p.M / g1; ++v) mask.set(i, i % g1 + g1 * v, i / g1 + g2 * u, true);
    }
  }
  return mask;
}

ScheduleMask ddoidma_mask(const FrameParams& p, int K) {
  const int r = exact_sqrt(K);
  require(r >= 1, "DDoIDMA", "K = " + std::to_string(K) + " is not a perfect square; give g1 and g2");
  return ddoidma_mask(p, K, r, r);
}

ScheduleMask oma_mask(OmaScheme scheme, const FrameParams& p, int K) {
  switch (scheme) {
    case OmaScheme::kDdma: return ddma_mask(p, K);
    case OmaScheme::kDodma: return dodma_mask(p, K);
    case OmaScheme::kDdodma: return ddodma_mask(p, K);
    case OmaScheme::kDdoidma: return ddoidma_mask(p, K);
  }
  throw ConfigError("unknown scheme");
}

PowerGrid uniform_power(const ScheduleMask& mask, double P0, Domain domain) {
  const int active = mask.active_count();
  if (active == 0) throw ConfigError("uniform_power: mask has no active blocks");
  PowerGrid g{domain, mask.M, mask.N, mask.K, RVector::Zero(static_cast<Eigen::Index>(mask.s.size()))};
  const double each = P0 / active;
  for (std::size_t t = 0; t < mask.s.size(); ++t) {
    if (mask.s[t]) g.rho[static_cast<Eigen::Index>(t)] = each;
  }
  return g;
}

void write_mask_csv(std::ostream& out, const ScheduleMask& mask) {
  out << "l,k,user\n";
  for (int i = 0; i < mask.K; ++i) {
    for (int k = 0; k < mask.N; ++k) {
      for (int l = 0; l < mask.M; ++l) {
        if (mask(i, l, k)) out << l << "," << k << "," << i << "\n";
      }
    }
  }
}

}  // namespace otfsim
