// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "otfsim/common.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace otfsim {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer, used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic substream for (seed, tag...). Workers that own distinct tags
/// draw from statistically independent generators regardless of scheduling.
inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return Rng(h);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline cd complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace otfsim
