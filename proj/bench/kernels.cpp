// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// OpenMP kernels against the serial references they are tested with.

#include <benchmark/benchmark.h>

#include "otfsim/access.hpp"
#include "otfsim/allocator.hpp"
#include "otfsim/channel.hpp"
#include "otfsim/linkmodel.hpp"
#include "otfsim/rng.hpp"

#include <vector>

using namespace otfsim;

namespace {

struct Scene {
  FrameParams p;
  std::vector<UserChannel> ch;
  PowerGrid rho;
  double n0;
};

Scene make_scene(int M, int N, int K, int P) {
  Scene s{FrameParams::make(M, N), {}, {}, 0.0};
  Rng rng = substream(11, {static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(N)});
  for (int i = 0; i < K; ++i) s.ch.push_back(random_channel(P, s.p, rng, i));
  s.rho = uniform_power(ddma_mask(s.p, K), 1.0);
  s.n0 = LinkBudget::from_snr_db(1.0, 10.0, s.p).N0;
  return s;
}

void BM_SinrGrid(benchmark::State& st) {
  const Scene s = make_scene(static_cast<int>(st.range(0)), 16, 4, 4);
  for (auto _ : st) benchmark::DoNotOptimize(otfs_sinr_grid(s.rho, s.ch, s.n0));
}

void BM_SinrGridSerial(benchmark::State& st) {
  const Scene s = make_scene(static_cast<int>(st.range(0)), 16, 4, 4);
  for (auto _ : st) benchmark::DoNotOptimize(otfs_sinr_grid_serial(s.rho, s.ch, s.n0));
}

void BM_GradZbar(benchmark::State& st) {
  const Scene s = make_scene(static_cast<int>(st.range(0)), 8, 4, 3);
  for (auto _ : st) benchmark::DoNotOptimize(grad_Zbar(s.rho, s.ch, s.n0));
}

void BM_GradZbarSerial(benchmark::State& st) {
  const Scene s = make_scene(static_cast<int>(st.range(0)), 8, 4, 3);
  for (auto _ : st) benchmark::DoNotOptimize(grad_Zbar_serial(s.rho, s.ch, s.n0));
}

void BM_TdToDd(benchmark::State& st) {
  const Scene s = make_scene(static_cast<int>(st.range(0)), 8, 1, 4);
  const CMatrix td = build_H_TD(s.ch[0], s.p, {0.3}).matrix;
  for (auto _ : st) benchmark::DoNotOptimize(td_to_dd(td, s.p));
}

void BM_TdToDdDense(benchmark::State& st) {
  const Scene s = make_scene(static_cast<int>(st.range(0)), 8, 1, 4);
  const CMatrix td = build_H_TD(s.ch[0], s.p, {0.3}).matrix;
  for (auto _ : st) benchmark::DoNotOptimize(td_to_dd_dense(td, s.p));
}

}  // namespace

BENCHMARK(BM_SinrGrid)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SinrGridSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradZbar)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradZbarSerial)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TdToDd)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TdToDdDense)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
