// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "oracles.hpp"
#include "otfsim/access.hpp"
#include "otfsim/linkmodel.hpp"

#include <cmath>

using namespace otfsim;
namespace orc = otfsim::oracle;

namespace {

std::vector<DDGrid> random_grids(int K, const FrameParams& p, Rng& rng) {
  std::vector<DDGrid> x;
  for (int j = 0; j < K; ++j) x.emplace_back(orc::random_grid(p.M, p.N, rng));
  return x;
}

PowerGrid random_power(const FrameParams& p, int K, Rng& rng) {
  PowerGrid rho = PowerGrid::zeros(p, K);
  for (Eigen::Index t = 0; t < rho.rho.size(); ++t) rho.rho[t] = uniform01(rng);
  rho.rho /= rho.total();
  return rho;
}

}  // namespace

TEST_CASE("effective path coefficient") {
  const auto p = FrameParams::make(2, 2);
  const Path flat{cd(0.3, 0.4), 0, 0};
  for (int l = 0; l < 2; ++l) {
    for (int k = 0; k < 2; ++k) CHECK(std::abs(effective_coeff(l, k, flat, p) - flat.gain) < 1e-15);
  }
  // l < l_p takes the wrapped branch: phase k_p (l - l_p) / MN - k / N
  const Path shifted{cd(1, 0), 1, 0};
  CHECK(std::abs(effective_coeff(0, 1, shifted, p) - std::polar(1.0, -kPi)) < 1e-15);

  Rng rng(1);
  const auto p8 = FrameParams::make(8, 4);
  for (int t = 0; t < 20; ++t) {
    const Path path{complex_gaussian(rng, 1.0), t % 8, t % 5 - 2};
    CHECK(std::abs(std::abs(effective_coeff(t % 8, t % 4, path, p8)) - std::abs(path.gain)) < 1e-14);
  }
}

TEST_CASE("symbol-wise relation") {
  Rng rng(2);
  SUBCASE("single user, identity channel") {
    const auto p = FrameParams::make(4, 4);
    const auto x = random_grids(1, p, rng);
    const std::vector<UserChannel> ch{{0, {{1.0, 0, 0}}}};
    for (int k = 0; k < 4; ++k) {
      for (int l = 0; l < 4; ++l) {
        const auto out = symbolwise_output(x, ch, 0, l, k, p);
        CHECK(std::abs(out.value - x[0](l, k)) < 1e-15);
        CHECK(out.mpsi == cd(0, 0));
        CHECK(out.mui == cd(0, 0));
      }
    }
  }
  SUBCASE("matches the DD channel matrix on 2-user, 3-path instances") {
    const auto p = FrameParams::make(4, 4);
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = random_grids(2, p, rng);
      const std::vector<UserChannel> ch{random_channel(3, p, rng, 0), random_channel(3, p, rng, 1)};
      const CVector xs = orc::flatten(x[0].data) + orc::flatten(x[1].data);
      for (int i = 0; i < 2; ++i) {
        const CVector want = orc::dd_matrix(ch[i], p) * xs;
        CHECK(orc::max_abs(orc::flatten(symbolwise_grid(x, ch, i, p).data) - want) < 1e-10);
      }
    }
  }
  SUBCASE("MUI is the other user's symbol through the path coefficients") {
    const auto p = FrameParams::make(4, 4);
    const std::vector<UserChannel> ch{{0, {{cd(0.9, 0), 0, 0}, {cd(0.2, 0.3), 1, 1}}}, {1, {{1.0, 0, 0}}}};
    std::vector<DDGrid> x{DDGrid::zeros(p), DDGrid::zeros(p)};
    x[1](1, 2) = cd(2, -1);
    // receive (2,3) of user 0 reads user 1's (1,2) through path 2
    const auto out = symbolwise_output(x, ch, 0, 2, 3, p);
    CHECK(std::abs(out.mui - effective_coeff(2, 3, ch[0].paths[1], p) * cd(2, -1)) < 1e-15);
    CHECK(out.desired == cd(0, 0));
    CHECK(out.mpsi == cd(0, 0));
  }
}

TEST_CASE("SINR") {
  Rng rng(3);
  SUBCASE("single unit path, uniform power gives the SNR") {
    const auto p = FrameParams::make(8, 4);
    const auto b = LinkBudget::from_snr_db(2.0, 7.0, p);
    const auto rho = uniform_power(ddma_mask(p, 1), b.P0);
    const std::vector<UserChannel> ch{{0, {{1.0, 0, 0}}}};
    CHECK(otfs_sinr(0, 3, 2, rho, ch, b.N0) == doctest::Approx(std::pow(10.0, 0.7)).epsilon(1e-12));
    CHECK(otfs_sum_rate(rho, ch, b.N0) == doctest::Approx(16.0 * std::log2(1.0 + std::pow(10.0, 0.7))).epsilon(1e-12));
    const PowerGrid zero = PowerGrid::zeros(p, 1);
    CHECK(otfs_sinr(0, 3, 2, zero, ch, b.N0) == 0.0);
    CHECK(otfs_sum_rate(zero, ch, b.N0) == 0.0);
  }
  SUBCASE("breakdown against the channel-matrix oracle") {
    const auto p = FrameParams::make(8, 4);
    const auto prof = builtin_profile(ProfileName::kNtnTdlB, p);
    const PowerGrid rho = uniform_power(ddma_mask(p, 2), 1.0);
    std::vector<UserChannel> ch{realize_channel(prof, p, rng, 0), realize_channel(prof, p, rng, 1)};
    const PowerGrid rnd = random_power(p, 2, rng);
    for (const PowerGrid* r : {&rho, &rnd}) {
      for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < p.N; ++k) {
          for (int l = 0; l < p.M; ++l) {
            const auto got = otfs_breakdown(i, l, k, *r, ch, 0.01);
            const auto want = orc::matrix_breakdown(i, l, k, *r, ch, 0.01);
            CHECK(std::abs(got.desired - want.desired) < 1e-12);
            CHECK(std::abs(got.mpsi - want.mpsi) < 1e-12);
            CHECK(std::abs(got.mui - want.mui) < 1e-12);
          }
        }
      }
    }
  }
  SUBCASE("parallel grid equals the expanded serial sum") {
    const auto p = FrameParams::make(8, 8);
    std::vector<UserChannel> ch;
    for (int i = 0; i < 3; ++i) ch.push_back(random_channel(4, p, rng, i));
    const PowerGrid rho = random_power(p, 3, rng);
    const RVector a = otfs_sinr_grid(rho, ch, 1e-3);
    const RVector b = otfs_sinr_grid_serial(rho, ch, 1e-3);
    CHECK(((a - b).cwiseAbs().array() <= 1e-12 * (1.0 + b.cwiseAbs().array())).all());
    for (int i = 0; i < 3; ++i) {
      for (int t = 0; t < 64; ++t) {
        CHECK(a[t + 64 * i] == doctest::Approx(otfs_sinr(i, t % 8, t / 8, rho, ch, 1e-3)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("dimension checks") {
    const auto p = FrameParams::make(4, 4);
    const PowerGrid rho = PowerGrid::zeros(p, 2);
    const std::vector<UserChannel> one{{0, {{1.0, 0, 0}}}};
    CHECK_THROWS_AS(otfs_sum_rate(rho, one, 1.0), DimensionError);
  }
}

TEST_CASE("Monte-Carlo interference moments match the analytic split") {
  Rng rng(4);
  const auto p = FrameParams::make(4, 4);
  std::vector<UserChannel> ch{random_channel(3, p, rng, 0), random_channel(3, p, rng, 1)};
  const PowerGrid rho = random_power(p, 2, rng);
  const int frames = 10000;
  RVector des = RVector::Zero(32), mpsi = RVector::Zero(32), mui = RVector::Zero(32);
  for (int f = 0; f < frames; ++f) {
    std::vector<DDGrid> x{DDGrid::zeros(p), DDGrid::zeros(p)};
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 4; ++k) {
        for (int l = 0; l < 4; ++l) x[j](l, k) = complex_gaussian(rng, rho(j, l, k));
      }
    }
    for (int i = 0; i < 2; ++i) {
      for (int t = 0; t < 16; ++t) {
        const auto o = symbolwise_output(x, ch, i, t % 4, t / 4, p);
        des[t + 16 * i] += std::norm(o.desired);
        mpsi[t + 16 * i] += std::norm(o.mpsi);
        mui[t + 16 * i] += std::norm(o.mui);
      }
    }
  }
  for (int i = 0; i < 2; ++i) {
    double a_d = 0, a_p = 0, a_u = 0;
    for (int t = 0; t < 16; ++t) {
      const auto b = otfs_breakdown(i, t % 4, t / 4, rho, ch, 0.0);
      a_d += b.desired;
      a_p += b.mpsi;
      a_u += b.mui;
    }
    CHECK(des.segment(16 * i, 16).sum() / frames == doctest::Approx(a_d).epsilon(0.02));
    CHECK(mpsi.segment(16 * i, 16).sum() / frames == doctest::Approx(a_p).epsilon(0.02));
    CHECK(mui.segment(16 * i, 16).sum() / frames == doctest::Approx(a_u).epsilon(0.02));
  }
}

TEST_CASE("OFDM block model") {
  Rng rng(5);
  const auto p = FrameParams::make(4, 4);
  SUBCASE("identity channel") {
    const auto b = ofdm_block_channels(build_H_TF({0, {{1.0, 0, 0}}}, p), p);
    for (int n = 0; n < 4; ++n) {
      CHECK(b.h0[n].isApprox(CMatrix::Identity(4, 4)));
      CHECK(b.h1[n].isZero());
    }
    CHECK(b.residual_energy == doctest::Approx(0.0));
    const auto bud = LinkBudget::from_snr_db(1.0, 10.0, p);
    const auto rho = uniform_power(ddma_mask(p, 1), 1.0, Domain::kTF);
    CHECK(ofdm_sum_rate(rho, {b}, bud.N0) == doctest::Approx(8.0 * std::log2(11.0)).epsilon(1e-12));
  }
  SUBCASE("zero Doppler keeps the whole frame in the two block bands") {
    const UserChannel ch{0, {{cd(0.7, 0.2), 0, 0}, {cd(0.1, -0.4), 2, 0}}};
    const auto b = ofdm_block_channels(build_H_TF(ch, p), p);
    // only the frame wrap (slot N-1 into slot 0) lands outside
    const CMatrix tf = build_H_TF(ch, p).matrix;
    CHECK(b.residual_energy == doctest::Approx(tf.block(0, 12, 4, 4).squaredNorm()).epsilon(1e-12));
    // same per-subcarrier gain in every slot but the first
    for (int n = 2; n < 4; ++n) CHECK(orc::max_abs(b.h0[n] - b.h0[1]) < 1e-13);
  }
  SUBCASE("energy bookkeeping and path-list blocks") {
    for (int trial = 0; trial < 5; ++trial) {
      const auto ch = random_channel(2, p, rng);
      const auto h_tf = build_H_TF(ch, p, {0.25});
      const auto b = ofdm_block_channels(h_tf, p);
      double e = b.residual_energy;
      for (int n = 0; n < 4; ++n) e += b.h0[n].squaredNorm() + b.h1[n].squaredNorm();
      CHECK(e == doctest::Approx(h_tf.matrix.squaredNorm()).epsilon(1e-12));
      const auto fast = ofdm_blocks_from_channel(ch, p, {0.25});
      for (int n = 0; n < 4; ++n) {
        CHECK(orc::max_abs(fast.h0[n] - b.h0[n]) < 1e-12);
        CHECK(orc::max_abs(fast.h1[n] - b.h1[n]) < 1e-12);
      }
      CHECK(fast.residual_energy == doctest::Approx(b.residual_energy).epsilon(1e-10));
    }
  }
  SUBCASE("OFDM rate falls with CFO while OTFS holds") {
    const auto p16 = FrameParams::make(16, 8);
    // delay-only paths: any CFO moves energy off the diagonal
    const UserChannel ch{0, {{cd(0.8, 0.1), 0, 0}, {cd(-0.3, 0.4), 1, 0}, {cd(0.2, -0.2), 3, 0}}};
    const auto bud = LinkBudget::from_snr_db(1.0, 20.0, p16);
    const auto mask = ddma_mask(p16, 1);
    const auto rho_tf = uniform_power(mask, 1.0, Domain::kTF);
    const auto rho_dd = uniform_power(mask, 1.0);
    std::vector<double> ofdm, otfs;
    for (double eps : {0.0, 0.25, 0.5}) {
      ofdm.push_back(ofdm_sum_rate(rho_tf, {ofdm_blocks_from_channel(ch, p16, {eps})}, bud.N0));
      otfs.push_back(otfs_sum_rate(rho_dd, {with_cfo(ch, {eps}, p16)}, bud.N0));
    }
    CHECK(ofdm[1] < ofdm[0]);
    CHECK(ofdm[2] < ofdm[1]);
    for (double r : otfs) CHECK(std::abs(r - otfs[0]) <= 0.01 * otfs[0]);
  }
  SUBCASE("breakdown agrees with the rate kernel") {
    const auto ch = random_channel(3, p, rng);
    const auto b = ofdm_blocks_from_channel(ch, p, {0.25});
    PowerGrid rho = random_power(p, 1, rng);
    rho.domain = Domain::kTF;
    double r = 0.0;
    for (int n = 0; n < 4; ++n) {
      for (int m = 0; m < 4; ++m) {
        const auto o = ofdm_breakdown(0, m, n, rho, {b}, 0.05);
        r += 0.5 * std::log2(1.0 + o.desired / (o.ici + o.isi + o.noise));
      }
    }
    CHECK(ofdm_sum_rate(rho, {b}, 0.05) == doctest::Approx(r).epsilon(1e-12));
  }
}
