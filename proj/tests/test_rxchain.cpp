// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "oracles.hpp"
#include "otfsim/rxchain.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace otfsim;
namespace orc = otfsim::oracle;

TEST_CASE("constellations") {
  for (auto order : {Modulation::kQpsk, Modulation::kQam16}) {
    const Constellation con(order);
    double e = 0.0;
    for (const cd& x : con.points()) e += std::norm(x);
    CHECK(e / con.size() == doctest::Approx(1.0).epsilon(1e-14));
    for (int a = 0; a < con.size(); ++a) {
      CHECK(con.demap(con.map(a)) == static_cast<unsigned>(a));
      // Gray: nearest neighbours differ in exactly one bit
      double dmin = 1e9;
      for (int b = 0; b < con.size(); ++b) {
        if (b != a) dmin = std::min(dmin, std::abs(con.map(a) - con.map(b)));
      }
      for (int b = 0; b < con.size(); ++b) {
        if (b != a && std::abs(std::abs(con.map(a) - con.map(b)) - dmin) < 1e-12) {
          CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
        }
      }
    }
    CHECK(parse_modulation(modulation_name(order)) == order);
  }
  CHECK(Constellation(Modulation::kQpsk).bits_per_symbol() == 2);
  CHECK(Constellation(Modulation::kQam16).bits_per_symbol() == 4);
  CHECK_THROWS_AS(parse_modulation("8PSK"), ConfigError);
}

TEST_CASE("LMMSE") {
  Rng rng(1);
  SUBCASE("scalar cases") {
    const CVector y = orc::random_vector(4, rng);
    CHECK(orc::max_abs(lmmse_detect(y, CMatrix::Identity(4, 4), 1e-14, 1.0) - y) < 1e-12);
    const CMatrix h2 = 2.0 * CMatrix::Identity(4, 4);
    CHECK(orc::max_abs(lmmse_detect(y, h2, 2.0, 1.0) - y / 3.0) < 1e-14);
  }
  SUBCASE("dense normal equations") {
    const CMatrix h = orc::random_grid(16, 16, rng);
    const CVector y = orc::random_vector(16, rng);
    // (H^H H + (N0/rho) I) x = H^H y
    CMatrix a = h.adjoint() * h;
    a.diagonal().array() += 0.1 / 2.0;
    const CVector want = a.fullPivLu().solve(h.adjoint() * y);
    CHECK(orc::max_abs(lmmse_detect(y, h, 0.1, 2.0) - want) < 1e-8);
  }
  SUBCASE("time-domain sparse filter equals DD-domain filtering") {
    const auto p = FrameParams::make(8, 4);
    const auto ch = random_channel(3, p, rng);
    const CfoModel cfo{0.3};
    const SparseCMatrix hs = sparse_H_TD(ch, p, cfo);
    CHECK(orc::max_abs(CMatrix(hs) - build_H_TD(ch, p, cfo).matrix) < 1e-14);
    const CVector r = orc::random_vector(p.size(), rng);
    const auto rect = PulseShape::rectangular(p.M);
    const CMatrix via_td = otfs_demodulate(SparseLmmseFilter(hs, 0.05, 1.0).apply(r), rect, p).data;
    const CMatrix h_dd = build_H_DD(ch, p, cfo).matrix;
    const CVector via_dd = LmmseFilter(h_dd, 0.05, 1.0).apply(vec(otfs_demodulate(r, rect, p).data));
    CHECK(orc::max_abs(vec(via_td) - via_dd) < 1e-10);
  }
  SUBCASE("matched filter") {
    const CMatrix h = orc::random_grid(6, 6, rng);
    const CVector x = orc::random_vector(6, rng);
    const CVector got = matched_filter_detect(h.col(2) * x[2], h);
    CHECK(std::abs(got[2] - x[2]) < 1e-12);
  }
}

TEST_CASE("one-tap OFDM equalizer") {
  Rng rng(2);
  const auto p = FrameParams::make(8, 4);
  const TFGrid y(orc::random_grid(8, 4, rng));
  CHECK(ofdm_onetap_detect(y, CMatrix::Ones(8, 4)).x.data == y.data);

  SUBCASE("gains are the diagonals of the TF blocks") {
    const auto ch = random_channel(3, p, rng);
    for (double eps : {0.0, 0.25, 0.4}) {
      const CMatrix g = ofdm_onetap_gains(ch, p, {eps});
      const auto blocks = ofdm_blocks_from_channel(ch, p, {eps});
      for (int n = 0; n < 4; ++n) CHECK(orc::max_abs(g.col(n) - blocks.h0[n].diagonal()) < 1e-12);
    }
  }
  SUBCASE("LTI channel with a whole-frame prefix is recovered exactly") {
    const auto p1 = FrameParams::make(8, 1);
    const UserChannel ch{0, {{cd(0.9, 0.1), 0, 0}, {cd(0.3, -0.2), 2, 0}}};
    const CVector x = orc::random_vector(8, rng);
    const CVector r = build_H_TD(ch, p1).matrix * heisenberg(x, p1);
    const TFGrid yt(unvec(wigner(r, p1), 8, 1));
    const CMatrix gains = build_H_TF(ch, p1).matrix.diagonal();
    CHECK(orc::max_abs(ofdm_onetap_detect(yt, gains).x.data.col(0) - x) < 1e-12);
  }
  SUBCASE("vanishing gains are erased") {
    CMatrix g = CMatrix::Ones(8, 4);
    g(3, 1) = 0.0;
    const auto out = ofdm_onetap_detect(y, g);
    CHECK(out.erasures == 1);
    CHECK(out.erased[3 + 8] == 1);
    CHECK(out.x(3, 1) == cd(0, 0));
  }
}

TEST_CASE("Zadoff-Chu pilot") {
  const CVector z4 = zc_pilot(4, 1);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(z4[m] - std::polar(1.0, kTwoPi * (m * m / 2.0) / 4.0)) < 1e-14);
  for (auto [M, u] : {std::pair{64, 1}, std::pair{64, 7}, std::pair{63, 5}, std::pair{17, 3}}) {
    const CVector z = zc_pilot(M, u);
    CHECK((z.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
    for (int lag = 1; lag < M; ++lag) {
      cd acc{};
      for (int m = 0; m < M; ++m) acc += z[m] * std::conj(z[(m + lag) % M]);
      CHECK(std::abs(acc) < 1e-10);
    }
  }
  CHECK_THROWS_AS(zc_pilot(64, 2), ConfigError);
}

TEST_CASE("pilot-aided estimation") {
  Rng rng(3);
  const int M = 64;
  const CVector pilot = zc_pilot(M, 1);

  SUBCASE("LS on a noiseless flat-in-slot channel") {
    const CVector h = orc::random_vector(M, rng);
    CHECK(orc::max_abs(ls_channel_estimate(h.cwiseProduct(pilot), pilot) - h) < 1e-14);
  }
  SUBCASE("LS error variance equals N0") {
    const double n0 = 0.2;
    double acc = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      CVector y = pilot;
      add_awgn(y, n0, rng);
      acc += (ls_channel_estimate(y, pilot) - CVector::Ones(M)).squaredNorm() / M;
    }
    CHECK(acc / trials == doctest::Approx(n0).epsilon(0.05));
  }

  const auto p = FrameParams::make(M, 4);
  CVector x_tf = CVector::Zero(p.size());
  x_tf.head(M) = pilot;
  x_tf.segment(M, M) = pilot;
  const CVector s = heisenberg(x_tf, p);

  SUBCASE("Moose without noise") {
    CHECK(std::abs(moose_cfo_estimate(s.head(M), s.segment(M, M))) < 1e-12);
    const CVector r = apply_cfo(0.7 * s, {0.25}, p);
    CHECK(std::abs(moose_cfo_estimate(r.head(M), r.segment(M, M)) - 0.25) < 1e-10);
    CHECK_THROWS_AS(moose_cfo_estimate(CVector::Zero(M), s.head(M)), ChannelError);
  }
  SUBCASE("Moose at 10 dB") {
    int good = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
      CVector r = apply_cfo(s, {0.25}, p);
      add_awgn(r, 0.1, rng);
      good += std::abs(moose_cfo_estimate(r.head(M), r.segment(M, M)) - 0.25) <= 0.02;
    }
    CHECK(good >= 950);
  }
  SUBCASE("compensation") {
    const CVector v = orc::random_vector(p.size(), rng);
    CHECK(orc::max_abs(cfo_compensate(apply_cfo(v, {0.37}, p), 0.37, p) - v) < 1e-12);
    CHECK(cfo_compensate(v, 0.0, p) == v);
    const CVector left = cfo_compensate(apply_cfo(v, {0.26}, p), 0.25, p);
    for (int q = 0; q < p.size(); q += 37) {
      const double ph = std::arg(left[q] / v[q]);
      CHECK(std::abs(std::remainder(ph - kTwoPi * 0.01 * q / M, kTwoPi)) < 1e-10);
    }
  }
}

namespace {

BerConfig small_ber(ProfileName profile, const FrameParams& p) {
  BerConfig cfg;
  cfg.frame = p;
  cfg.profile = builtin_profile(profile, p);
  cfg.snr_db = {15};
  cfg.epsilon = {0.5};
  cfg.frames = 20;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("BER sweep") {
  SUBCASE("noiseless unit channel is error free for every scheme") {
    const auto p = FrameParams::make(16, 8);
    BerConfig cfg;
    cfg.frame = p;
    cfg.profile.label = "unit";
    cfg.profile.taps = {{0.0, 0.0, Fading::kRiceanLos}};
    cfg.profile.delay_spread_s = 1e-6;
    cfg.snr_db = {150};
    cfg.epsilon = {0.0};
    cfg.frames = 4;
    for (auto mod : {Modulation::kQpsk, Modulation::kQam16}) {
      cfg.modulation = mod;
      for (const auto& r : ber_monte_carlo(cfg)) {
        CHECK(r.errors == 0);
        CHECK(r.bits > 0);
      }
    }
  }
  SUBCASE("rows, bit counts and frame-level agreement") {
    const auto p = FrameParams::make(16, 8);
    BerConfig cfg = small_ber(ProfileName::kNtnTdlB, p);
    cfg.snr_db = {5, 15};
    cfg.epsilon = {0.25, 0.5};
    cfg.frames = 6;
    const auto rows = ber_monte_carlo(cfg);
    REQUIRE(rows.size() == 12);
    CHECK(rows[0].epsilon == 0.25);
    CHECK(rows[0].snr_db == 5);
    CHECK(rows[1].scheme == BerScheme::kOfdmOnetap);
    CHECK(rows[3].snr_db == 15);
    for (const auto& r : rows) {
      const long per = r.scheme == BerScheme::kOfdmPractical ? 6 * 16 * 2 : 8 * 16 * 2;
      CHECK(r.bits == 6LL * per);
      long long bits = 0, errs = 0;
      for (long f = 0; f < 6; ++f) errs += ber_frame(cfg, r.scheme, r.snr_db, r.epsilon, f, &bits);
      CHECK(errs == r.errors);
      CHECK(bits == r.bits);
    }
    std::ostringstream os;
    write_ber_csv(os, rows);
    CHECK(os.str().rfind("scheme,snr_db,epsilon,frames,bits,errors,ber,seed\n", 0) == 0);
  }
  SUBCASE("bad configurations") {
    BerConfig cfg = small_ber(ProfileName::kNtnTdlB, FrameParams::make(16, 8));
    cfg.pilot_slots = 1;
    CHECK_THROWS_AS(ber_monte_carlo(cfg), ConfigError);
    cfg.pilot_slots = 2;
    cfg.zc_root = 4;
    CHECK_THROWS_AS(ber_monte_carlo(cfg), ConfigError);
  }
  SUBCASE("residual ICI leaves a floor for the genie one-tap receiver") {
    BerConfig cfg = small_ber(ProfileName::kNtnTdlB, FrameParams::make(16, 8));
    cfg.schemes = {BerScheme::kOfdmOnetap};
    cfg.snr_db = {60};
    CHECK(ber_monte_carlo(cfg)[0].ber > 1e-3);
  }
  SUBCASE("OTFS is insensitive to the CFO and beats the practical OFDM chain") {
    BerConfig cfg = small_ber(ProfileName::kNtnTdlB, FrameParams::make(64, 16));
    cfg.frames = 100;
    cfg.epsilon = {0.25, 0.3, 0.4, 0.5};
    cfg.schemes = {BerScheme::kOtfsLmmse, BerScheme::kOfdmPractical};
    const auto rows = ber_monte_carlo(cfg);
    std::vector<double> otfs;
    for (const auto& r : rows) {
      if (r.scheme == BerScheme::kOtfsLmmse) otfs.push_back(r.ber);
    }
    const double lo = *std::min_element(otfs.begin(), otfs.end());
    const double hi = *std::max_element(otfs.begin(), otfs.end());
    CHECK(lo > 0.0);
    CHECK((hi - lo) / lo < 0.2);
    CHECK(rows.back().scheme == BerScheme::kOfdmPractical);
    CHECK(rows.back().ber >= 10.0 * rows[rows.size() - 2].ber);
  }
}
