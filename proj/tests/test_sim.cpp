// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "otfsim/sim.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace otfsim;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return load_config(in, "test.cfg");
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ScenarioConfig quick() {
  return parse(
      "M = 16\nN = 8\nrealizations = 3\nsnr_db = 0, 20\nepsilon = 0.25, 0.5\n"
      "ber_frames = 3\nber_snr_db = 10\nopt_M = 4\nopt_N = 4\nopt_K = 4\n"
      "opt_realizations = 1\nopt_snr_db = 10\nccp_m_max = 4\n");
}

}  // namespace

TEST_CASE("defaults describe the LEO system table") {
  const ScenarioConfig c = parse("");
  CHECK(c.frame.M == 64);
  CHECK(c.frame.N == 16);
  CHECK(c.K == 4);
  CHECK(c.frame.delta_f == 15e3);
  CHECK(c.constants.carrier_hz == 2e9);
  CHECK(c.constants.satellite_height_m == 1500e3);
  CHECK(c.epsilon.front() == 0.25);
  CHECK(c.epsilon.back() == 0.5);
  CHECK(c.realizations == 100);
  CHECK(c.optimizer.ccp.init == CcpInit::kDdma);
}

TEST_CASE("strict parsing") {
  CHECK_THROWS_WITH_AS(parse("M = 16\nfoo = 1\n"), doctest::Contains("'foo'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("M = 16\nfoo = 1\n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(parse("M = sixteen\n"), ConfigError);
  CHECK_THROWS_AS(parse("M\n"), ConfigError);
  CHECK_THROWS_AS(parse("profile = tdl-z\n"), ConfigError);
  CHECK_THROWS_AS(parse("epsilon = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/otfsim.cfg"), IoError);

  const ScenarioConfig c = parse("# comment\n\nprofile = ntn-tdl-b  # trailing\nsnr_db = 1 2 3\nmodulation = 16QAM\n");
  CHECK(c.profile == ProfileName::kNtnTdlB);
  CHECK(c.snr_db == std::vector<double>{1, 2, 3});
  CHECK(c.ber.modulation == Modulation::kQam16);
}

TEST_CASE("canonical text round trip") {
  ScenarioConfig c = parse("M = 32\nseed = 77\nepsilon = 0.125, 0.25\nmax_doppler_hz = 1234.5\nccp_init = best-oma\n");
  std::ostringstream a;
  write_config(a, c);
  std::istringstream in(a.str());
  const ScenarioConfig back = load_config(in);
  std::ostringstream b;
  write_config(b, back);
  CHECK(a.str() == b.str());
  CHECK(config_hash(c) == config_hash(back));
  CHECK(back.max_doppler_hz == 1234.5);
  CHECK(back.optimizer.ccp.init == CcpInit::kBestOma);
  apply_config_line(c, "seed = 78", "--set");
  CHECK(config_hash(c) != config_hash(back));
}

TEST_CASE("scenario channels are tied to (seed, realization, user)") {
  const ScenarioConfig c = quick();
  const auto prof = scenario_profile(c, c.frame);
  const auto a = scenario_channels(c, prof, c.frame, 4, 2);
  const auto b = scenario_channels(c, prof, c.frame, 4, 2);
  const auto d = scenario_channels(c, prof, c.frame, 4, 3);
  REQUIRE(a.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(a[i].paths[0].gain == b[i].paths[0].gain);
    CHECK(a[i].paths[0].gain != d[i].paths[0].gain);
  }
}

TEST_CASE("experiment reports") {
  const ScenarioConfig c = quick();

  SUBCASE("OMA sweep") {
    const auto rep = run_sumrate_oma(c);
    CHECK(rep.rows.size() == 2 * 4);
    for (const auto& row : rep.rows) CHECK(row.back() == std::to_string(c.seed));
    CHECK(std::stod(rep.rows[4][2]) > std::stod(rep.rows[0][2]));
  }
  SUBCASE("CFO sweep") {
    const auto rep = run_sumrate_cfo(c);
    CHECK(rep.rows.size() == 2 * 2 * 3);
    // ideal bound at 20 dB: every block at the full SNR
    const double want = 0.5 * 16 * 8 * std::log2(1.0 + 100.0);
    CHECK(std::stod(rep.rows[5][3]) == doctest::Approx(want).epsilon(1e-9));
  }
  SUBCASE("BER") {
    const auto rep = run_ber(c);
    CHECK(rep.rows.size() == 1 * 2 * 3);
  }
  SUBCASE("optimizer") {
    const auto rep = run_optimizer(c);
    CHECK(rep.rows.size() == 1 * 5);
    CHECK(rep.rows[0][1] == "CCP");
    REQUIRE(rep.attachments.size() == 1);
  }
  SUBCASE("fractional Doppler shift is rejected") {
    ScenarioConfig bad = c;
    apply_config_line(bad, "epsilon_fixed = 0.3", "--set");
    CHECK_THROWS_AS(run_sumrate_oma(bad), ConfigError);
  }
}

TEST_CASE("ideal channel: OTFS and OFDM rates coincide") {
  const auto p = FrameParams::make(16, 8);
  const auto mask = ddma_mask(p, 4);
  std::vector<UserChannel> ch;
  std::vector<OfdmBlocks> blocks;
  for (int i = 0; i < 4; ++i) {
    ch.push_back({i, {Path{}}});
    blocks.push_back(ofdm_blocks_from_channel(ch.back(), p));
  }
  const double n0 = LinkBudget::from_snr_db(1.0, 12.0, p).N0;
  const double otfs = otfs_sum_rate(uniform_power(mask, 1.0), ch, n0);
  const double ofdm = ofdm_sum_rate(uniform_power(mask, 1.0, Domain::kTF), blocks, n0);
  CHECK(otfs == doctest::Approx(ofdm).epsilon(1e-12));
}

TEST_CASE("reports on disk are reproducible") {
  const ScenarioConfig c = quick();
  const auto dir = std::filesystem::temp_directory_path() / "otfsim_test_reports";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir / "a");
  std::filesystem::create_directories(dir / "b");
  emit_report(run_sumrate_oma(c), c, (dir / "a").string());
  emit_report(run_sumrate_oma(c), c, (dir / "b").string());
  const std::string a = slurp(dir / "a" / "sumrate-oma.csv");
  CHECK(!a.empty());
  CHECK(a == slurp(dir / "b" / "sumrate-oma.csv"));
  const std::string meta = slurp(dir / "a" / "sumrate-oma.meta");
  CHECK(meta.find("seed = 1") != std::string::npos);
  CHECK(meta.find("config_hash = fnv1a64:") != std::string::npos);
  std::ofstream(dir / "plain") << "x";
  CHECK_THROWS_AS(emit_report(run_sumrate_oma(c), c, (dir / "plain" / "sub").string()), IoError);
  std::filesystem::remove_all(dir);
}
