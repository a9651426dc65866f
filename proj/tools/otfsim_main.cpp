// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// otfsim <experiment> [--config F] [--seed S] [--out DIR] [--profile P] [--set key=value]...

#include "otfsim/sim.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

int exit_code(otfsim::ErrorCategory c) {
  switch (c) {
    case otfsim::ErrorCategory::kConfig: return 2;
    case otfsim::ErrorCategory::kDimension: return 3;
    case otfsim::ErrorCategory::kChannel: return 4;
    case otfsim::ErrorCategory::kSolver: return 5;
    case otfsim::ErrorCategory::kIo: return 6;
  }
  return 1;
}

const char* category_name(otfsim::ErrorCategory c) {
  switch (c) {
    case otfsim::ErrorCategory::kConfig: return "config";
    case otfsim::ErrorCategory::kDimension: return "dimension";
    case otfsim::ErrorCategory::kChannel: return "channel";
    case otfsim::ErrorCategory::kSolver: return "solver";
    case otfsim::ErrorCategory::kIo: return "io";
  }
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiuser OTFS / OFDM link and resource-allocation experiments"};
  app.set_version_flag("--version", otfsim::version_string());
  app.require_subcommand(1, 1);

  std::string config_path, out_dir = ".", profile;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  bool print_config = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--profile", profile, "channel profile")->check(CLI::IsMember({"ntn-tdl-b", "ntn-tdl-d"}));
    sub->add_option("--set", overrides, "extra key=value setting, applied after the config file");
    sub->add_flag("--print-config", print_config, "print the resolved config and exit");
  };

  struct Experiment {
    const char* name;
    const char* help;
    otfsim::ExperimentReport (*run)(const otfsim::ScenarioConfig&);
  };
  const Experiment experiments[] = {
      {"sumrate-oma", "sum rate of the orthogonal layouts versus SNR", otfsim::run_sumrate_oma},
      {"sumrate-cfo", "OTFS and OFDM sum rate versus CFO", otfsim::run_sumrate_cfo},
      {"ber", "Monte-Carlo BER of the detection chains", otfsim::run_ber},
      {"optimize", "penalty CCP allocation against the OMA baselines", otfsim::run_optimizer},
  };
  std::vector<CLI::App*> subs;
  for (const auto& e : experiments) {
    subs.push_back(app.add_subcommand(e.name, e.help));
    add_common(subs.back());
  }

  CLI11_PARSE(app, argc, argv);

  try {
    otfsim::ScenarioConfig cfg = config_path.empty() ? otfsim::ScenarioConfig{} : otfsim::load_config_file(config_path);
    for (const auto& kv : overrides) otfsim::apply_config_line(cfg, kv, "--set");
    if (!profile.empty()) cfg.profile = otfsim::parse_profile_name(profile);
    if (app.get_subcommands().front()->count("--seed") > 0) cfg.seed = seed;
    cfg.validate();
    if (print_config) {
      otfsim::write_config(std::cout, cfg);
      return 0;
    }
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (!subs[k]->parsed()) continue;
      const auto report = experiments[k].run(cfg);
      otfsim::emit_report(report, cfg, out_dir);
      std::cerr << report.id << ": " << report.rows.size() << " rows written to " << out_dir << "\n";
    }
  } catch (const otfsim::Error& e) {
    std::cerr << "otfsim: " << category_name(e.category()) << " error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "otfsim: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
