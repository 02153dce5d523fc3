#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "switchsim/switchsim.hpp"

namespace {

std::vector<double> parse_dwell_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw switchsim::ConfigError("--dwells", "not a number: '" + item + "'");
    }
    if (used != item.size() || !std::isfinite(v) || !(v > 0.0)) {
      throw switchsim::ConfigError("--dwells", "expected positive numbers, got '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

switchsim::RunConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  auto cfg = switchsim::load_run_config(path);
  if (seed) cfg.seed = seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched-system simulator and periodic-orbit stability analyzer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string dwells_text;
  std::optional<std::uint64_t> seed;

  auto* simulate = app.add_subcommand("simulate", "Integrate the configured switched system");
  simulate->add_option("--config", config_path, "Run configuration (JSON)")->required();
  simulate->add_option("--out", out_path, "Trajectory output path (overrides config)");
  simulate->add_option("--seed", seed, "Seed for stochastic schedules");

  auto* analyze = app.add_subcommand("analyze", "Linearized stability report (JSON)");
  analyze->add_option("--config", config_path, "Run configuration (JSON)")->required();
  analyze->add_option("--dwells", dwells_text, "Comma-separated dwells for the Floquet analysis");

  auto* sweep = app.add_subcommand("sweep", "Convergence and Floquet sweep over dwell times (CSV)");
  sweep->add_option("--config", config_path, "Run configuration (JSON)")->required();
  sweep->add_option("--dwells", dwells_text, "Comma-separated dwell times")->required();
  sweep->add_option("--out", out_path, "CSV output path (default: stdout)");
  sweep->add_option("--seed", seed, "Seed for stochastic schedules");

  bool inject_literal = false;
  int samples = 1000;
  auto* check = app.add_subcommand("check", "Run the built-in invariant suite");
  check->add_option("--samples", samples, "Samples per check")->check(CLI::PositiveNumber);
  check->add_flag("--inject-literal-family", inject_literal,
                  "Add a d=2 family with the unscaled inner coupling (expected to fail continuity)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : switchsim::kExitInvalid;
  }

  try {
    if (*simulate) {
      switchsim::SimulateOptions opts;
      if (!out_path.empty()) opts.out = out_path;
      return switchsim::cmd_simulate(load(config_path, seed), opts, std::cerr);
    }
    if (*analyze) {
      const auto cfg = load(config_path, std::nullopt);
      return switchsim::cmd_analyze(cfg, parse_dwell_list(dwells_text), std::cout);
    }
    if (*sweep) {
      const auto cfg = load(config_path, seed);
      const auto dwells = parse_dwell_list(dwells_text);
      if (dwells.empty()) throw switchsim::ConfigError("--dwells", "must not be empty");
      std::optional<std::string> out;
      if (!out_path.empty()) out = out_path;
      return switchsim::cmd_sweep(cfg, dwells, out, std::cout, std::cerr);
    }
    if (*check) {
      switchsim::CheckOptions opts;
      opts.samples = samples;
      if (inject_literal) opts.systems.push_back(switchsim::literal_coupling_family());
      return switchsim::cmd_check(opts, std::cout);
    }
  } catch (const switchsim::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return switchsim::kExitInvalid;
  }
  return switchsim::kExitInvalid;
}
