// aqmsim: run, sweep and validate queue-management scenarios.
//
//   aqmsim run scenario.json [--seed N] [--replications N] [--out file.csv]
//   aqmsim sweep scenario.json [--seed N] [--replications N] [--out file.csv]
//   aqmsim validate [--json]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aqmsim/blocking.hpp"
#include "aqmsim/commands.hpp"
#include "aqmsim/error.hpp"

namespace {

using namespace aqmsim::cli;

int run_scenario_command(const std::string& path, const Overrides& overrides, bool sweep) {
  Scenario scenario;
  try {
    scenario = load_config(path);
    apply_overrides(scenario, overrides);
  } catch (const aqmsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  std::ostringstream csv;
  const int code = sweep ? cmd_sweep(scenario, csv, std::cerr) : cmd_run(scenario, csv, std::cerr);
  if (code != kOk) return code;
  if (scenario.output.empty()) {
    std::cout << csv.str();
    return kOk;
  }
  std::ofstream file(scenario.output, std::ios::binary);
  if (!(file << csv.str())) {
    std::cerr << "runtime error: cannot write '" << scenario.output << "'\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Queue-management simulator and exact solvers"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::string out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "Scenario file (JSON, schema_version 1)")->required();
    cmd->add_option("--seed", seed, "Master seed (overrides config and AQMSIM_SEED)");
    cmd->add_option("--replications", replications, "Independent replications");
    cmd->add_option("--out", out, "CSV output path (default: config output or stdout)");
  };
  auto* run = app.add_subcommand("run", "Run one scenario and write CSV");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
  add_common(sweep);
  auto* validate = app.add_subcommand("validate", "Run the built-in oracle battery");
  bool json = false;
  bool corrupt_blocking = false;
  validate->add_flag("--json", json, "Machine-readable results");
  validate->add_flag("--corrupt-blocking", corrupt_blocking, "Harness self-test")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  auto collect = [&](CLI::App* cmd) {
    if (cmd->count("--seed")) overrides.seed = seed;
    if (cmd->count("--replications")) overrides.replications = replications;
    if (cmd->count("--out")) overrides.out = out;
  };
  if (*run) {
    collect(run);
    return run_scenario_command(config_path, overrides, false);
  }
  if (*sweep) {
    collect(sweep);
    return run_scenario_command(config_path, overrides, true);
  }
  ValidationOptions options;
  if (corrupt_blocking) {
    // Off-by-one exponent: every term sees one extra free place.
    options.blocking = [](const aqmsim::pbs::QueueDistribution<double>& d, double sigma, double share,
                          std::size_t threshold) {
      return aqmsim::pbs::blocking_probability(d, sigma, share, threshold + 1);
    };
  }
  return cmd_validate(std::cout, json, options);
}
