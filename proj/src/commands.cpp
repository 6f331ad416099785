#include "aqmsim/commands.hpp"

#include <exception>
#include <sstream>

#include "aqmsim/csv.hpp"
#include "aqmsim/error.hpp"
#include "aqmsim/sim.hpp"

namespace aqmsim::cli {

void apply_overrides(Scenario& scenario, const Overrides& overrides) {
  if (overrides.seed) {
    scenario.sim.seed = *overrides.seed;
    scenario.seed_source = "flag";
  }
  if (overrides.replications) {
    if (*overrides.replications < 1) throw ConfigError("replications must be at least 1", "replications");
    scenario.sim.replications = *overrides.replications;
  }
  if (overrides.out) scenario.output = *overrides.out;
}

namespace {

CsvContext context_of(const Scenario& s) {
  CsvContext ctx{s.name, s.sim.seed, s.seed_source, std::nullopt};
  if (s.sweep) ctx.sweep_parameter = s.sweep->parameter;
  return ctx;
}

}  // namespace

int cmd_run(const Scenario& scenario, std::ostream& csv, std::ostream& diag) {
  if (scenario.sweep) {
    diag << "error: scenario '" << scenario.name << "' defines a sweep; use the sweep command\n";
    return kConfigError;
  }
  try {
    const auto report = sim::run_replications(scenario.sim, scenario.sim.replications);
    csv << csv_header(false);
    write_report_rows(csv, report, context_of(scenario));
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    diag << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

int cmd_sweep(const Scenario& scenario, std::ostream& csv, std::ostream& diag) {
  if (!scenario.sweep) {
    diag << "error: scenario '" << scenario.name << "' has no sweep section\n";
    return kConfigError;
  }
  try {
    const auto ctx = context_of(scenario);
    std::string buffer = csv_header(true);
    for (std::size_t i = 0; i < scenario.sweep->values.size(); ++i) {
      const auto cfg = sweep_point(scenario, i);
      const auto report = sim::run_replications(cfg, cfg.replications);
      std::ostringstream rows;
      write_report_rows(rows, report, ctx, scenario.sweep->values[i]);
      buffer += rows.str();
    }
    csv << buffer;
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    diag << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

int cmd_validate(std::ostream& out, bool json, const ValidationOptions& options) {
  std::vector<CheckResult> results;
  try {
    results = run_validation(options);
  } catch (const std::exception& e) {
    out << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  if (json) {
    print_json(out, results);
  } else {
    print_table(out, results);
  }
  return all_passed(results) ? kOk : kValidationFailure;
}

}  // namespace aqmsim::cli
