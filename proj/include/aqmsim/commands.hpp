#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "aqmsim/config.hpp"
#include "aqmsim/validate.hpp"

namespace aqmsim::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2, kValidationFailure = 3 };

/// Command-line overrides; each mirrors a config key.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::optional<std::string> out;
};

void apply_overrides(Scenario& scenario, const Overrides& overrides);

/// Writes the CSV for a single scenario to `csv`. Scenarios with a sweep
/// are rejected.
int cmd_run(const Scenario& scenario, std::ostream& csv, std::ostream& diag);

/// One row group per sweep value, in sweep order.
int cmd_sweep(const Scenario& scenario, std::ostream& csv, std::ostream& diag);

int cmd_validate(std::ostream& out, bool json, const ValidationOptions& options = {});

}  // namespace aqmsim::cli
