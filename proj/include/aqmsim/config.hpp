#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aqmsim/sim.hpp"

namespace aqmsim::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSeedEnvVar = "AQMSIM_SEED";

/// Re-run the scenario once per value, substituting it at `parameter`
/// (a dotted path such as "policy.thresholds.1").
struct Sweep {
  std::string parameter;
  std::vector<double> values;
};

struct Scenario {
  std::string name;
  sim::SimConfig sim;
  std::optional<Sweep> sweep;
  std::string output;
  // Where the seed came from: "config", "env", "default" or "flag".
  std::string seed_source = "config";
  nlohmann::json document;
};

/// Parses and validates a JSON scenario. Unknown keys are errors. Throws
/// ConfigError with line/column for syntax errors and the offending key
/// for validation errors.
Scenario parse_config(std::string_view text);

Scenario load_config(const std::string& path);

/// Seed of sweep point `index`, independent of the replication seeds.
std::uint64_t sweep_seed(std::uint64_t master, std::size_t index) noexcept;

/// The simulation config for sweep point `index`: the sweep parameter set
/// to its value and the seed replaced by sweep_seed().
sim::SimConfig sweep_point(const Scenario& scenario, std::size_t index);

}  // namespace aqmsim::cli
