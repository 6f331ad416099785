#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "aqmsim/sim.hpp"

namespace aqmsim::cli {

/// Row metadata; every row carries enough to reproduce itself.
struct CsvContext {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string seed_source = "config";
  std::optional<std::string> sweep_parameter;  // set for sweep output
};

/// Scientific notation with 12 significant digits, independent of locale.
std::string format_number(double value);

std::string csv_header(bool sweep);

/// One row per source ("1".."S") followed by the aggregate row ("all").
void write_report_rows(std::ostream& out, const sim::MetricsReport& report, const CsvContext& ctx,
                       std::optional<double> sweep_value = std::nullopt);

}  // namespace aqmsim::cli
