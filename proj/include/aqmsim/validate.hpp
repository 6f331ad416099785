#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "aqmsim/distribution.hpp"

namespace aqmsim::cli {

enum class CheckStatus { Pass, Fail, Finding };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Blocking formula under test: (distribution, batch continuation sigma,
/// utilisation share, class threshold) -> loss probability.
using BlockingFormula =
    std::function<double(const pbs::QueueDistribution<double>&, double, double, std::size_t)>;

struct ValidationOptions {
  // Replaces the blocking formula; used to self-test the harness.
  BlockingFormula blocking;
};

/// The built-in oracle battery: closed forms, CTMC vs simulation, maximum
/// entropy properties and the blocking formula.
std::vector<CheckResult> run_validation(const ValidationOptions& options = {});

bool all_passed(const std::vector<CheckResult>& results) noexcept;

void print_table(std::ostream& out, const std::vector<CheckResult>& results);
void print_json(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace aqmsim::cli
