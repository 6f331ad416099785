#include "aqmsim/pbs.hpp"

#include <algorithm>
#include <string>

#include "aqmsim/error.hpp"

namespace aqmsim::pbs {

PbsThresholds::PbsThresholds(std::size_t capacity, std::vector<std::size_t> thresholds)
    : capacity_(capacity), thresholds_(std::move(thresholds)) {
  if (capacity_ < 1) throw ConfigError("capacity must be at least 1", "capacity");
  if (thresholds_.empty()) throw ConfigError("at least one threshold is required", "thresholds");
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    if (thresholds_[i] == 0) throw ConfigError("thresholds must be positive", "thresholds");
    if (i > 0 && thresholds_[i] > thresholds_[i - 1]) {
      throw ConfigError("thresholds must be non-increasing", "thresholds");
    }
  }
  if (thresholds_.front() != capacity_) {
    throw ConfigError("the first threshold must equal the capacity", "thresholds");
  }
}

std::size_t PbsThresholds::threshold(std::size_t class_index) const {
  if (class_index < 1 || class_index > thresholds_.size()) {
    throw ConfigError("class index " + std::to_string(class_index) + " out of range 1.." +
                          std::to_string(thresholds_.size()),
                      "priority");
  }
  return thresholds_[class_index - 1];
}

bool pbs_admit(std::size_t class_index, std::size_t total_occupancy,
               const PbsThresholds& thresholds) {
  return total_occupancy < thresholds.threshold(class_index);
}

double offered_share(std::span<const ClassTraffic> classes, std::size_t index) {
  double total = 0.0;
  for (const auto& c : classes) total += c.offered_load();
  return classes[index].offered_load() / total;
}

void validate_classes(std::span<const ClassTraffic> classes, const PbsThresholds& thresholds) {
  if (classes.empty()) throw ConfigError("at least one traffic class is required", "sources");
  std::vector<std::size_t> seen;
  for (const auto& c : classes) {
    thresholds.threshold(c.priority);
    if (std::find(seen.begin(), seen.end(), c.priority) != seen.end()) {
      throw ConfigError("class priorities must be unique", "priority");
    }
    seen.push_back(c.priority);
  }
}

}  // namespace aqmsim::pbs
