#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aqmsim/traffic.hpp"

namespace aqmsim::pbs {

/// Descending admission thresholds N_1 >= N_2 >= ... >= N_R > 0 of a
/// partial-buffer-sharing queue. N_1 always equals the buffer capacity.
class PbsThresholds {
 public:
  /// Throws ConfigError when the sequence is empty, not non-increasing,
  /// contains a zero, or N_1 != capacity.
  PbsThresholds(std::size_t capacity, std::vector<std::size_t> thresholds);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t classes() const noexcept { return thresholds_.size(); }
  /// Threshold of class `class_index` (1-based). Throws ConfigError when out of range.
  std::size_t threshold(std::size_t class_index) const;
  std::span<const std::size_t> values() const noexcept { return thresholds_; }

 private:
  std::size_t capacity_;
  std::vector<std::size_t> thresholds_;
};

/// Traffic of one priority class. Priority 1 is the highest (delay-sensitive).
struct ClassTraffic {
  traffic::GEParams arrival;
  traffic::GEParams service;
  std::size_t priority = 1;

  double offered_load() const noexcept { return arrival.rate() / service.rate(); }
};

/// A class-i job may join iff the total occupancy is below N_i.
bool pbs_admit(std::size_t class_index, std::size_t total_occupancy,
               const PbsThresholds& thresholds);

/// Class i's share of the offered load, (lambda_i/mu_i) / sum_j(lambda_j/mu_j).
double offered_share(std::span<const ClassTraffic> classes, std::size_t index);

/// Throws ConfigError when priorities are not unique or exceed the
/// number of thresholds.
void validate_classes(std::span<const ClassTraffic> classes, const PbsThresholds& thresholds);

}  // namespace aqmsim::pbs
