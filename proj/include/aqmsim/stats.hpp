#pragma once

#include <cstddef>
#include <span>

namespace aqmsim::stats {

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
  double half_width = 0.0;  // two-sided confidence half-width
};

/// Two-sided Student-t critical value for `confidence` with `dof` degrees of freedom.
double t_critical(std::size_t dof, double confidence = 0.95);

/// Sample mean, standard error and t-based half-width; zero spread for n < 2.
Summary summarize(std::span<const double> samples, double confidence = 0.95);

/// True when the two intervals [mean +- half_width] do not intersect.
bool separated(const Summary& a, const Summary& b) noexcept;

}  // namespace aqmsim::stats
