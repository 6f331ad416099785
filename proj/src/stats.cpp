#include "aqmsim/stats.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

namespace aqmsim::stats {

double t_critical(std::size_t dof, double confidence) {
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.5 + confidence / 2.0);
}

Summary summarize(std::span<const double> samples, double confidence) {
  Summary s;
  const std::size_t n = samples.size();
  if (n == 0) return s;
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(n);
  if (n < 2) return s;
  double ss = 0.0;
  for (double x : samples) ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  s.std_error = sd / std::sqrt(static_cast<double>(n));
  s.half_width = t_critical(n - 1, confidence) * s.std_error;
  return s;
}

bool separated(const Summary& a, const Summary& b) noexcept {
  return a.mean + a.half_width < b.mean - b.half_width ||
         b.mean + b.half_width < a.mean - a.half_width;
}

}  // namespace aqmsim::stats
