#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "aqmsim/error.hpp"

namespace aqmsim::pbs {

/// Probability mass over total queue occupancy 0..N.
template <typename Scalar = double>
class QueueDistribution {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit QueueDistribution(Vector mass, Scalar tolerance = Scalar(1e-10)) : mass_(std::move(mass)) {
    if (mass_.size() == 0) throw ParameterError("distribution must have at least one state");
    if ((mass_.array() < Scalar(0)).any()) throw ParameterError("distribution has negative mass");
    using std::abs;
    if (abs(mass_.sum() - Scalar(1)) > tolerance) {
      throw ParameterError("distribution does not sum to one");
    }
  }

  std::size_t capacity() const noexcept { return static_cast<std::size_t>(mass_.size() - 1); }
  Scalar operator()(std::size_t k) const { return mass_(static_cast<Eigen::Index>(k)); }
  const Vector& mass() const noexcept { return mass_; }

  Scalar mean() const {
    return mass_.dot(Vector::LinSpaced(mass_.size(), Scalar(0), Scalar(mass_.size() - 1)));
  }

 private:
  Vector mass_;
};

/// Shannon entropy in nats, with 0 ln 0 = 0.
template <typename Scalar>
Scalar entropy(const QueueDistribution<Scalar>& dist) {
  using std::log;
  Scalar h(0);
  for (Eigen::Index k = 0; k < dist.mass().size(); ++k) {
    const Scalar p = dist.mass()(k);
    if (p > Scalar(0)) h -= p * log(p);
  }
  return h;
}

}  // namespace aqmsim::pbs
