#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "aqmsim/distribution.hpp"
#include "aqmsim/pbs.hpp"

namespace aqmsim::pbs {

/// Censored GE blocking probability of one class:
///
///   pi_i = sum_k delta_i(k) * sigma_i^[N_i - k]^+ * P(k)
///
/// where sigma_i is the batch continuation probability of the class's GE
/// arrivals (0 for Poisson traffic), so sigma^m is the chance that an
/// arbitrary batch member sits beyond m free places. delta_i(0) =
/// r/(r*sigma + 1 - sigma) corrects the empty-queue term, delta_i(k) = 1
/// otherwise; r is the class's utilisation share.
template <typename Scalar>
Scalar blocking_probability(const QueueDistribution<Scalar>& dist, Scalar sigma, Scalar share,
                            std::size_t threshold) {
  if (!(sigma >= Scalar(0) && sigma < Scalar(1))) {
    throw ParameterError("batch continuation probability must lie in [0, 1)");
  }
  if (!(share > Scalar(0) && share <= Scalar(1))) {
    throw ParameterError("utilisation share must lie in (0, 1]");
  }
  using std::pow;
  Scalar total(0);
  for (std::size_t k = 0; k <= dist.capacity(); ++k) {
    const std::size_t room = threshold > k ? threshold - k : 0;
    const Scalar delta = k == 0 ? share / (share * sigma + Scalar(1) - sigma) : Scalar(1);
    total += delta * pow(sigma, Scalar(room)) * dist(k);
  }
  return std::clamp(total, Scalar(0), Scalar(1));
}

/// Blocking of `classes[index]` using its GE arrival burstiness, its
/// threshold and its offered-load share (unless `share_override` > 0).
template <typename Scalar>
Scalar blocking_probability(const QueueDistribution<Scalar>& dist,
                            std::span<const ClassTraffic> classes, std::size_t index,
                            const PbsThresholds& thresholds, Scalar share_override = Scalar(0)) {
  const auto& cls = classes[index];
  const Scalar share = share_override > Scalar(0) ? share_override
                                                  : Scalar(offered_share(classes, index));
  return blocking_probability(dist, Scalar(cls.arrival.sigma()), share,
                              thresholds.threshold(cls.priority));
}

}  // namespace aqmsim::pbs
