#pragma once

// Maximum-entropy distribution of total queue occupancy 0..N subject to
// moment constraints. The solution has the product form
//
//   P(k) = (1/Z) * g^[k>0] * x^k * y^[k=N]
//
// where g, x and y are the exponentiated Lagrange multipliers of the
// server-busy, mean-queue-length and full-buffer constraints. The
// multipliers are found by damped Newton iteration on the convex dual.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aqmsim/distribution.hpp"
#include "aqmsim/error.hpp"

namespace aqmsim::pbs {

/// Constraint values. Per-class entries are summed into aggregate features
/// (busy probability, mean occupancy); an empty vector drops the family.
struct MeConstraints {
  std::vector<double> utilization;
  std::vector<double> mean_queue_length;
  std::optional<double> full_buffer_prob;
};

template <typename Scalar = double>
struct MeSolution {
  QueueDistribution<Scalar> distribution;
  Scalar g = Scalar(1);  // busy-state coefficient
  Scalar x = Scalar(1);  // per-packet coefficient
  Scalar y = Scalar(1);  // full-buffer coefficient
  int iterations = 0;
  Scalar max_residual = Scalar(0);
};

struct MeOptions {
  double tolerance = 1e-11;
  int max_iterations = 500;
};

namespace detail {

inline double me_sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Throws InfeasibleError for constraint sets no distribution on 0..N meets.
inline void me_check_feasible(const MeConstraints& c, std::size_t capacity) {
  const double n = static_cast<double>(capacity);
  auto fail = [](const std::string& what, double by) { throw InfeasibleError(what, by); };
  for (double u : c.utilization) {
    if (!(u >= 0.0 && u <= 1.0)) fail("utilization constraint outside [0, 1]", u < 0.0 ? -u : u - 1.0);
  }
  for (double l : c.mean_queue_length) {
    if (!(l >= 0.0 && l <= n)) fail("mean queue length constraint outside [0, N]", l < 0.0 ? -l : l - n);
  }
  const bool has_u = !c.utilization.empty();
  const bool has_l = !c.mean_queue_length.empty();
  const double u = me_sum(c.utilization);
  const double l = me_sum(c.mean_queue_length);
  if (has_u && u > 1.0) fail("total utilization exceeds 1", u - 1.0);
  if (has_l && l > n) fail("total mean queue length exceeds N", l - n);
  if (c.full_buffer_prob) {
    const double f = *c.full_buffer_prob;
    if (!(f >= 0.0 && f <= 1.0)) fail("full-buffer probability outside [0, 1]", f < 0.0 ? -f : f - 1.0);
    if (has_u && f > u) fail("full-buffer probability exceeds utilization", f - u);
    if (has_l && l < n * f) fail("mean queue length below N * P(full)", n * f - l);
    if (has_u && has_l && l < u + (n - 1.0) * f) {
      fail("mean queue length below P(busy) + (N-1) * P(full)", u + (n - 1.0) * f - l);
    }
  }
  if (has_u && has_l) {
    if (l < u) fail("mean queue length below utilization", u - l);
    if (l > n * u) fail("mean queue length above N * utilization", l - n * u);
  }
}

}  // namespace detail

/// Entropy-maximising distribution on {0..capacity} meeting `constraints`.
/// Throws InfeasibleError when no distribution satisfies them and
/// ConvergenceError when Newton iteration stalls.
template <typename Scalar = double>
MeSolution<Scalar> me_distribution(const MeConstraints& constraints, std::size_t capacity,
                                   const MeOptions& options = {}) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (capacity < 1) throw ParameterError("capacity must be at least 1");
  detail::me_check_feasible(constraints, capacity);

  const Eigen::Index states = static_cast<Eigen::Index>(capacity + 1);
  enum Family { kBusy, kMean, kFull };
  std::vector<Family> families;
  std::vector<Scalar> targets;
  if (!constraints.utilization.empty()) {
    families.push_back(kBusy);
    targets.push_back(Scalar(detail::me_sum(constraints.utilization)));
  }
  if (!constraints.mean_queue_length.empty()) {
    families.push_back(kMean);
    targets.push_back(Scalar(detail::me_sum(constraints.mean_queue_length)));
  }
  if (constraints.full_buffer_prob) {
    families.push_back(kFull);
    targets.push_back(Scalar(*constraints.full_buffer_prob));
  }

  const Eigen::Index m = static_cast<Eigen::Index>(families.size());
  Matrix features(states, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < states; ++k) {
      switch (families[static_cast<std::size_t>(j)]) {
        case kBusy: features(k, j) = k > 0 ? Scalar(1) : Scalar(0); break;
        case kMean: features(k, j) = Scalar(k); break;
        case kFull: features(k, j) = k == states - 1 ? Scalar(1) : Scalar(0); break;
      }
    }
  }
  const Vector target = Eigen::Map<const Vector>(targets.data(), m);

  using std::exp;
  using std::log;
  auto probabilities = [&](const Vector& lambda) {
    Vector logits = features * lambda;
    const Scalar peak = m > 0 ? logits.maxCoeff() : Scalar(0);
    Vector p = (logits.array() - peak).exp().matrix();
    return Vector(p / p.sum());
  };
  // Convex dual: log Z(lambda) - lambda . target.
  auto dual = [&](const Vector& lambda) {
    Vector logits = features * lambda;
    const Scalar peak = m > 0 ? logits.maxCoeff() : Scalar(0);
    return peak + log((logits.array() - peak).exp().sum()) - lambda.dot(target);
  };

  Vector lambda = Vector::Zero(m);
  Vector p = probabilities(lambda);
  Scalar residual(0);
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Vector moments = features.transpose() * p;
    const Vector grad = moments - target;
    residual = m > 0 ? grad.cwiseAbs().maxCoeff() : Scalar(0);
    if (residual < Scalar(options.tolerance)) break;

    Matrix hessian = features.transpose() * p.asDiagonal() * features - moments * moments.transpose();
    hessian.diagonal().array() += Scalar(1e-14);
    const Vector step = hessian.completeOrthogonalDecomposition().solve(-grad);

    const Scalar base = dual(lambda);
    const Scalar slope = grad.dot(step);
    Scalar t(1);
    Vector trial = lambda + step;
    while (dual(trial) > base + Scalar(1e-4) * t * slope && t > Scalar(1e-12)) {
      t /= Scalar(2);
      trial = lambda + t * step;
    }
    if (t <= Scalar(1e-12)) {
      // Fall back to a gradient step when Newton stalls on a flat direction.
      trial = lambda - grad;
    }
    lambda = trial;
    p = probabilities(lambda);
  }

  if (!(residual < Scalar(1e-8))) {
    using std::abs;
    const Scalar spread = m > 0 ? lambda.cwiseAbs().maxCoeff() : Scalar(0);
    if (spread > Scalar(40)) {
      throw InfeasibleError("constraints admit no interior maximum-entropy solution",
                            static_cast<double>(residual));
    }
    throw ConvergenceError("maximum-entropy iteration did not converge", iter,
                           static_cast<double>(residual));
  }

  MeSolution<Scalar> out{QueueDistribution<Scalar>(p, Scalar(1e-9))};
  for (Eigen::Index j = 0; j < m; ++j) {
    const Scalar coeff = exp(lambda(j));
    switch (families[static_cast<std::size_t>(j)]) {
      case kBusy: out.g = coeff; break;
      case kMean: out.x = coeff; break;
      case kFull: out.y = coeff; break;
    }
  }
  out.iterations = iter;
  out.max_residual = residual;
  return out;
}

}  // namespace aqmsim::pbs
