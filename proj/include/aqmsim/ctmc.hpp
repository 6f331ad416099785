#pragma once

// Exact continuous-time Markov chain for a single-server FIFO queue with
// partial buffer sharing and GE batch arrivals / GE service.
//
// A state is the sequence of class labels in the buffer, head first; the
// head is in service. Zero-length GE service phases are resolved
// instantaneously, so every stored state has its head in an exponential
// phase. Batch members are admitted one by one against the occupancy seen
// by the batch (partial acceptance), then any zero-length services run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "aqmsim/distribution.hpp"
#include "aqmsim/error.hpp"
#include "aqmsim/pbs.hpp"

namespace aqmsim::pbs {

using FifoState = std::vector<std::uint8_t>;

template <typename Scalar = double>
struct CtmcModel {
  using Generator = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  std::vector<ClassTraffic> classes;
  PbsThresholds thresholds;
  std::vector<FifoState> states;  // index 0 is the empty system
  Generator generator;

  std::size_t size() const noexcept { return states.size(); }
};

template <typename Scalar = double>
struct CtmcSolution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector pi;
  QueueDistribution<Scalar> aggregate;  // total occupancy
  Scalar residual;                      // ||pi Q||_inf
  Scalar utilization;
  std::vector<Vector> class_marginals;  // distribution of n_i per class
  std::vector<Scalar> blocking;         // per class, per arriving packet
  std::vector<Scalar> mean_queue_length;
  std::vector<Scalar> throughput;
  std::vector<Scalar> mean_response;
  // Projection onto per-class counts (n_1, ..., n_R).
  std::map<std::vector<std::size_t>, Scalar> joint;
};

inline constexpr std::size_t kMaxCtmcStates = 100000;
inline constexpr std::size_t kDenseSolveLimit = 600;

namespace detail {

template <typename Scalar>
using Outcomes = std::vector<std::pair<FifoState, Scalar>>;

// Starts service at the head of `seq`; each zero-length service removes
// the head and the next packet starts. Returns the resulting stable states.
template <typename Scalar>
Outcomes<Scalar> resolve_zero_phases(FifoState seq, std::span<const ClassTraffic> classes) {
  Outcomes<Scalar> out;
  Scalar carried(1);
  std::size_t head = 0;
  while (head < seq.size()) {
    const Scalar tau(classes[seq[head]].service.tau());
    out.emplace_back(FifoState(seq.begin() + static_cast<std::ptrdiff_t>(head), seq.end()),
                     carried * tau);
    carried *= Scalar(1) - tau;
    if (carried == Scalar(0)) return out;
    ++head;
  }
  out.emplace_back(FifoState{}, carried);
  return out;
}

}  // namespace detail

/// Builds the generator over reachable FIFO states. Rows sum to zero.
/// Throws SizeError when more than `max_states` states are reachable.
template <typename Scalar = double>
CtmcModel<Scalar> ctmc_build(std::span<const ClassTraffic> classes, const PbsThresholds& thresholds,
                             std::size_t max_states = kMaxCtmcStates) {
  validate_classes(classes, thresholds);
  if (classes.size() > 255) throw SizeError("too many classes for the exact chain");

  CtmcModel<Scalar> model{std::vector<ClassTraffic>(classes.begin(), classes.end()), thresholds,
                          {}, {}};
  std::map<FifoState, std::size_t> index;
  std::queue<std::size_t> frontier;
  std::vector<std::map<std::size_t, Scalar>> rows;

  auto intern = [&](const FifoState& s) {
    auto [it, inserted] = index.emplace(s, model.states.size());
    if (inserted) {
      if (model.states.size() >= max_states) {
        throw SizeError("state space exceeds " + std::to_string(max_states) +
                        " states; use simulation for this instance");
      }
      model.states.push_back(s);
      rows.emplace_back();
      frontier.push(it->second);
    }
    return it->second;
  };
  auto add_rate = [&](std::size_t from, const FifoState& to, Scalar rate) {
    if (rate <= Scalar(0)) return;
    const std::size_t j = intern(to);
    if (j != from) rows[from][j] += rate;
  };

  intern(FifoState{});
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    const FifoState current = model.states[i];
    const std::size_t n = current.size();

    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto& cls = classes[c];
      const std::size_t limit = thresholds.threshold(cls.priority);
      const std::size_t room = limit > n ? limit - n : 0;
      if (room == 0) continue;
      const Scalar tau(cls.arrival.tau());
      const Scalar epoch_rate = tau * Scalar(cls.arrival.rate());
      FifoState next = current;
      Scalar continue_prob(1);
      for (std::size_t m = 1; m <= room; ++m) {
        next.push_back(static_cast<std::uint8_t>(c));
        // P(admitted == m): batch stops at m, or is cut at the room limit.
        const Scalar p = m < room ? continue_prob * tau : continue_prob;
        continue_prob *= Scalar(1) - tau;
        if (p <= Scalar(0)) break;
        if (n == 0) {
          for (auto& [s, q] : detail::resolve_zero_phases<Scalar>(next, classes)) {
            add_rate(i, s, epoch_rate * p * q);
          }
        } else {
          add_rate(i, next, epoch_rate * p);
        }
      }
    }

    if (n > 0) {
      const auto& head = classes[current.front()].service;
      const Scalar rate = Scalar(head.tau()) * Scalar(head.rate());
      FifoState rest(current.begin() + 1, current.end());
      for (auto& [s, q] : detail::resolve_zero_phases<Scalar>(std::move(rest), classes)) {
        add_rate(i, s, rate * q);
      }
    }
  }

  const auto size = static_cast<Eigen::Index>(model.states.size());
  std::vector<Eigen::Triplet<Scalar>> triplets;
  for (Eigen::Index i = 0; i < size; ++i) {
    Scalar out(0);
    for (const auto& [j, rate] : rows[static_cast<std::size_t>(i)]) {
      triplets.emplace_back(i, static_cast<Eigen::Index>(j), rate);
      out += rate;
    }
    triplets.emplace_back(i, i, -out);
  }
  model.generator.resize(size, size);
  model.generator.setFromTriplets(triplets.begin(), triplets.end());
  return model;
}

/// Steady state of the chain: solves pi Q = 0 with the last balance
/// equation replaced by sum(pi) = 1, then derives per-class measures.
/// Throws ModelError for a singular system.
template <typename Scalar = double>
CtmcSolution<Scalar> ctmc_solve(const CtmcModel<Scalar>& model) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = static_cast<Eigen::Index>(model.size());
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = Scalar(1);
  Vector pi;

  if (model.size() <= kDenseSolveLimit) {
    using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Dense a = Dense(model.generator).transpose();
    a.row(n - 1).setOnes();
    Eigen::FullPivLU<Dense> lu(a);
    if (!lu.isInvertible()) throw ModelError("generator is singular or the chain is reducible");
    pi = lu.solve(rhs);
  } else {
    Eigen::SparseMatrix<Scalar, Eigen::ColMajor> a = model.generator.transpose();
    for (Eigen::Index j = 0; j < n; ++j) a.coeffRef(n - 1, j) = Scalar(1);
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar, Eigen::ColMajor>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw ModelError("generator is singular or the chain is reducible");
    pi = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw ModelError("sparse steady-state solve failed");
  }
  pi = pi.cwiseMax(Scalar(0));
  pi /= pi.sum();

  const Vector flow = (pi.transpose() * model.generator).transpose();
  const Scalar residual = flow.cwiseAbs().maxCoeff();

  const std::size_t capacity = model.thresholds.capacity();
  const std::size_t r = model.classes.size();
  Vector aggregate = Vector::Zero(static_cast<Eigen::Index>(capacity + 1));
  std::vector<Vector> marginals(r, Vector::Zero(static_cast<Eigen::Index>(capacity + 1)));
  std::vector<Scalar> blocking(r, Scalar(0)), mql(r, Scalar(0));
  std::map<std::vector<std::size_t>, Scalar> joint;

  using std::pow;
  for (Eigen::Index s = 0; s < n; ++s) {
    const FifoState& state = model.states[static_cast<std::size_t>(s)];
    const Scalar p = pi(s);
    aggregate(static_cast<Eigen::Index>(state.size())) += p;
    std::vector<std::size_t> counts(r, 0);
    for (auto c : state) ++counts[c];
    joint[counts] += p;
    for (std::size_t c = 0; c < r; ++c) {
      marginals[c](static_cast<Eigen::Index>(counts[c])) += p;
      mql[c] += p * Scalar(counts[c]);
      const std::size_t limit = model.thresholds.threshold(model.classes[c].priority);
      const std::size_t room = limit > state.size() ? limit - state.size() : 0;
      // Fraction of an arriving geometric batch that overflows `room`.
      blocking[c] += p * pow(Scalar(model.classes[c].arrival.sigma()), Scalar(room));
    }
  }

  std::vector<Scalar> throughput(r), response(r);
  for (std::size_t c = 0; c < r; ++c) {
    throughput[c] = Scalar(model.classes[c].arrival.rate()) * (Scalar(1) - blocking[c]);
    response[c] = throughput[c] > Scalar(0) ? mql[c] / throughput[c] : Scalar(0);
  }
  const Scalar utilization = Scalar(1) - aggregate(0);
  return CtmcSolution<Scalar>{std::move(pi),
                              QueueDistribution<Scalar>(std::move(aggregate), Scalar(1e-9)),
                              residual,
                              utilization,
                              std::move(marginals),
                              std::move(blocking),
                              std::move(mql),
                              std::move(throughput),
                              std::move(response),
                              std::move(joint)};
}

}  // namespace aqmsim::pbs
