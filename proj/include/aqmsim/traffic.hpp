#pragma once

#include <cstdint>

#include "aqmsim/random.hpp"

namespace aqmsim::traffic {

/// Generalised exponential (GE) distribution parameters.
///
/// A GE stream with mean rate `rate` and squared coefficient of variation
/// `scv` is realised as a compound Poisson process: batch epochs arrive at
/// rate tau*rate and batch sizes are geometric with success probability tau,
/// where tau = 2 / (scv + 1). scv == 1 is the plain exponential case.
class GEParams {
 public:
  /// Throws ParameterError unless rate > 0 and scv >= 1.
  GEParams(double rate, double scv = 1.0);

  double rate() const noexcept { return rate_; }
  double scv() const noexcept { return scv_; }
  double mean() const noexcept { return 1.0 / rate_; }

  /// Probability that a batch stops after the current member, 2/(scv+1).
  double tau() const noexcept { return 2.0 / (scv_ + 1.0); }
  /// Batch continuation probability, (scv-1)/(scv+1) = 1 - tau.
  double sigma() const noexcept { return (scv_ - 1.0) / (scv_ + 1.0); }

  bool operator==(const GEParams&) const = default;

 private:
  double rate_;
  double scv_;
};

double ge_tau(const GEParams& params) noexcept;

/// Time to the next batch epoch: exponential with rate tau*rate.
double sample_interarrival(const GEParams& params, RandomStream& rng);

/// Geometric batch size on {1, 2, ...} with mean 1/tau.
std::uint64_t sample_batch_size(const GEParams& params, RandomStream& rng);

/// GE service time: zero with probability 1 - tau, otherwise exponential
/// with rate tau*rate. Mean 1/rate and SCV scv.
double sample_service(const GEParams& params, RandomStream& rng);

/// Window state of an additive-increase / multiplicative-decrease source.
/// Windows are real-valued; a source keeps floor(cwnd) packets in flight.
struct AimdSourceState {
  double cwnd = 1.0;
  double ssthresh = 1.0e9;
  double rtt = 0.1;
  std::uint64_t in_flight = 0;
  // Time of the last window decrease; at most one decrease per RTT.
  double last_decrease = -1.0e300;

  std::uint64_t window_packets() const noexcept;
};

/// One clean round trip: cwnd + 1.
AimdSourceState aimd_on_ack(AimdSourceState state);

/// Per-acknowledgement share of the additive increase (+1/cwnd), so that a
/// full window of acknowledgements adds one packet.
AimdSourceState aimd_on_packet_ack(AimdSourceState state);

/// Loss or mark feedback: cwnd halves (floor 1) unless a decrease already
/// happened within the last RTT.
AimdSourceState aimd_on_congestion(AimdSourceState state, double now);

/// Unconditional halving, for callers that do their own per-window gating.
AimdSourceState aimd_on_congestion(AimdSourceState state);

}  // namespace aqmsim::traffic
