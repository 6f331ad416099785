#include "aqmsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aqmsim/error.hpp"

namespace aqmsim::traffic {

GEParams::GEParams(double rate, double scv) : rate_(rate), scv_(scv) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ParameterError("GE rate must be positive and finite, got " + std::to_string(rate));
  }
  if (!(scv >= 1.0) || !std::isfinite(scv)) {
    throw ParameterError("GE squared coefficient of variation must be >= 1, got " +
                         std::to_string(scv));
  }
}

double ge_tau(const GEParams& params) noexcept { return params.tau(); }

double sample_interarrival(const GEParams& params, RandomStream& rng) {
  return rng.exponential(params.tau() * params.rate());
}

std::uint64_t sample_batch_size(const GEParams& params, RandomStream& rng) {
  return rng.geometric(params.tau());
}

double sample_service(const GEParams& params, RandomStream& rng) {
  const double tau = params.tau();
  if (tau < 1.0 && rng.uniform() >= tau) return 0.0;
  return rng.exponential(tau * params.rate());
}

std::uint64_t AimdSourceState::window_packets() const noexcept {
  return static_cast<std::uint64_t>(std::floor(std::max(cwnd, 1.0)));
}

AimdSourceState aimd_on_ack(AimdSourceState state) {
  state.cwnd += 1.0;
  return state;
}

AimdSourceState aimd_on_packet_ack(AimdSourceState state) {
  state.cwnd += 1.0 / state.cwnd;
  return state;
}

AimdSourceState aimd_on_congestion(AimdSourceState state) {
  state.cwnd = std::max(1.0, state.cwnd / 2.0);
  state.ssthresh = state.cwnd;
  return state;
}

AimdSourceState aimd_on_congestion(AimdSourceState state, double now) {
  if (now - state.last_decrease < state.rtt) return state;
  state = aimd_on_congestion(state);
  state.last_decrease = now;
  return state;
}

}  // namespace aqmsim::traffic
