#include "aqmsim/aqm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "aqmsim/error.hpp"

namespace aqmsim::aqm {

const char* to_string(AqmDecision d) noexcept {
  switch (d) {
    case AqmDecision::Accept: return "accept";
    case AqmDecision::Mark: return "mark";
    case AqmDecision::Drop: return "drop";
  }
  return "?";
}

namespace {

void check_occupancy(std::size_t qlen, std::size_t capacity) {
  if (qlen > capacity) {
    throw std::logic_error("queue length " + std::to_string(qlen) + " exceeds capacity " +
                           std::to_string(capacity));
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace

AqmDecision droptail_decide(std::size_t qlen, std::size_t capacity) {
  check_occupancy(qlen, capacity);
  return qlen == capacity ? AqmDecision::Drop : AqmDecision::Accept;
}

void RedParams::validate(std::size_t capacity) const {
  require(weight > 0.0 && weight <= 1.0, "red weight must lie in (0, 1]");
  require(min_th > 0.0, "red min_th must be positive");
  require(min_th < max_th, "red min_th must be below max_th");
  require(max_th <= static_cast<double>(capacity), "red max_th must not exceed capacity");
  require(max_p > 0.0 && max_p <= 1.0, "red max_p must lie in (0, 1]");
  require(idle_packet_time >= 0.0, "red idle_packet_time must be non-negative");
}

RedState red_update_avg(RedState state, double qlen, const RedParams& params,
                        std::optional<double> idle_duration) {
  const double keep = 1.0 - params.weight;
  if (idle_duration && *idle_duration > 0.0 && params.idle_packet_time > 0.0) {
    const double m = *idle_duration / params.idle_packet_time;
    state.avg *= std::pow(keep, m);
  }
  state.avg = keep * state.avg + params.weight * qlen;
  return state;
}

double red_pb(double avg, const RedParams& params) {
  if (avg < params.min_th) return 0.0;
  if (avg < params.max_th) {
    return params.max_p * (avg - params.min_th) / (params.max_th - params.min_th);
  }
  if (!params.gentle) return 1.0;
  const double saturation = 2.0 * params.max_th;
  if (avg >= saturation) return 1.0;
  return params.max_p + (1.0 - params.max_p) * (avg - params.max_th) / params.max_th;
}

double red_pa(double p_b, long count) {
  if (p_b <= 0.0) return 0.0;
  if (p_b >= 1.0) return 1.0;
  const double denom = 1.0 - static_cast<double>(count) * p_b;
  if (denom <= 0.0) return 1.0;
  return std::clamp(p_b / denom, 0.0, 1.0);
}

std::pair<AqmDecision, RedState> red_decide(RedState state, std::size_t qlen, std::size_t capacity,
                                            const RedParams& params, RandomStream& rng,
                                            std::optional<double> idle_duration) {
  check_occupancy(qlen, capacity);
  const double u = rng.uniform();
  state = red_update_avg(state, static_cast<double>(qlen), params, idle_duration);

  if (qlen == capacity) {
    state.count = 0;
    return {AqmDecision::Drop, state};
  }
  const double p_b = red_pb(state.avg, params);
  if (p_b <= 0.0) {
    state.count = 0;
    return {AqmDecision::Accept, state};
  }
  const bool forced = params.gentle ? state.avg >= 2.0 * params.max_th : state.avg >= params.max_th;
  if (forced) {
    state.count = 0;
    return {AqmDecision::Drop, state};
  }
  if (u < red_pa(p_b, state.count)) {
    state.count = 0;
    return {params.ecn ? AqmDecision::Mark : AqmDecision::Drop, state};
  }
  ++state.count;
  return {AqmDecision::Accept, state};
}

void AredSettings::validate() const {
  require(interval > 0.0, "ared interval must be positive");
  require(increment > 0.0, "ared increment must be positive");
  require(decrease_factor > 0.0 && decrease_factor < 1.0, "ared decrease_factor must lie in (0, 1)");
  require(max_p_floor > 0.0 && max_p_floor <= max_p_ceiling && max_p_ceiling <= 1.0,
          "ared max_p bounds must satisfy 0 < floor <= ceiling <= 1");
  require(band_low >= 0.0 && band_low <= band_high && band_high <= 1.0,
          "ared target band must satisfy 0 <= low <= high <= 1");
}

RedParams ared_adapt(RedParams params, double avg, bool interval_elapsed,
                     const AredSettings& settings) {
  if (!interval_elapsed) return params;
  const double span = params.max_th - params.min_th;
  const double low = params.min_th + settings.band_low * span;
  const double high = params.min_th + settings.band_high * span;
  if (avg > high) {
    params.max_p = std::min(settings.max_p_ceiling, params.max_p + settings.increment);
  } else if (avg < low) {
    params.max_p = std::max(settings.max_p_floor, params.max_p * settings.decrease_factor);
  }
  return params;
}

void BlueParams::validate(std::size_t capacity) const {
  require(r1 > 0.0 && r1 < 1.0, "blue r1 must lie in (0, 1)");
  require(r2 > 0.0 && r2 < 1.0, "blue r2 must lie in (0, 1)");
  require(freeze_time > 0.0, "blue freeze_time must be positive");
  require(l_th > 0.0 && l_th <= static_cast<double>(capacity), "blue l_th must lie in (0, capacity]");
}

BlueState blue_update(BlueState state, BlueEvent event, double now, const BlueParams& params) {
  if (now - state.last_update < params.freeze_time) return state;
  const double step = event == BlueEvent::QueueExceedsThreshold ? params.r1 : -params.r2;
  state.p_m = std::clamp(state.p_m + step, 0.0, 1.0);
  state.last_update = now;
  return state;
}

AqmDecision blue_decide(const BlueState& state, std::size_t qlen, std::size_t capacity, bool ecn,
                        RandomStream& rng) {
  check_occupancy(qlen, capacity);
  const double u = rng.uniform();
  if (qlen == capacity) return AqmDecision::Drop;
  if (u < state.p_m) return ecn ? AqmDecision::Mark : AqmDecision::Drop;
  return AqmDecision::Accept;
}

void RemParams::validate() const {
  require(gamma > 0.0, "rem gamma must be positive");
  require(phi > 1.0, "rem phi must exceed 1");
  require(alpha > 0.0, "rem alpha must be positive");
  require(target_backlog >= 0.0, "rem target_backlog must be non-negative");
}

RemState rem_update_price(RemState state, double backlog, double input_rate, double capacity_rate,
                          const RemParams& params) {
  const double mismatch =
      params.alpha * (backlog - params.target_backlog) + input_rate - capacity_rate;
  state.price = std::max(0.0, state.price + params.gamma * mismatch);
  state.measured_input_rate = input_rate;
  return state;
}

double rem_mark_prob(double price, double phi) {
  return -std::expm1(-price * std::log(phi));
}

AqmDecision rem_decide(const RemState& state, std::size_t qlen, std::size_t capacity,
                       const RemParams& params, RandomStream& rng) {
  check_occupancy(qlen, capacity);
  const double u = rng.uniform();
  if (qlen == capacity) return AqmDecision::Drop;
  if (u < rem_mark_prob(state.price, params.phi)) {
    return params.ecn ? AqmDecision::Mark : AqmDecision::Drop;
  }
  return AqmDecision::Accept;
}

double DecbitState::average(double now) const noexcept {
  const double elapsed = now - window_start;
  const double pending = static_cast<double>(last_qlen) * (now - last_time);
  if (elapsed <= 0.0) return static_cast<double>(last_qlen);
  return (area + pending) / elapsed;
}

DecbitState decbit_observe(DecbitState state, std::size_t qlen, double now) {
  const double accrued = static_cast<double>(state.last_qlen) * (now - state.last_time);
  state.area += accrued;
  state.cycle_area += accrued;
  if (state.last_qlen == 0 && qlen > 0) {
    // New busy period: the window becomes the cycle that just ended.
    state.window_start = state.cycle_start;
    state.area = state.cycle_area;
    state.cycle_start = now;
    state.cycle_area = 0.0;
  }
  state.last_qlen = qlen;
  state.last_time = now;
  return state;
}

std::pair<bool, DecbitState> decbit_router(DecbitState state, double now) {
  return {state.average(now) >= 1.0, state};
}

double decbit_source(std::span<const bool> window_bits, double cwnd) {
  const auto set = std::count(window_bits.begin(), window_bits.end(), true);
  return decbit_source(static_cast<std::size_t>(set), window_bits.size(), cwnd);
}

double decbit_source(std::size_t bits_set, std::size_t window, double cwnd) {
  const bool congested = window > 0 && 2 * bits_set >= window;
  const double next = congested ? cwnd * kDecbitDecreaseFactor : cwnd + 1.0;
  return std::max(1.0, next);
}

}  // namespace aqmsim::aqm
