#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>

#include "aqmsim/random.hpp"

namespace aqmsim::aqm {

/// Per-packet verdict. Only policies running in ECN mode return Mark.
enum class AqmDecision { Accept, Mark, Drop };

const char* to_string(AqmDecision d) noexcept;

// ---------------------------------------------------------------- Drop Tail

/// Drop iff the buffer is full. qlen > capacity is a broken queue invariant
/// and throws std::logic_error.
AqmDecision droptail_decide(std::size_t qlen, std::size_t capacity);

// ---------------------------------------------------------------- RED / GRED

struct RedParams {
  double weight = 0.002;
  double min_th = 5.0;
  double max_th = 15.0;
  double max_p = 0.1;
  bool gentle = false;
  bool ecn = false;
  // Transmission time of a typical packet; converts idle time to virtual
  // zero-length samples for the average.
  double idle_packet_time = 0.0;

  /// Throws ParameterError naming the violated constraint.
  void validate(std::size_t capacity) const;
};

struct RedState {
  double avg = 0.0;
  // Packets accepted since the last mark or drop.
  long count = 0;
};

/// EWMA of the instantaneous queue. When `idle_duration` is set the average
/// first decays as if idle_duration / idle_packet_time zero-length samples
/// had been seen.
RedState red_update_avg(RedState state, double qlen, const RedParams& params,
                        std::optional<double> idle_duration = std::nullopt);

/// Base probability from the average queue. Non-gentle: forced 1 at and
/// above max_th. Gentle: linear from max_p at max_th to 1 at 2*max_th.
double red_pb(double avg, const RedParams& params);

/// Count-corrected probability p_b / (1 - count*p_b), saturating at 1.
double red_pa(double p_b, long count);

/// Full RED arrival step: update the average, compute p_a, draw once.
std::pair<AqmDecision, RedState> red_decide(RedState state, std::size_t qlen, std::size_t capacity,
                                            const RedParams& params, RandomStream& rng,
                                            std::optional<double> idle_duration = std::nullopt);

// ---------------------------------------------------------------- ARED

/// Constants of the max_p adaptation law.
struct AredSettings {
  double interval = 0.5;
  double increment = 0.02;
  double decrease_factor = 0.9;
  double max_p_floor = 0.01;
  double max_p_ceiling = 0.5;
  double band_low = 0.4;
  double band_high = 0.6;

  void validate() const;
};

/// Additive increase of max_p while avg sits above the target band,
/// multiplicative decrease below it.
RedParams ared_adapt(RedParams params, double avg, bool interval_elapsed,
                     const AredSettings& settings = {});

// ---------------------------------------------------------------- BLUE

struct BlueParams {
  double l_th = 10.0;
  double r1 = 0.02;
  double r2 = 0.002;
  double freeze_time = 0.1;
  bool ecn = false;

  void validate(std::size_t capacity) const;
};

struct BlueState {
  double p_m = 0.0;
  double last_update = -1.0e300;
};

enum class BlueEvent { QueueExceedsThreshold, LinkIdle };

BlueState blue_update(BlueState state, BlueEvent event, double now, const BlueParams& params);

AqmDecision blue_decide(const BlueState& state, std::size_t qlen, std::size_t capacity, bool ecn,
                        RandomStream& rng);

// ---------------------------------------------------------------- REM

struct RemParams {
  double gamma = 0.001;
  double phi = 1.001;
  double alpha = 0.1;
  double target_backlog = 20.0;
  bool ecn = false;

  void validate() const;
};

struct RemState {
  double price = 0.0;
  double measured_input_rate = 0.0;
};

/// price <- max(0, price + gamma*(alpha*(backlog - target) + input - capacity)).
RemState rem_update_price(RemState state, double backlog, double input_rate, double capacity_rate,
                          const RemParams& params);

/// 1 - phi^(-price).
double rem_mark_prob(double price, double phi);

AqmDecision rem_decide(const RemState& state, std::size_t qlen, std::size_t capacity,
                       const RemParams& params, RandomStream& rng);

// ---------------------------------------------------------------- DECbit

/// Time-integral of the queue over the DECbit averaging window: the
/// previous busy+idle cycle plus the current busy period.
struct DecbitState {
  double window_start = 0.0;
  double area = 0.0;
  double cycle_start = 0.0;
  double cycle_area = 0.0;
  double last_time = 0.0;
  std::size_t last_qlen = 0;

  double average(double now) const noexcept;
};

/// Records that the queue length changed to `qlen` at `now`. A transition
/// from empty starts a new busy period and rolls the averaging window.
DecbitState decbit_observe(DecbitState state, std::size_t qlen, double now);

/// Congestion-indication bit for a packet arriving at `now`: set iff the
/// windowed mean queue length is at least one.
std::pair<bool, DecbitState> decbit_router(DecbitState state, double now);

/// Source rule over one window of feedback bits: multiplicative decrease
/// (x0.875) when at least half are set, otherwise +1. Floors at 1.
double decbit_source(std::span<const bool> window_bits, double cwnd);
double decbit_source(std::size_t bits_set, std::size_t window, double cwnd);

inline constexpr double kDecbitDecreaseFactor = 0.875;

}  // namespace aqmsim::aqm
