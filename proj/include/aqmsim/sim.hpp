#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "aqmsim/aqm.hpp"
#include "aqmsim/pbs.hpp"
#include "aqmsim/random.hpp"
#include "aqmsim/traffic.hpp"

namespace aqmsim::sim {

// ------------------------------------------------------------------ config

/// Open-loop GE source. A missing arrival process is a silent source.
struct OpenSource {
  std::optional<traffic::GEParams> arrival;
  traffic::GEParams service{1.0};
  std::size_t priority = 1;
};

/// Closed-loop AIMD source with a constant round-trip time.
struct AimdSource {
  double rtt = 0.1;
  double initial_cwnd = 1.0;
  traffic::GEParams service{1.0};
  std::size_t priority = 1;
};

using Source = std::variant<OpenSource, AimdSource>;

struct DropTailPolicy {
  bool ecn = false;  // accepted for symmetry; Drop Tail never marks
};
struct RedPolicy {
  aqm::RedParams params;
};
struct AredPolicy {
  aqm::RedParams params;
  aqm::AredSettings settings;
};
struct BluePolicy {
  aqm::BlueParams params;
};
struct RemPolicy {
  aqm::RemParams params;
  double interval = 0.01;
  // Link capacity in packets/s; 0 derives it from the first source's service rate.
  double link_rate = 0.0;
};
struct DecbitPolicy {};
struct PbsPolicy {
  std::vector<std::size_t> thresholds;
};

using PolicyConfig =
    std::variant<DropTailPolicy, RedPolicy, AredPolicy, BluePolicy, RemPolicy, DecbitPolicy, PbsPolicy>;

const char* policy_name(const PolicyConfig& policy) noexcept;

struct SimConfig {
  std::size_t capacity = 10;
  PolicyConfig policy;
  std::vector<Source> sources;
  double duration = 1000.0;
  double warmup = 100.0;
  std::uint64_t seed = 1;
  std::size_t replications = 1;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Seed of replication `index`; run() uses index 0.
std::uint64_t replication_seed(std::uint64_t master, std::size_t index) noexcept;

// ----------------------------------------------------------------- metrics

struct Counts {
  std::uint64_t offered = 0;
  std::uint64_t admitted = 0;
  std::uint64_t departed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t forced_drops = 0;  // arrivals that found the buffer physically full
  std::uint64_t marked = 0;
  std::uint64_t carried_in = 0;  // in system when statistics started
  std::uint64_t residual = 0;    // in system at the horizon

  /// offered + carried_in == departed + dropped + residual.
  bool conserved() const noexcept {
    return offered + carried_in == departed + dropped + residual && admitted + dropped == offered;
  }
  Counts& operator+=(const Counts& o) noexcept;
};

/// The five performance measures plus the mark rate.
struct Measures {
  double throughput = 0.0;     // departures per second
  double loss_prob = 0.0;      // dropped / offered
  double mark_rate = 0.0;      // marked / offered
  double mql = 0.0;            // time-average packets in system
  double utilization = 0.0;    // busy-time fraction
  double mean_response = 0.0;  // admission to departure, seconds
};

struct ClassMetrics {
  Counts counts;
  double offered_rate = 0.0;
  double admitted_rate = 0.0;
  Measures value;
  Measures std_error;      // across replications; zero for a single run
  Measures ci_half_width;  // 95% Student-t
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;  // one per configured source
  ClassMetrics aggregate;
  double elapsed = 0.0;  // measured interval, duration - warmup
  std::size_t replications = 1;
  std::uint64_t events = 0;

  bool conserved() const noexcept;
};

/// |L - lambda_eff * W| / L for the aggregate; 0 for an empty system.
double little_check(const MetricsReport& report);

/// Little's law is only asserted once enough packets have departed.
bool little_check_applicable(const MetricsReport& report, std::uint64_t min_departures = 1000);

// ------------------------------------------------------------------ engine

enum class EventKind : std::uint8_t {
  StatsReset,
  BatchArrival,
  ServiceCompletion,
  PolicyTimer,
  SourceFeedback,
};

enum class Feedback : std::uint8_t { Start, Ack, AckWithBit, Loss, Mark };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::BatchArrival;
  std::uint32_t source = 0;
  Feedback feedback = Feedback::Start;
};

/// Single-queue, single-server discrete-event engine. Events are
/// dispatched in (time, seq) order; statistics reset at the warmup time.
class Engine {
 public:
  Engine(const SimConfig& config, std::uint64_t seed);

  /// Dispatches the next event. Returns false once the horizon is reached.
  bool step();
  void run_to_end();
  MetricsReport report() const;

  double now() const noexcept { return now_; }
  std::size_t queue_length() const noexcept { return queue_.size(); }
  std::uint64_t events_dispatched() const noexcept { return dispatched_; }
  const traffic::AimdSourceState& aimd_state(std::size_t source) const;
  double red_average() const noexcept { return red_state_.avg; }
  double current_max_p() const noexcept;
  double blue_probability() const noexcept { return blue_state_.p_m; }
  double rem_price() const noexcept { return rem_state_.price; }

  /// Called after each dispatched event.
  void set_observer(std::function<void(const Event&)> observer) { observer_ = std::move(observer); }

 private:
  struct Packet {
    std::uint32_t source;
    double admitted_at;
    bool congestion_bit;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  struct SourceRuntime {
    RandomStream arrivals;
    RandomStream service;
    traffic::AimdSourceState aimd;
    std::uint64_t window_acks = 0;
    std::uint64_t window_bits_set = 0;
    std::uint64_t window_target = 1;
    std::uint64_t in_system = 0;
    Counts counts;
    double area = 0.0;
    double busy = 0.0;
    double response_sum = 0.0;
  };

  void schedule(double time, EventKind kind, std::uint32_t source = 0,
                Feedback feedback = Feedback::Start);
  void advance(double time);
  void dispatch(const Event& ev);
  void on_batch_arrival(std::uint32_t source);
  void on_service_completion();
  void on_policy_timer();
  void on_feedback(std::uint32_t source, Feedback feedback);
  void reset_statistics();
  void finalize();

  void offer(std::uint32_t source);
  aqm::AqmDecision decide(std::uint32_t source, bool& carries_bit);
  void enqueue(std::uint32_t source, bool carries_bit);
  void start_service();
  void send_window(std::uint32_t source);
  void on_queue_change();

  bool is_aimd(std::uint32_t source) const noexcept;
  const traffic::GEParams& service_of(std::uint32_t source) const noexcept;
  std::size_t priority_of(std::uint32_t source) const noexcept;

  SimConfig config_;
  std::optional<pbs::PbsThresholds> thresholds_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::deque<Packet> queue_;
  std::vector<SourceRuntime> sources_;
  RandomStream policy_rng_;

  double now_ = 0.0;
  double last_change_ = 0.0;
  std::uint64_t seq_ = 0;
  std::uint64_t dispatched_ = 0;
  bool finished_ = false;
  bool measuring_ = false;
  double measure_start_ = 0.0;

  aqm::RedParams red_params_;
  aqm::RedState red_state_;
  std::optional<double> idle_since_ = 0.0;
  aqm::BlueState blue_state_;
  aqm::RemState rem_state_;
  std::uint64_t rem_arrivals_ = 0;
  double rem_link_rate_ = 0.0;
  aqm::DecbitState decbit_state_;

  std::function<void(const Event&)> observer_;
};

// -------------------------------------------------------------- front ends

/// One replication with seed replication_seed(config.seed, 0).
MetricsReport run(const SimConfig& config);

/// `n` independent replications; mean, standard error and 95% CI per
/// measure. `threads` == 0 picks the hardware concurrency. The result does
/// not depend on the thread count.
MetricsReport run_replications(const SimConfig& config, std::size_t n, std::size_t threads = 0);

/// Combines per-replication reports in index order.
MetricsReport aggregate_replications(const std::vector<MetricsReport>& runs);

}  // namespace aqmsim::sim
