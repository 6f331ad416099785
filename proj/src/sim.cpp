#include "aqmsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "aqmsim/error.hpp"
#include "aqmsim/stats.hpp"

namespace aqmsim::sim {

namespace {

constexpr std::uint64_t kPolicyStream = 1;
constexpr std::uint64_t kSourceStreamBase = 100;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void fill_rates(ClassMetrics& m, double elapsed, double area, double busy, double response_sum) {
  const auto& c = m.counts;
  const double offered = static_cast<double>(c.offered);
  m.offered_rate = offered / elapsed;
  m.admitted_rate = static_cast<double>(c.admitted) / elapsed;
  m.value.throughput = static_cast<double>(c.departed) / elapsed;
  m.value.loss_prob = c.offered > 0 ? static_cast<double>(c.dropped) / offered : 0.0;
  m.value.mark_rate = c.offered > 0 ? static_cast<double>(c.marked) / offered : 0.0;
  m.value.mql = area / elapsed;
  m.value.utilization = std::clamp(busy / elapsed, 0.0, 1.0);
  m.value.mean_response = c.departed > 0 ? response_sum / static_cast<double>(c.departed) : 0.0;
}

}  // namespace

const char* policy_name(const PolicyConfig& policy) noexcept {
  return std::visit(overloaded{[](const DropTailPolicy&) { return "droptail"; },
                               [](const RedPolicy& p) { return p.params.gentle ? "gred" : "red"; },
                               [](const AredPolicy&) { return "ared"; },
                               [](const BluePolicy&) { return "blue"; },
                               [](const RemPolicy&) { return "rem"; },
                               [](const DecbitPolicy&) { return "decbit"; },
                               [](const PbsPolicy&) { return "pbs"; }},
                    policy);
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what, const std::string& key) { throw ConfigError(what, key); };
  if (capacity < 1) fail("capacity must be at least 1", "capacity");
  if (!(duration > 0.0)) fail("duration must be positive", "duration");
  if (!(warmup >= 0.0 && warmup < duration)) fail("warmup must lie in [0, duration)", "warmup");
  if (sources.empty()) fail("at least one source is required", "sources");
  if (replications < 1) fail("replications must be at least 1", "replications");
  if (sources.size() > 0xFFFFFFFFu) fail("too many sources", "sources");

  std::size_t max_priority = 1;
  for (const auto& s : sources) {
    std::visit(overloaded{[&](const OpenSource& o) {
                            max_priority = std::max(max_priority, o.priority);
                            if (o.priority < 1) fail("priority must be at least 1", "priority");
                          },
                          [&](const AimdSource& a) {
                            max_priority = std::max(max_priority, a.priority);
                            if (a.priority < 1) fail("priority must be at least 1", "priority");
                            if (!(a.rtt > 0.0)) fail("aimd rtt must be positive", "rtt");
                            if (!(a.initial_cwnd >= 1.0)) fail("aimd initial_cwnd must be >= 1", "initial_cwnd");
                          }},
               s);
  }

  auto wrap = [&](auto&& check, const std::string& key) {
    try {
      check();
    } catch (const ParameterError& e) {
      fail(e.what(), key);
    }
  };
  std::visit(overloaded{[](const DropTailPolicy&) {},
                        [&](const RedPolicy& p) { wrap([&] { p.params.validate(capacity); }, "policy"); },
                        [&](const AredPolicy& p) {
                          wrap([&] { p.params.validate(capacity); p.settings.validate(); }, "policy");
                        },
                        [&](const BluePolicy& p) { wrap([&] { p.params.validate(capacity); }, "policy"); },
                        [&](const RemPolicy& p) {
                          wrap([&] { p.params.validate(); }, "policy");
                          if (!(p.interval > 0.0)) fail("rem interval must be positive", "interval");
                          if (p.link_rate < 0.0) fail("rem link_rate must be non-negative", "link_rate");
                        },
                        [](const DecbitPolicy&) {},
                        [&](const PbsPolicy& p) {
                          pbs::PbsThresholds t(capacity, p.thresholds);
                          if (max_priority > t.classes()) {
                            fail("source priority exceeds the number of thresholds", "priority");
                          }
                        }},
             policy);
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t index) noexcept {
  return derive_seed(master, index);
}

Counts& Counts::operator+=(const Counts& o) noexcept {
  offered += o.offered;
  admitted += o.admitted;
  departed += o.departed;
  dropped += o.dropped;
  forced_drops += o.forced_drops;
  marked += o.marked;
  carried_in += o.carried_in;
  residual += o.residual;
  return *this;
}

bool MetricsReport::conserved() const noexcept {
  Counts total;
  for (const auto& c : per_class) {
    if (!c.counts.conserved()) return false;
    total += c.counts;
  }
  return total.offered == aggregate.counts.offered && total.departed == aggregate.counts.departed &&
         total.dropped == aggregate.counts.dropped && aggregate.counts.conserved();
}

double little_check(const MetricsReport& report) {
  const auto& a = report.aggregate;
  const double l = a.value.mql;
  if (l <= 0.0 || a.admitted_rate <= 0.0) return 0.0;
  return std::abs(l - a.admitted_rate * a.value.mean_response) / l;
}

bool little_check_applicable(const MetricsReport& report, std::uint64_t min_departures) {
  return report.aggregate.counts.departed >= min_departures;
}

// ------------------------------------------------------------------ engine

Engine::Engine(const SimConfig& config, std::uint64_t seed)
    : config_(config), policy_rng_(RandomStream::substream(seed, kPolicyStream)) {
  config_.validate();
  if (const auto* p = std::get_if<PbsPolicy>(&config_.policy)) {
    thresholds_.emplace(config_.capacity, p->thresholds);
  }
  if (const auto* p = std::get_if<RedPolicy>(&config_.policy)) red_params_ = p->params;
  if (const auto* p = std::get_if<AredPolicy>(&config_.policy)) red_params_ = p->params;
  if (red_params_.idle_packet_time <= 0.0) red_params_.idle_packet_time = service_of(0).mean();
  if (const auto* p = std::get_if<RemPolicy>(&config_.policy)) {
    rem_link_rate_ = p->link_rate > 0.0 ? p->link_rate : service_of(0).rate();
  }

  sources_.reserve(config_.sources.size());
  for (std::size_t i = 0; i < config_.sources.size(); ++i) {
    SourceRuntime rt{RandomStream::substream(seed, kSourceStreamBase + 2 * i),
                     RandomStream::substream(seed, kSourceStreamBase + 2 * i + 1),
                     {}, 0, 0, 1, 0, {}, 0.0, 0.0, 0.0};
    if (const auto* a = std::get_if<AimdSource>(&config_.sources[i])) {
      rt.aimd.cwnd = a->initial_cwnd;
      rt.aimd.rtt = a->rtt;
      rt.window_target = rt.aimd.window_packets();
    }
    sources_.push_back(std::move(rt));
  }

  if (config_.warmup > 0.0) {
    schedule(config_.warmup, EventKind::StatsReset);
  } else {
    measuring_ = true;
  }
  for (std::uint32_t i = 0; i < sources_.size(); ++i) {
    if (const auto* o = std::get_if<OpenSource>(&config_.sources[i])) {
      if (o->arrival) {
        schedule(traffic::sample_interarrival(*o->arrival, sources_[i].arrivals), EventKind::BatchArrival, i);
      }
    } else {
      schedule(0.0, EventKind::SourceFeedback, i, Feedback::Start);
    }
  }
  if (const auto* p = std::get_if<AredPolicy>(&config_.policy)) {
    schedule(p->settings.interval, EventKind::PolicyTimer);
  } else if (const auto* p = std::get_if<RemPolicy>(&config_.policy)) {
    schedule(p->interval, EventKind::PolicyTimer);
  }
}

bool Engine::is_aimd(std::uint32_t source) const noexcept {
  return std::holds_alternative<AimdSource>(config_.sources[source]);
}

const traffic::GEParams& Engine::service_of(std::uint32_t source) const noexcept {
  return std::visit([](const auto& s) -> const traffic::GEParams& { return s.service; },
                    config_.sources[source]);
}

std::size_t Engine::priority_of(std::uint32_t source) const noexcept {
  return std::visit([](const auto& s) { return s.priority; }, config_.sources[source]);
}

const traffic::AimdSourceState& Engine::aimd_state(std::size_t source) const {
  return sources_.at(source).aimd;
}

double Engine::current_max_p() const noexcept { return red_params_.max_p; }

void Engine::schedule(double time, EventKind kind, std::uint32_t source, Feedback feedback) {
  events_.push(Event{time, seq_++, kind, source, feedback});
}

void Engine::advance(double time) {
  const double dt = time - last_change_;
  if (dt > 0.0) {
    for (auto& s : sources_) s.area += static_cast<double>(s.in_system) * dt;
    if (!queue_.empty()) sources_[queue_.front().source].busy += dt;
  }
  last_change_ = time;
}

bool Engine::step() {
  if (finished_) return false;
  if (events_.empty() || events_.top().time > config_.duration) {
    finalize();
    return false;
  }
  const Event ev = events_.top();
  events_.pop();
  if (ev.time < now_) throw std::logic_error("event scheduled in the past");
  advance(ev.time);
  now_ = ev.time;
  dispatch(ev);
  ++dispatched_;
  if (observer_) observer_(ev);
  return true;
}

void Engine::run_to_end() {
  while (step()) {
  }
}

void Engine::dispatch(const Event& ev) {
  switch (ev.kind) {
    case EventKind::StatsReset: reset_statistics(); break;
    case EventKind::BatchArrival: on_batch_arrival(ev.source); break;
    case EventKind::ServiceCompletion: on_service_completion(); break;
    case EventKind::PolicyTimer: on_policy_timer(); break;
    case EventKind::SourceFeedback: on_feedback(ev.source, ev.feedback); break;
  }
}

void Engine::reset_statistics() {
  measuring_ = true;
  measure_start_ = now_;
  for (auto& s : sources_) {
    s.counts = Counts{};
    s.counts.carried_in = s.in_system;
    s.area = 0.0;
    s.busy = 0.0;
    s.response_sum = 0.0;
  }
}

void Engine::finalize() {
  if (finished_) return;
  advance(config_.duration);
  now_ = config_.duration;
  for (auto& s : sources_) s.counts.residual = s.in_system;
  finished_ = true;
}

void Engine::on_batch_arrival(std::uint32_t source) {
  auto& rt = sources_[source];
  const auto& arrival = *std::get<OpenSource>(config_.sources[source]).arrival;
  const std::uint64_t batch = traffic::sample_batch_size(arrival, rt.arrivals);
  for (std::uint64_t k = 0; k < batch; ++k) offer(source);
  schedule(now_ + traffic::sample_interarrival(arrival, rt.arrivals), EventKind::BatchArrival, source);
}

aqm::AqmDecision Engine::decide(std::uint32_t source, bool& carries_bit) {
  using aqm::AqmDecision;
  const std::size_t qlen = queue_.size();
  const std::size_t capacity = config_.capacity;
  carries_bit = false;
  return std::visit(
      overloaded{
          [&](const DropTailPolicy&) { return aqm::droptail_decide(qlen, capacity); },
          [&](const RedPolicy&) {
            std::optional<double> idle;
            if (qlen == 0 && idle_since_) idle = now_ - *idle_since_;
            auto [d, st] = aqm::red_decide(red_state_, qlen, capacity, red_params_, policy_rng_, idle);
            red_state_ = st;
            return d;
          },
          [&](const AredPolicy&) {
            std::optional<double> idle;
            if (qlen == 0 && idle_since_) idle = now_ - *idle_since_;
            auto [d, st] = aqm::red_decide(red_state_, qlen, capacity, red_params_, policy_rng_, idle);
            red_state_ = st;
            return d;
          },
          [&](const BluePolicy& p) {
            if (qlen >= capacity || static_cast<double>(qlen) > p.params.l_th) {
              blue_state_ = aqm::blue_update(blue_state_, aqm::BlueEvent::QueueExceedsThreshold, now_, p.params);
            }
            return aqm::blue_decide(blue_state_, qlen, capacity, p.params.ecn, policy_rng_);
          },
          [&](const RemPolicy& p) {
            ++rem_arrivals_;
            return aqm::rem_decide(rem_state_, qlen, capacity, p.params, policy_rng_);
          },
          [&](const DecbitPolicy&) {
            if (qlen >= capacity) return aqm::droptail_decide(qlen, capacity);
            auto [bit, st] = aqm::decbit_router(decbit_state_, now_);
            decbit_state_ = st;
            carries_bit = bit;
            return bit ? AqmDecision::Mark : AqmDecision::Accept;
          },
          [&](const PbsPolicy&) {
            return pbs::pbs_admit(priority_of(source), qlen, *thresholds_) ? AqmDecision::Accept
                                                                           : AqmDecision::Drop;
          }},
      config_.policy);
}

void Engine::offer(std::uint32_t source) {
  auto& rt = sources_[source];
  ++rt.counts.offered;
  const bool full = queue_.size() >= config_.capacity;
  bool carries_bit = false;
  const aqm::AqmDecision verdict = decide(source, carries_bit);
  const bool decbit = std::holds_alternative<DecbitPolicy>(config_.policy);
  switch (verdict) {
    case aqm::AqmDecision::Drop:
      ++rt.counts.dropped;
      if (full) ++rt.counts.forced_drops;
      if (is_aimd(source)) schedule(now_ + rt.aimd.rtt, EventKind::SourceFeedback, source, Feedback::Loss);
      break;
    case aqm::AqmDecision::Mark:
      ++rt.counts.marked;
      if (is_aimd(source) && !decbit) {
        schedule(now_ + rt.aimd.rtt, EventKind::SourceFeedback, source, Feedback::Mark);
      }
      enqueue(source, carries_bit);
      break;
    case aqm::AqmDecision::Accept:
      enqueue(source, false);
      break;
  }
}

void Engine::enqueue(std::uint32_t source, bool carries_bit) {
  auto& rt = sources_[source];
  ++rt.counts.admitted;
  ++rt.in_system;
  queue_.push_back(Packet{source, now_, carries_bit});
  on_queue_change();
  if (queue_.size() == 1) {
    idle_since_.reset();
    start_service();
  }
}

void Engine::start_service() {
  const Packet& head = queue_.front();
  const double service = traffic::sample_service(service_of(head.source), sources_[head.source].service);
  schedule(now_ + service, EventKind::ServiceCompletion);
}

void Engine::on_service_completion() {
  const Packet done = queue_.front();
  queue_.pop_front();
  auto& rt = sources_[done.source];
  --rt.in_system;
  ++rt.counts.departed;
  if (measuring_) rt.response_sum += now_ - done.admitted_at;
  on_queue_change();
  if (is_aimd(done.source)) {
    schedule(now_ + rt.aimd.rtt, EventKind::SourceFeedback, done.source,
             done.congestion_bit ? Feedback::AckWithBit : Feedback::Ack);
  }
  if (!queue_.empty()) {
    start_service();
    return;
  }
  idle_since_ = now_;
  if (const auto* p = std::get_if<BluePolicy>(&config_.policy)) {
    blue_state_ = aqm::blue_update(blue_state_, aqm::BlueEvent::LinkIdle, now_, p->params);
  }
}

void Engine::on_queue_change() {
  if (std::holds_alternative<DecbitPolicy>(config_.policy)) {
    decbit_state_ = aqm::decbit_observe(decbit_state_, queue_.size(), now_);
  }
}

void Engine::on_policy_timer() {
  if (const auto* p = std::get_if<AredPolicy>(&config_.policy)) {
    red_params_ = aqm::ared_adapt(red_params_, red_state_.avg, true, p->settings);
    schedule(now_ + p->settings.interval, EventKind::PolicyTimer);
  } else if (const auto* p = std::get_if<RemPolicy>(&config_.policy)) {
    const double input_rate = static_cast<double>(rem_arrivals_) / p->interval;
    rem_arrivals_ = 0;
    rem_state_ = aqm::rem_update_price(rem_state_, static_cast<double>(queue_.size()), input_rate,
                                       rem_link_rate_, p->params);
    schedule(now_ + p->interval, EventKind::PolicyTimer);
  }
}

void Engine::on_feedback(std::uint32_t source, Feedback feedback) {
  auto& rt = sources_[source];
  const bool decbit = std::holds_alternative<DecbitPolicy>(config_.policy);
  switch (feedback) {
    case Feedback::Start: break;
    case Feedback::Ack:
    case Feedback::AckWithBit:
      --rt.aimd.in_flight;
      if (decbit) {
        ++rt.window_acks;
        if (feedback == Feedback::AckWithBit) ++rt.window_bits_set;
        if (rt.window_acks >= rt.window_target) {
          rt.aimd.cwnd = aqm::decbit_source(rt.window_bits_set, rt.window_acks, rt.aimd.cwnd);
          rt.window_acks = 0;
          rt.window_bits_set = 0;
          rt.window_target = rt.aimd.window_packets();
        }
      } else {
        rt.aimd = traffic::aimd_on_packet_ack(rt.aimd);
      }
      break;
    case Feedback::Loss:
      --rt.aimd.in_flight;
      rt.aimd = traffic::aimd_on_congestion(rt.aimd, now_);
      break;
    case Feedback::Mark:
      rt.aimd = traffic::aimd_on_congestion(rt.aimd, now_);
      break;
  }
  send_window(source);
}

void Engine::send_window(std::uint32_t source) {
  auto& rt = sources_[source];
  while (rt.aimd.in_flight < rt.aimd.window_packets()) {
    ++rt.aimd.in_flight;
    offer(source);
  }
}

MetricsReport Engine::report() const {
  MetricsReport r;
  const double elapsed = (finished_ ? config_.duration : now_) - measure_start_;
  r.elapsed = elapsed;
  r.events = dispatched_;
  double area = 0.0, busy = 0.0, response = 0.0;
  for (const auto& s : sources_) {
    ClassMetrics m;
    m.counts = s.counts;
    if (!finished_) m.counts.residual = s.in_system;
    if (elapsed > 0.0) fill_rates(m, elapsed, s.area, s.busy, s.response_sum);
    r.per_class.push_back(m);
    r.aggregate.counts += m.counts;
    area += s.area;
    busy += s.busy;
    response += s.response_sum;
  }
  if (elapsed > 0.0) fill_rates(r.aggregate, elapsed, area, busy, response);
  return r;
}

// -------------------------------------------------------------- front ends

MetricsReport run(const SimConfig& config) {
  Engine engine(config, replication_seed(config.seed, 0));
  engine.run_to_end();
  return engine.report();
}

namespace {

void summarize_into(ClassMetrics& out, const std::vector<const ClassMetrics*>& samples) {
  const std::size_t n = samples.size();
  std::vector<double> xs(n);
  auto reduce = [&](auto member, double& value, double& se, double& hw) {
    for (std::size_t i = 0; i < n; ++i) xs[i] = samples[i]->value.*member;
    const auto s = stats::summarize(xs);
    value = s.mean;
    se = s.std_error;
    hw = s.half_width;
  };
  reduce(&Measures::throughput, out.value.throughput, out.std_error.throughput, out.ci_half_width.throughput);
  reduce(&Measures::loss_prob, out.value.loss_prob, out.std_error.loss_prob, out.ci_half_width.loss_prob);
  reduce(&Measures::mark_rate, out.value.mark_rate, out.std_error.mark_rate, out.ci_half_width.mark_rate);
  reduce(&Measures::mql, out.value.mql, out.std_error.mql, out.ci_half_width.mql);
  reduce(&Measures::utilization, out.value.utilization, out.std_error.utilization,
         out.ci_half_width.utilization);
  reduce(&Measures::mean_response, out.value.mean_response, out.std_error.mean_response,
         out.ci_half_width.mean_response);
  double offered = 0.0, admitted = 0.0;
  for (const auto* s : samples) {
    out.counts += s->counts;
    offered += s->offered_rate;
    admitted += s->admitted_rate;
  }
  out.offered_rate = offered / static_cast<double>(n);
  out.admitted_rate = admitted / static_cast<double>(n);
}

}  // namespace

MetricsReport aggregate_replications(const std::vector<MetricsReport>& runs) {
  if (runs.empty()) throw std::invalid_argument("no replications to aggregate");
  MetricsReport out;
  out.replications = runs.size();
  out.per_class.resize(runs.front().per_class.size());
  std::vector<const ClassMetrics*> samples;
  for (std::size_t c = 0; c < out.per_class.size(); ++c) {
    samples.clear();
    for (const auto& r : runs) samples.push_back(&r.per_class[c]);
    summarize_into(out.per_class[c], samples);
  }
  samples.clear();
  double elapsed = 0.0;
  for (const auto& r : runs) {
    samples.push_back(&r.aggregate);
    elapsed += r.elapsed;
    out.events += r.events;
  }
  summarize_into(out.aggregate, samples);
  out.elapsed = elapsed / static_cast<double>(runs.size());
  return out;
}

MetricsReport run_replications(const SimConfig& config, std::size_t n, std::size_t threads) {
  if (n < 1) throw ConfigError("replications must be at least 1", "replications");
  config.validate();
  std::vector<MetricsReport> runs(n);
  auto one = [&](std::size_t i) {
    Engine engine(config, replication_seed(config.seed, i));
    engine.run_to_end();
    runs[i] = engine.report();
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) one(i);
      });
    }
  }
  return aggregate_replications(runs);
}

}  // namespace aqmsim::sim
