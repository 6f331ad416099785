// Acceptance battery. One line per criterion; non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "aqmsim/aqm.hpp"
#include "aqmsim/blocking.hpp"
#include "aqmsim/commands.hpp"
#include "aqmsim/config.hpp"
#include "aqmsim/csv.hpp"
#include "aqmsim/ctmc.hpp"
#include "aqmsim/max_entropy.hpp"
#include "aqmsim/sim.hpp"
#include "aqmsim/validate.hpp"

#ifndef AQMSIM_FIXTURE_DIR
#define AQMSIM_FIXTURE_DIR "tests/fixtures"
#endif

namespace {

using namespace aqmsim;
using traffic::GEParams;
using pbs::ClassTraffic;
using pbs::PbsThresholds;

// Tolerances.
constexpr double kZ = 3.0;                 // standard errors for sim vs exact
constexpr double kMm1nRelative = 0.05;     // relative loss error, criterion 1
constexpr double kMm1nSeconds = 30.0;      // runtime target, criterion 1
constexpr double kCtmcResidual = 1e-10;
constexpr double kRedExact = 1e-12;
constexpr double kChiAlpha = 0.01;
constexpr double kBlueExact = 1e-12;
constexpr double kMeEntropy = 1e-9;
constexpr double kMeRoot = 1e-6;
constexpr double kMeResidual = 1e-8;
constexpr double kBlockingGe = 1e-6;
constexpr double kAimdUtilization = 0.9;
constexpr double kEqualUtilization = 0.02;
constexpr double kLittle = 0.02;

// ---------------------------------------------------------------- reporting

int failures = 0;

void verdict(int id, const char* name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %2d %s  %-28s %s\n", id, ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Every simulated replication passes through here for criterion 13.
struct Audit {
  std::size_t runs = 0;
  std::size_t not_conserved = 0;
  std::size_t little_exempt = 0;
  double worst_little = 0.0;
} audit;

struct Interval {
  double mean, half;
  double lo() const { return mean - half; }
  double hi() const { return mean + half; }
};

bool disjoint(const Interval& a, const Interval& b) { return a.hi() < b.lo() || b.hi() < a.lo(); }
bool overlap(const Interval& a, const Interval& b) { return !disjoint(a, b); }

sim::MetricsReport replicate(const sim::SimConfig& cfg, std::size_t n) {
  std::vector<sim::MetricsReport> runs;
  runs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    sim::Engine engine(cfg, sim::replication_seed(cfg.seed, i));
    engine.run_to_end();
    runs.push_back(engine.report());
    const auto& r = runs.back();
    ++audit.runs;
    if (!r.conserved()) ++audit.not_conserved;
    if (sim::little_check_applicable(r)) {
      audit.worst_little = std::max(audit.worst_little, sim::little_check(r));
    } else {
      ++audit.little_exempt;
    }
  }
  return sim::aggregate_replications(runs);
}

sim::SimConfig pbs_config(const std::vector<ClassTraffic>& classes, const std::vector<std::size_t>& t,
                          double duration, std::uint64_t seed) {
  sim::SimConfig cfg;
  cfg.capacity = t.front();
  cfg.policy = sim::PbsPolicy{t};
  for (const auto& c : classes) cfg.sources.push_back(sim::OpenSource{c.arrival, c.service, c.priority});
  cfg.duration = duration;
  cfg.warmup = duration * 0.02;
  cfg.seed = seed;
  return cfg;
}

double z_score(double estimate, double exact, double se) {
  if (se == 0.0) return estimate == exact ? 0.0 : INFINITY;
  return std::abs(estimate - exact) / se;
}

// ------------------------------------------------------------- criterion 1

void mm1n_exactness() {
  const double rho = 0.5;
  const double exact_loss = (1 - rho) * std::pow(rho, 3) / (1 - std::pow(rho, 4));
  double num = 0, den = 0;
  for (int k = 0; k <= 3; ++k) {
    num += k * std::pow(rho, k);
    den += std::pow(rho, k);
  }
  const double exact_mql = num / den;

  sim::SimConfig cfg;
  cfg.capacity = 3;
  cfg.policy = sim::DropTailPolicy{};
  cfg.sources.push_back(sim::OpenSource{GEParams(0.5), GEParams(1.0), 1});
  cfg.warmup = 1e4;
  cfg.duration = cfg.warmup + 2e6;  // 10^6 arrivals at rate 0.5
  cfg.seed = 20240601;

  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = replicate(cfg, 30);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto& a = rep.aggregate;
  const double zl = z_score(a.value.loss_prob, exact_loss, a.std_error.loss_prob);
  const double rel = std::abs(a.value.loss_prob - exact_loss) / exact_loss;
  const double zq = z_score(a.value.mql, exact_mql, a.std_error.mql);
  const bool arrivals_ok = a.counts.offered / 30 >= 1000000 * 0.99;
  verdict(1, "mm1n_exactness", zl <= kZ && rel <= kMm1nRelative && zq <= kZ && secs < kMm1nSeconds && arrivals_ok,
          fmt("loss %.5f vs %.5f (z %.2f, rel %.4f); mql %.5f vs %.5f (z %.2f); %.1f s", a.value.loss_prob,
              exact_loss, zl, rel, a.value.mql, exact_mql, zq, secs));
}

// ------------------------------------------------------------- criterion 2

void ctmc_cross_validation() {
  struct Instance {
    std::vector<ClassTraffic> classes;
    std::vector<std::size_t> thresholds;
  };
  const std::vector<Instance> battery{
      {{{GEParams(0.5), GEParams(1.0), 1}}, {1}},
      {{{GEParams(0.9), GEParams(1.0), 1}}, {4}},
      {{{GEParams(1.3), GEParams(1.0), 1}}, {6}},
      {{{GEParams(1.0), GEParams(1.0), 1}, {GEParams(1.0), GEParams(1.0), 2}}, {3, 2}},
      {{{GEParams(0.6), GEParams(1.0), 1}, {GEParams(0.6), GEParams(1.0), 2}}, {4, 2}},
      {{{GEParams(0.5), GEParams(1.0), 1}, {GEParams(0.8), GEParams(1.5), 2}}, {6, 3}},
      {{{GEParams(0.7), GEParams(1.0), 1}, {GEParams(0.4), GEParams(2.0), 2}}, {5, 1}},
  };
  double worst_z = 0.0, worst_res = 0.0;
  std::uint64_t seed = 1001;
  for (const auto& inst : battery) {
    const PbsThresholds t(inst.thresholds.front(), inst.thresholds);
    const auto exact = pbs::ctmc_solve(pbs::ctmc_build<double>(inst.classes, t));
    worst_res = std::max(worst_res, exact.residual);
    double rate = 0.0;
    for (const auto& c : inst.classes) rate += c.arrival.rate();
    const std::size_t reps = 20;
    const double duration = 1.1e6 / (rate * reps);
    const auto rep = replicate(pbs_config(inst.classes, inst.thresholds, duration, seed++), reps);
    for (std::size_t c = 0; c < inst.classes.size(); ++c) {
      const auto& m = rep.per_class[c];
      worst_z = std::max(worst_z, z_score(m.value.loss_prob, exact.blocking[c], m.std_error.loss_prob));
      worst_z = std::max(worst_z, z_score(m.value.mql, exact.mean_queue_length[c], m.std_error.mql));
    }
  }
  verdict(2, "ctmc_cross_validation", worst_z <= kZ && worst_res < kCtmcResidual,
          fmt("%zu instances; worst |z| %.2f; worst residual %.1e", battery.size(), worst_z, worst_res));
}

// ---------------------------------------------------------- criteria 3-5

struct SweepPoint {
  std::size_t n2;
  sim::MetricsReport sim;
  pbs::CtmcSolution<double> exact;
};

std::vector<SweepPoint> threshold_sweep(std::size_t capacity, const std::vector<ClassTraffic>& classes,
                                        double duration, std::size_t reps, std::uint64_t seed) {
  std::vector<SweepPoint> out;
  for (std::size_t n2 = 1; n2 <= capacity; ++n2) {
    const std::vector<std::size_t> t{capacity, n2};
    auto exact = pbs::ctmc_solve(pbs::ctmc_build<double>(classes, PbsThresholds(capacity, t)));
    auto rep = replicate(pbs_config(classes, t, duration, seed + n2), reps);
    out.push_back({n2, std::move(rep), std::move(exact)});
  }
  return out;
}

std::vector<ClassTraffic> symmetric_classes(double lambda, double scv_a, double scv_s) {
  return {{GEParams(lambda, scv_a), GEParams(1.0, scv_s), 1}, {GEParams(lambda, scv_a), GEParams(1.0, scv_s), 2}};
}

int sign(double x) { return (x > 0) - (x < 0); }

void blocking_trend(const std::vector<SweepPoint>& sweep, const std::vector<ClassTraffic>& ge) {
  // Direction from the exact chain with the same rates and exponential traffic.
  std::vector<ClassTraffic> expo;
  for (const auto& c : ge) expo.push_back({GEParams(c.arrival.rate()), GEParams(c.service.rate()), c.priority});
  const std::size_t n = sweep.size();
  std::vector<double> oracle[2];
  for (std::size_t n2 = 1; n2 <= n; ++n2) {
    const auto s = pbs::ctmc_solve(pbs::ctmc_build<double>(expo, PbsThresholds(n, {n, n2})));
    oracle[0].push_back(s.blocking[0]);
    oracle[1].push_back(s.blocking[1]);
  }
  int dir[2] = {sign(oracle[0].back() - oracle[0].front()), sign(oracle[1].back() - oracle[1].front())};
  bool ok = dir[0] != 0 && dir[1] == -dir[0];
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 1; i < n; ++i) ok = ok && sign(oracle[c][i] - oracle[c][i - 1]) == dir[c];
  }
  std::size_t separated = 0, steps = 0;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 1; i < n; ++i) {
      const auto& a = sweep[i - 1].sim.per_class[static_cast<std::size_t>(c)];
      const auto& b = sweep[i].sim.per_class[static_cast<std::size_t>(c)];
      const Interval ia{a.value.loss_prob, a.ci_half_width.loss_prob};
      const Interval ib{b.value.loss_prob, b.ci_half_width.loss_prob};
      ++steps;
      if (sign(ib.mean - ia.mean) == dir[c] && disjoint(ia, ib)) ++separated;
    }
  }
  ok = ok && separated == steps;
  verdict(3, "threshold_blocking_trend", ok,
          fmt("oracle: class 1 %s, class 2 %s in N2; %zu/%zu steps monotone and CI-separated",
              dir[0] > 0 ? "rises" : "falls", dir[1] > 0 ? "rises" : "falls", separated, steps));
}

void response_trend(const std::vector<SweepPoint>& sweep) {
  // N2 growing is the permissive direction for class 2.
  const std::size_t n = sweep.size();
  bool oracle_ok = true, steps_ok = true, ends_ok = true;
  double worst = 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 1; i < n; ++i) {
      oracle_ok = oracle_ok && sweep[i].exact.mean_response[c] >= sweep[i - 1].exact.mean_response[c] - 1e-9;
      const auto& a = sweep[i - 1].sim.per_class[c];
      const auto& b = sweep[i].sim.per_class[c];
      const double se = std::hypot(a.std_error.mean_response, b.std_error.mean_response);
      const double drop = (a.value.mean_response - b.value.mean_response) / se;
      worst = std::max(worst, drop);
      steps_ok = steps_ok && drop <= kZ;
    }
    const auto& first = sweep.front().sim.per_class[c];
    const auto& last = sweep.back().sim.per_class[c];
    ends_ok = ends_ok && last.value.mean_response > first.value.mean_response &&
              disjoint({first.value.mean_response, first.ci_half_width.mean_response},
                       {last.value.mean_response, last.ci_half_width.mean_response});
  }
  verdict(4, "threshold_response_trend", oracle_ok && steps_ok && ends_ok,
          fmt("class 1 %.3f -> %.3f s, class 2 %.3f -> %.3f s; largest step decrease %.2f SE",
              sweep.front().sim.per_class[0].value.mean_response, sweep.back().sim.per_class[0].value.mean_response,
              sweep.front().sim.per_class[1].value.mean_response, sweep.back().sim.per_class[1].value.mean_response,
              worst));
}

void throughput_coincidence(const std::vector<SweepPoint>& sweep) {
  auto thr = [](const sim::ClassMetrics& m) { return Interval{m.value.throughput, m.ci_half_width.throughput}; };
  const auto& shared = sweep.back().sim;
  const bool coincide = overlap(thr(shared.per_class[0]), thr(shared.per_class[1]));
  std::size_t apart = 0;
  for (std::size_t i = 0; i + 1 < sweep.size(); ++i) {
    const auto& r = sweep[i].sim;
    if (disjoint(thr(r.per_class[0]), thr(r.per_class[1]))) ++apart;
  }
  verdict(5, "throughput_coincidence", coincide && apart + 1 == sweep.size(),
          fmt("shared buffer: %.4f vs %.4f pkt/s; separated at %zu/%zu partial-sharing points",
              shared.per_class[0].value.throughput, shared.per_class[1].value.throughput, apart, sweep.size() - 1));
}

// ------------------------------------------------------------- criterion 6

void red_unit() {
  aqm::RedParams p;
  p.min_th = 5;
  p.max_th = 15;
  p.max_p = 0.1;
  aqm::RedParams g = p;
  g.gentle = true;
  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  check(aqm::red_pb(10, p), 0.05);
  check(aqm::red_pb(4, p), 0.0);
  check(aqm::red_pb(30, g), 1.0);
  check(aqm::red_pb(15, p), 1.0);
  check(aqm::red_pb(20, g), 0.4);
  check(aqm::red_pa(0.05, 10), 0.1);
  check(aqm::red_pa(0.05, 0), 0.05);
  check(aqm::red_pa(0.1, 10), 1.0);
  const double eps = 1e-9;
  const double jump = std::abs(aqm::red_pb(15 - eps, g) - aqm::red_pb(15, g));
  const bool continuous = jump < 1e-9 && aqm::red_pb(15, g) == 0.1;
  const bool saturates = aqm::red_pb(30, g) == 1.0 && aqm::red_pb(30 - eps, g) < 1.0;
  verdict(6, "red_unit_exactness", worst <= kRedExact && continuous && saturates,
          fmt("worst error %.1e; gentle jump at max_th %.1e; p_b(2 max_th) = %.17g", worst, jump,
              aqm::red_pb(30, g)));
}

// ------------------------------------------------------------- criterion 7

void red_count_uniformity() {
  aqm::RedParams p;
  p.weight = 1.0;
  p.min_th = 5;
  p.max_th = 15;
  p.max_p = 0.1;
  const std::size_t bins = 20;  // ceil(1 / 0.05)
  std::vector<std::size_t> observed(bins, 0);
  aqm::RedState state;
  RandomStream rng(1);
  std::size_t gap = 0, gaps = 0, outside = 0;
  for (int i = 0; i < 100000; ++i) {
    auto [d, next] = aqm::red_decide(state, 10, 100, p, rng);
    state = next;
    ++gap;
    if (d == aqm::AqmDecision::Drop) {
      if (gap >= 1 && gap <= bins) ++observed[gap - 1]; else ++outside;
      ++gaps;
      gap = 0;
    }
  }
  const double expected = static_cast<double>(gaps) / bins;
  double chi2 = 0.0;
  for (auto o : observed) chi2 += (o - expected) * (o - expected) / expected;
  const double critical = boost::math::quantile(boost::math::chi_squared(bins - 1.0), 1.0 - kChiAlpha);
  verdict(7, "red_count_uniformity", outside == 0 && chi2 < critical,
          fmt("%zu gaps; chi-square %.2f < %.2f (df %zu)", gaps, chi2, critical, bins - 1));
}

// ------------------------------------------------------------- criterion 8

void blue_trace() {
  std::ifstream in(std::string(AQMSIM_FIXTURE_DIR) + "/blue_trace.csv");
  aqm::BlueParams params;
  params.r1 = 0.02;
  params.r2 = 0.005;
  params.freeze_time = 0.125;
  aqm::BlueState state;
  std::string line;
  std::size_t events = 0;
  double worst = 0.0;
  bool parsed = static_cast<bool>(in);
  while (parsed && std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("time", 0) == 0) continue;
    std::istringstream row(line);
    std::string t, kind, expect;
    std::getline(row, t, ',');
    std::getline(row, kind, ',');
    std::getline(row, expect, ',');
    const auto ev = kind == "exceed" ? aqm::BlueEvent::QueueExceedsThreshold : aqm::BlueEvent::LinkIdle;
    if (kind != "exceed" && kind != "idle") parsed = false;
    state = aqm::blue_update(state, ev, std::stod(t), params);
    worst = std::max(worst, std::abs(state.p_m - std::stod(expect)));
    ++events;
  }
  verdict(8, "blue_determinism", parsed && events == 20 && worst <= kBlueExact,
          fmt("%zu events replayed; worst p_m error %.1e", events, worst));
}

// ------------------------------------------------------------- criterion 9

double geometric_mean_root(std::size_t n, double target) {
  auto mean = [n](double x) {
    double num = 0, den = 0, pw = 1;
    for (std::size_t k = 0; k <= n; ++k, pw *= x) {
      num += k * pw;
      den += pw;
    }
    return num / den;
  };
  double lo = 0.0, hi = 1.0;
  while (mean(hi) < target) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mean(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void max_entropy() {
  const auto uniform = pbs::me_distribution<double>({}, 3);
  const double ea = std::abs(pbs::entropy(uniform.distribution) - std::log(4.0));

  const auto mean_only = pbs::me_distribution<double>({{}, {1.0}, {}}, 3);
  const double root = geometric_mean_root(3, 1.0);
  const double eb = std::abs(mean_only.x - root);

  RandomStream rng(909);
  double worst_gap = -INFINITY, worst_res = 0.0;
  int cases = 0;
  for (; cases < 20; ++cases) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 11);
    Eigen::VectorXd q(static_cast<Eigen::Index>(n + 1));
    for (Eigen::Index k = 0; k < q.size(); ++k) q(k) = rng.exponential(1.0);
    q /= q.sum();
    const pbs::QueueDistribution<double> ref(q);
    const pbs::MeConstraints c{{1.0 - ref(0)}, {ref.mean()}, ref(n)};
    const auto me = pbs::me_distribution<double>(c, n);
    worst_gap = std::max(worst_gap, pbs::entropy(ref) - pbs::entropy(me.distribution));
    worst_res = std::max(worst_res, me.max_residual);
  }
  verdict(9, "max_entropy_solver", ea <= kMeEntropy && eb <= kMeRoot && worst_gap <= kMeEntropy && worst_res < kMeResidual,
          fmt("uniform err %.1e; x %.8f vs root %.8f; %d cases worst H(ref)-H(ME) %.1e, residual %.1e", ea,
              mean_only.x, root, cases, worst_gap, worst_res));
}

// ------------------------------------------------------------ criterion 10

void blocking_formula() {
  bool exact = true;
  RandomStream rng(31);
  for (std::size_t n : {1, 3, 7}) {
    Eigen::VectorXd q(static_cast<Eigen::Index>(n + 1));
    for (Eigen::Index k = 0; k < q.size(); ++k) q(k) = rng.exponential(1.0);
    q /= q.sum();
    const pbs::QueueDistribution<double> d(q);
    exact = exact && pbs::blocking_probability(d, 0.0, 1.0, n) == d(n);
  }
  const std::vector<ClassTraffic> mm1{{GEParams(0.5), GEParams(1.0), 1}};
  const auto mm = pbs::ctmc_solve(pbs::ctmc_build<double>(mm1, PbsThresholds(3, {3})));
  exact = exact && pbs::blocking_probability(mm.aggregate, 0.0, 1.0, 3) == mm.aggregate(3);

  // The exact batch blocking is itself checked against simulation.
  double worst = 0.0, worst_z = 0.0;
  for (double scv_s : {1.0, 3.0}) {
    const std::vector<ClassTraffic> ge{{GEParams(0.5, 3.0), GEParams(1.0, scv_s), 1}};
    const auto sol = pbs::ctmc_solve(pbs::ctmc_build<double>(ge, PbsThresholds(3, {3})));
    const double f = pbs::blocking_probability(sol.aggregate, ge[0].arrival.sigma(), 1.0, 3);
    worst = std::max(worst, std::abs(f - sol.blocking[0]));
    const auto rep = replicate(pbs_config(ge, {3}, 1e5, 5150), 20);
    worst_z = std::max(worst_z, z_score(rep.aggregate.value.loss_prob, sol.blocking[0],
                                        rep.aggregate.std_error.loss_prob));
  }

  const auto checks = cli::run_validation();
  bool harness_ok = true;
  std::string finding = "none";
  for (const auto& c : checks) {
    if (c.name.rfind("blocking_formula", 0) != 0) continue;
    harness_ok = harness_ok && c.status != cli::CheckStatus::Fail;
    if (c.status == cli::CheckStatus::Finding) finding = fmt("%s residual %.4f", c.name.c_str(), c.residual);
  }
  verdict(10, "blocking_formula_consistency", exact && worst <= kBlockingGe && worst_z <= kZ && harness_ok,
          fmt("sigma=0 reduction %s; scv=3 vs exact %.1e (exact vs sim |z| %.2f); validate finding: %s",
              exact ? "exact" : "inexact", worst, worst_z, finding.c_str()));
}

// ------------------------------------------------------------ criterion 11

void aimd_closed_loop() {
  sim::SimConfig cfg;
  cfg.capacity = 300;
  cfg.duration = 300;
  cfg.warmup = 30;
  cfg.seed = 4242;
  for (int i = 0; i < 4; ++i) cfg.sources.push_back(sim::AimdSource{0.05, 1.0, GEParams(1000.0), 1});
  aqm::RedParams red;
  red.min_th = 30;
  red.max_th = 90;
  red.max_p = 0.1;
  red.gentle = true;
  red.idle_packet_time = 1e-3;
  cfg.policy = sim::RedPolicy{red};
  const auto with_red = replicate(cfg, 1);
  cfg.policy = sim::DropTailPolicy{};
  const auto with_dt = replicate(cfg, 1);

  const auto& r = with_red.aggregate;
  const auto& d = with_dt.aggregate;
  const bool ok = r.value.utilization > kAimdUtilization && r.counts.forced_drops == 0 &&
                  d.value.utilization > kAimdUtilization &&
                  std::abs(r.value.utilization - d.value.utilization) < kEqualUtilization &&
                  d.value.mean_response > r.value.mean_response;
  verdict(11, "aimd_closed_loop", ok,
          fmt("RED util %.4f, forced drops %llu, sojourn %.4f s; Drop Tail util %.4f, sojourn %.4f s",
              r.value.utilization, static_cast<unsigned long long>(r.counts.forced_drops), r.value.mean_response,
              d.value.utilization, d.value.mean_response));
}

// ------------------------------------------------------------ criterion 12

const char* kDeterminismScenario = R"({
  "schema_version": 1,
  "name": "determinism",
  "capacity": 8,
  "duration": 4000,
  "seed": 99,
  "replications": 6,
  "sources": [
    {"type": "open", "priority": 1, "arrival": {"rate": 0.5, "scv": 2.0}, "service": {"rate": 1.0, "scv": 1.5}},
    {"type": "open", "priority": 2, "arrival": {"rate": 0.4, "scv": 3.0}, "service": {"rate": 1.0}}
  ],
  "policy": {"type": "pbs", "thresholds": [8, 4]},
  "sweep": {"parameter": "policy.thresholds.1", "values": [2, 4, 6]}
})";

void determinism() {
  const auto scenario = cli::parse_config(kDeterminismScenario);
  auto sweep_csv = [&] {
    std::ostringstream csv, diag;
    cli::cmd_sweep(scenario, csv, diag);
    return csv.str();
  };
  auto single = scenario;
  single.sweep.reset();
  auto run_csv = [&] {
    std::ostringstream csv, diag;
    cli::cmd_run(single, csv, diag);
    return csv.str();
  };
  const std::string s1 = sweep_csv(), s2 = sweep_csv();
  const std::string r1 = run_csv(), r2 = run_csv();
  const bool csv_identical = !s1.empty() && s1 == s2 && !r1.empty() && r1 == r2;

  std::string serial, parallel;
  {
    std::ostringstream a, b;
    const cli::CsvContext ctx{"determinism", single.sim.seed, "config", std::nullopt};
    cli::write_report_rows(a, sim::run_replications(single.sim, 6, 1), ctx);
    cli::write_report_rows(b, sim::run_replications(single.sim, 6, 4), ctx);
    serial = a.str();
    parallel = b.str();
  }
  const bool threads_identical = serial == parallel;
  verdict(12, "determinism", csv_identical && threads_identical,
          fmt("repeat run/sweep CSV %s (%zu bytes); serial vs 4-thread aggregate %s",
              csv_identical ? "byte-identical" : "DIFFERS", s1.size(),
              threads_identical ? "identical" : "DIFFERS"));
}

// ------------------------------------------------------------ criterion 13

void conservation_and_little() {
  verdict(13, "conservation_and_little",
          audit.runs > 0 && audit.not_conserved == 0 && audit.worst_little < kLittle && audit.little_exempt == 0,
          fmt("%zu replications audited; %zu not conserved; worst Little residual %.2e; %zu exempt", audit.runs,
              audit.not_conserved, audit.worst_little, audit.little_exempt));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  auto guarded = [](int id, const char* name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      verdict(id, name, false, std::string("exception: ") + e.what());
    }
  };
  guarded(1, "mm1n_exactness", mm1n_exactness);
  guarded(2, "ctmc_cross_validation", ctmc_cross_validation);
  guarded(3, "threshold_sweeps", [] {
    const auto ge = symmetric_classes(0.5, 2.0, 1.5);
    const auto sweep_ge = threshold_sweep(6, ge, 20000.0, 20, 3000);
    blocking_trend(sweep_ge, ge);
    const auto sweep_expo_service = threshold_sweep(6, symmetric_classes(0.5, 2.0, 1.0), 20000.0, 20, 4000);
    response_trend(sweep_expo_service);
    throughput_coincidence(sweep_ge);
  });
  guarded(6, "red_unit_exactness", red_unit);
  guarded(7, "red_count_uniformity", red_count_uniformity);
  guarded(8, "blue_determinism", blue_trace);
  guarded(9, "max_entropy_solver", max_entropy);
  guarded(10, "blocking_formula_consistency", blocking_formula);
  guarded(11, "aimd_closed_loop", aimd_closed_loop);
  guarded(12, "determinism", determinism);
  conservation_and_little();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d criteria failed; %.1f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
