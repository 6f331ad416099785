#include "aqmsim/validate.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "aqmsim/blocking.hpp"
#include "aqmsim/ctmc.hpp"
#include "aqmsim/max_entropy.hpp"
#include "aqmsim/sim.hpp"

namespace aqmsim::cli {

namespace {

using traffic::GEParams;
using pbs::ClassTraffic;
using pbs::PbsThresholds;

CheckResult within(std::string name, double residual, double tolerance, std::string detail = {}) {
  return CheckResult{std::move(name), residual <= tolerance ? CheckStatus::Pass : CheckStatus::Fail,
                     residual, tolerance, std::move(detail)};
}

// Root of mean(x) = target for the truncated geometric x^k on 0..n, by bisection.
double truncated_geometric_root(std::size_t n, double target) {
  auto mean = [n](double x) {
    double num = 0.0, den = 0.0, pw = 1.0;
    for (std::size_t k = 0; k <= n; ++k) {
      num += static_cast<double>(k) * pw;
      den += pw;
      pw *= x;
    }
    return num / den;
  };
  double lo = 1e-12, hi = 1e6;
  for (int i = 0; i < 400; ++i) {
    const double mid = std::sqrt(lo * hi);
    (mean(mid) < target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

sim::SimConfig pbs_sim(const std::vector<ClassTraffic>& classes, const PbsThresholds& t,
                       double duration, std::uint64_t seed) {
  sim::SimConfig cfg;
  cfg.capacity = t.capacity();
  cfg.policy = sim::PbsPolicy{std::vector<std::size_t>(t.values().begin(), t.values().end())};
  for (const auto& c : classes) cfg.sources.push_back(sim::OpenSource{c.arrival, c.service, c.priority});
  cfg.duration = duration;
  cfg.warmup = duration * 0.05;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
  const BlockingFormula formula =
      options.blocking ? options.blocking
                       : BlockingFormula([](const pbs::QueueDistribution<double>& d, double sigma,
                                            double share, std::size_t threshold) {
                           return pbs::blocking_probability(d, sigma, share, threshold);
                         });
  std::vector<CheckResult> out;

  // M/M/1/3 at rho = 0.5 against its closed form.
  {
    const std::vector<ClassTraffic> mm1{{GEParams(0.5), GEParams(1.0), 1}};
    const PbsThresholds t(3, {3});
    const auto sol = pbs::ctmc_solve(pbs::ctmc_build<double>(mm1, t));
    const double rho = 0.5;
    const double exact_block = (1 - rho) * std::pow(rho, 3) / (1 - std::pow(rho, 4));
    const double exact_mql = (rho + 2 * rho * rho + 3 * rho * rho * rho) / (1 + rho + rho * rho + rho * rho * rho);
    out.push_back(within("ctmc_mm1n_blocking", std::abs(sol.blocking[0] - exact_block), 1e-12));
    out.push_back(within("ctmc_mm1n_mql", std::abs(sol.mean_queue_length[0] - exact_mql), 1e-12));
    out.push_back(within("ctmc_residual", sol.residual, 1e-10));
  }

  // Simulation against the exact chain on a two-class PBS instance.
  {
    const std::vector<ClassTraffic> classes{{GEParams(0.6), GEParams(1.0), 1},
                                            {GEParams(0.6), GEParams(1.0), 2}};
    const PbsThresholds t(4, {4, 2});
    const auto exact = pbs::ctmc_solve(pbs::ctmc_build<double>(classes, t));
    const std::size_t reps = 10;
    const auto rep = sim::run_replications(pbs_sim(classes, t, 20000.0, 7), reps);
    double worst = 0.0;
    std::ostringstream detail;
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& m = rep.per_class[c];
      const double zb = std::abs(m.value.loss_prob - exact.blocking[c]) / m.std_error.loss_prob;
      const double zq = std::abs(m.value.mql - exact.mean_queue_length[c]) / m.std_error.mql;
      worst = std::max({worst, zb, zq});
      detail << "class " << c + 1 << " blocking " << m.value.loss_prob << " vs " << exact.blocking[c] << "; ";
    }
    // Four t statistics, family-wise level 0.01.
    const boost::math::students_t dist(static_cast<double>(reps - 1));
    const double limit = boost::math::quantile(boost::math::complement(dist, 0.01 / 8.0));
    out.push_back(within("sim_vs_ctmc_pbs", worst, limit, detail.str() + "residual in standard errors"));
  }

  // One-class PBS is Drop Tail, run for run.
  {
    const std::vector<ClassTraffic> one{{GEParams(0.9, 2.0), GEParams(1.0, 1.5), 1}};
    auto cfg = pbs_sim(one, PbsThresholds(5, {5}), 2000.0, 11);
    const auto with_pbs = sim::run(cfg);
    cfg.policy = sim::DropTailPolicy{};
    const auto with_droptail = sim::run(cfg);
    const double diff = std::abs(with_pbs.aggregate.value.loss_prob - with_droptail.aggregate.value.loss_prob) +
                        std::abs(with_pbs.aggregate.value.mql - with_droptail.aggregate.value.mql);
    out.push_back(within("pbs_single_class_is_droptail", diff, 0.0));
  }

  // Maximum entropy.
  {
    const auto uniform = pbs::me_distribution<double>({}, 3);
    out.push_back(within("me_unconstrained_uniform",
                         std::abs(pbs::entropy(uniform.distribution) - std::log(4.0)), 1e-9));
    const auto mean_only = pbs::me_distribution<double>({{}, {1.0}, {}}, 3);
    const double x = truncated_geometric_root(3, 1.0);
    out.push_back(within("me_mean_constraint_root", std::abs(mean_only.x - x), 1e-6));

    const std::vector<ClassTraffic> ge{{GEParams(0.5, 3.0), GEParams(1.0, 2.0), 1},
                                       {GEParams(0.4, 2.0), GEParams(1.0, 2.0), 2}};
    const auto ref = pbs::ctmc_solve(pbs::ctmc_build<double>(ge, PbsThresholds(5, {5, 3})));
    const auto& agg = ref.aggregate;
    pbs::MeConstraints c{{1.0 - agg(0)}, {agg.mean()}, agg(5)};
    const auto me = pbs::me_distribution<double>(c, 5);
    const double gap = pbs::entropy(agg) - pbs::entropy(me.distribution);
    out.push_back(within("me_entropy_dominance", std::max(0.0, gap), 1e-9));
  }

  // Blocking formula.
  {
    const std::vector<ClassTraffic> mm1{{GEParams(0.5), GEParams(1.0), 1}};
    const PbsThresholds t(3, {3});
    const auto sol = pbs::ctmc_solve(pbs::ctmc_build<double>(mm1, t));
    const double b = formula(sol.aggregate, mm1[0].arrival.sigma(), 1.0, 3);
    out.push_back(within("blocking_formula_poisson_reduction", std::abs(b - sol.aggregate(3)), 1e-15));

    const std::vector<ClassTraffic> ge1{{GEParams(0.5, 3.0), GEParams(1.0, 3.0), 1}};
    const auto ge_sol = pbs::ctmc_solve(pbs::ctmc_build<double>(ge1, t));
    const double bf = formula(ge_sol.aggregate, ge1[0].arrival.sigma(), 1.0, 3);
    out.push_back(within("blocking_formula_ge_vs_ctmc", std::abs(bf - ge_sol.blocking[0]), 1e-6));

    // With several classes the empty-queue correction makes the formula
    // differ from the exact batch blocking; reported, not failed.
    const std::vector<ClassTraffic> ge2{{GEParams(0.5, 3.0), GEParams(1.0, 2.0), 1},
                                        {GEParams(0.4, 3.0), GEParams(1.0, 2.0), 2}};
    const PbsThresholds t2(4, {4, 2});
    const auto sol2 = pbs::ctmc_solve(pbs::ctmc_build<double>(ge2, t2));
    double worst = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      const double share = pbs::offered_share(ge2, c);
      const double f = formula(sol2.aggregate, ge2[c].arrival.sigma(), share, t2.threshold(c + 1));
      worst = std::max(worst, std::abs(f - sol2.blocking[c]));
    }
    CheckResult r = within("blocking_formula_multiclass", worst, 1e-6,
                           "empty-queue correction vs exact batch blocking");
    if (r.status == CheckStatus::Fail && worst < 0.05) r.status = CheckStatus::Finding;
    out.push_back(r);
  }
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) noexcept {
  for (const auto& r : results) {
    if (r.status == CheckStatus::Fail) return false;
  }
  return true;
}

namespace {

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Finding: return "FINDING";
  }
  return "?";
}

}  // namespace

void print_table(std::ostream& out, const std::vector<CheckResult>& results) {
  out << std::left << std::setw(38) << "check" << std::setw(9) << "status" << std::setw(14) << "residual"
      << "tolerance\n";
  for (const auto& r : results) {
    out << std::left << std::setw(38) << r.name << std::setw(9) << status_name(r.status) << std::setw(14)
        << std::setprecision(4) << r.residual << r.tolerance;
    if (!r.detail.empty() && r.status != CheckStatus::Pass) out << "  (" << r.detail << ")";
    out << '\n';
  }
}

void print_json(std::ostream& out, const std::vector<CheckResult>& results) {
  nlohmann::json doc;
  doc["passed"] = all_passed(results);
  doc["checks"] = nlohmann::json::array();
  for (const auto& r : results) {
    doc["checks"].push_back({{"name", r.name},
                             {"status", status_name(r.status)},
                             {"residual", r.residual},
                             {"tolerance", r.tolerance},
                             {"detail", r.detail}});
  }
  out << doc.dump(2) << '\n';
}

}  // namespace aqmsim::cli
