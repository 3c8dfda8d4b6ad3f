#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"

#include "brwld/errors.hpp"
#include "brwld/gw_core.hpp"
#include "brwld/simulate.hpp"
#include "brwld/stats.hpp"

using namespace brwld;

namespace {

LatticeStepLaw pm_one() { return make_lattice_surrogate(1.0, {{-1, 0.5}, {1, 0.5}}); }

SimConfig lattice_cfg(std::map<int, double> offspring, int n, std::uint64_t seed = 17) {
  return SimConfig{OffspringLaw::from_pmf(offspring), pm_one(), n, 1'000'000, seed, false};
}

std::map<long, std::size_t> max_histogram(const std::vector<BrwRunResult>& runs) {
  std::map<long, std::size_t> h;
  for (const auto& r : runs) {
    if (r.max_position) ++h[std::lround(*r.max_position)];
  }
  return h;
}

void check_frequency(std::size_t count, std::size_t total, double p) {
  const Interval ci = clopper_pearson(count, total, 0.999);
  CHECK(ci.contains(p));
}

}  // namespace

TEST_CASE("single-line tree reduces to a random walk") {
  for (const Process process : {Process::Brw, Process::Independent}) {
    const auto runs = run_replicas(lattice_cfg({{1, 1.0}}, 2), process, 40'000);
    auto h = max_histogram(runs);
    check_frequency(h[-2], runs.size(), 0.25);
    check_frequency(h[0], runs.size(), 0.5);
    check_frequency(h[2], runs.size(), 0.25);
    CHECK(h.size() == 3);
  }
}

TEST_CASE("extinct populations report no maximum") {
  for (const Process process : {Process::Brw, Process::Independent}) {
    for (const int n : {1, 3}) {
      const BrwRunResult r = simulate(lattice_cfg({{0, 1.0}}, n), process, 0);
      CHECK_FALSE(r.survived_to_n);
      CHECK_FALSE(r.max_position.has_value());
      CHECK(r.population_path.size() == static_cast<std::size_t>(n) + 1);
      CHECK(r.population_path.front() == 1);
      CHECK(r.population_path.back() == 0);
    }
  }
}

TEST_CASE("depth one: two children give P(M_1 = 1) = 3/4 for both processes") {
  for (const Process process : {Process::Brw, Process::Independent}) {
    const auto runs = run_replicas(lattice_cfg({{2, 1.0}}, 1), process, 40'000);
    auto h = max_histogram(runs);
    check_frequency(h[1], runs.size(), 0.75);
    check_frequency(h[-1], runs.size(), 0.25);
  }
}

TEST_CASE("run results satisfy their invariants") {
  const SimConfig cfg = lattice_cfg({{0, 0.25}, {2, 0.75}}, 5);
  for (const auto& r : run_replicas(cfg, Process::Brw, 2000)) {
    CHECK(r.population_path.front() == 1);
    CHECK(r.survived_to_n == (r.population_path.back() > 0));
    CHECK(r.max_position.has_value() == r.survived_to_n);
  }
}

TEST_CASE("truncation is flagged, never silently capped") {
  SimConfig cfg = lattice_cfg({{2, 1.0}}, 6);
  cfg.population_cap = 10;
  for (const Process process : {Process::Brw, Process::Independent}) {
    const BrwRunResult r = simulate(cfg, process, 0);
    CHECK(r.truncated);
    CHECK_FALSE(r.survived_to_n);
  }
  SimConfig bad = cfg;
  bad.population_cap = 0;
  CHECK_THROWS_AS(simulate_brw(bad, 0), ValidationError);
  bad = cfg;
  bad.horizon_n = -1;
  CHECK_THROWS_AS(simulate_brw(bad, 0), ValidationError);
}

TEST_CASE("conditioning on survival") {
  SimConfig sure = lattice_cfg({{2, 1.0}}, 3);
  sure.condition_on_survival = true;
  const auto all = run_conditioned(sure, Process::Brw, 500);
  CHECK(all.acceptance_rate == 1.0);
  CHECK(all.runs.size() == 500);

  SimConfig cfg = lattice_cfg({{0, 0.25}, {2, 0.75}}, 15);
  cfg.condition_on_survival = true;
  const auto c = run_conditioned(cfg, Process::Independent, 20'000);
  const double survive = 1.0 - pgf_iterate(cfg.offspring, 0.0, 15);
  CHECK(std::abs(survive - 2.0 / 3.0) < 1e-4);
  const Interval ci = clopper_pearson(c.runs.size(), c.attempts - c.truncated, 0.999);
  CHECK(ci.contains(survive));
  for (const auto& r : c.runs) CHECK(r.survived_to_n);

  SimConfig dead = lattice_cfg({{0, 1.0}}, 2);
  dead.condition_on_survival = true;
  CHECK_THROWS_AS(run_conditioned(dead, Process::Brw, 10), SimulationAbort);
  CHECK_THROWS_AS(run_conditioned(lattice_cfg({{2, 1.0}}, 2), Process::Brw, 10), ValidationError);
}

TEST_CASE("results do not depend on the worker count") {
  SimConfig cfg = lattice_cfg({{0, 0.25}, {2, 0.75}}, 6, 1234);
  cfg.step = make_centered(0.5, 1.0, 1.0);
  for (const Process process : {Process::Brw, Process::Independent}) {
    const auto one = run_replicas(cfg, process, 3000, 1);
    const auto many = run_replicas(cfg, process, 3000, 4);
    REQUIRE(one.size() == many.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].max_position == many[i].max_position);
      CHECK(one[i].population_path == many[i].population_path);
    }
    SimConfig cond = cfg;
    cond.condition_on_survival = true;
    RunOptions a, b;
    b.workers = 3;
    const auto ca = run_conditioned(cond, process, 2000, a);
    const auto cb = run_conditioned(cond, process, 2000, b);
    CHECK(ca.attempts == cb.attempts);
    for (std::size_t i = 0; i < ca.runs.size(); ++i) CHECK(ca.runs[i].max_position == cb.runs[i].max_position);
  }
}

TEST_CASE("population marginal matches the exact law of Z_n") {
  const OffspringLaw law = OffspringLaw::from_pmf({{0, 0.25}, {1, 0.25}, {2, 0.5}});
  for (const int n : {3, 6, 8}) {
    const SimConfig cfg{law, pm_one(), n, 1'000'000, 77, false};
    constexpr std::size_t kReplicas = 100'000;
    const auto runs = run_replicas(cfg, Process::Brw, kReplicas);
    const ZDistribution exact = exact_zn_distribution(law, n, 1 << n);
    std::vector<double> counts(exact.probs.size(), 0.0);
    for (const auto& r : runs) counts[static_cast<std::size_t>(r.population_path.back())] += 1.0;
    double emp = 0.0, ref = 0.0, sup = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      emp += counts[k] / kReplicas;
      ref += exact.probs[k];
      sup = std::max(sup, std::abs(emp - ref));
    }
    CHECK(sup <= dkw_epsilon(kReplicas, 0.99));
  }
}

TEST_CASE("offspring totals by binomial splitting keep the right law") {
  const OffspringLaw deterministic = OffspringLaw::from_pmf({{2, 1.0}});
  CounterRng rng(5, 0, StreamPurpose::Population);
  CHECK(sample_offspring_total(deterministic, 1000, rng) == 2000);

  const OffspringLaw law = OffspringLaw::from_pmf({{1, 0.5}, {3, 0.3}, {4, 0.2}});
  constexpr int kTrials = 20'000;
  constexpr std::int64_t kParents = 500;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    CounterRng g(6, static_cast<std::uint64_t>(t), StreamPurpose::Population);
    const auto total = static_cast<double>(sample_offspring_total(law, kParents, g));
    sum += total;
    sq += total * total;
  }
  const double mean = sum / kTrials;
  const double var = sq / kTrials - mean * mean;
  const double m = law.mean();
  const double v = 0.5 * 1 + 0.3 * 9 + 0.2 * 16 - m * m;
  CHECK(std::abs(mean - kParents * m) <= 5.0 * std::sqrt(kParents * v / kTrials));
  CHECK(var == doctest::Approx(kParents * v).epsilon(0.05));
}

TEST_CASE("martingale samples") {
  const auto w0 = wn_samples(lattice_cfg({{0, 0.25}, {2, 0.75}}, 0), 100);
  for (const double w : w0.values) CHECK(w == 1.0);
  const auto w2 = wn_samples(lattice_cfg({{2, 1.0}}, 9), 100);
  for (const double w : w2.values) CHECK(w == 1.0);

  const auto w = wn_samples(lattice_cfg({{0, 0.25}, {2, 0.75}}, 10), 100'000);
  CHECK(w.truncated == 0);
  double sum = 0.0, sq = 0.0;
  for (const double x : w.values) {
    sum += x;
    sq += x * x;
  }
  const double n = static_cast<double>(w.values.size());
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) <= 4.0 * se);
}

TEST_CASE("extinction frequency by a horizon") {
  SimConfig cfg = lattice_cfg({{0, 0.25}, {2, 0.75}}, 20);
  cfg.population_cap = 1'000'000'000'000;
  const auto ext = extinction_by_horizon(cfg, 20'000);
  CHECK(ext.truncated == 0);
  CHECK(clopper_pearson(ext.extinct, ext.trials, 0.999).contains(pgf_iterate(cfg.offspring, 0.0, 20)));
}

TEST_CASE("depth-one equivalence by a two-sample KS test") {
  SimConfig cfg = lattice_cfg({{0, 0.2}, {1, 0.2}, {3, 0.6}}, 1, 4242);
  cfg.step = make_centered(0.5, 1.0, 1.5);
  const auto brw = run_replicas(cfg, Process::Brw, 20'000);
  const auto ind = run_replicas(cfg, Process::Independent, 20'000);
  std::vector<double> a, b;
  for (const auto& r : brw) a.push_back(r.max_position.value_or(-1e300));
  for (const auto& r : ind) b.push_back(r.max_position.value_or(-1e300));
  CHECK(ks_two_sample_statistic(a, b) <= ks_two_sample_critical(a.size(), b.size(), 0.001));
}

TEST_CASE("domination experiment") {
  const std::vector<double> xs = {-4, -3, -2, -1, 0, 1, 2, 3, 4};
  SimConfig zero = lattice_cfg({{0, 0.25}, {2, 0.75}}, 0);
  const auto e0 = domination_experiment(zero, 1000, xs);
  for (const auto& p : e0.points) {
    CHECK(p.cdf_brw == (p.x >= 0 ? 1.0 : 0.0));
    CHECK(p.cdf_ind == p.cdf_brw);
  }
  SimConfig one = lattice_cfg({{0, 0.25}, {2, 0.75}}, 1);
  one.condition_on_survival = true;
  CHECK_FALSE(domination_experiment(one, 20'000, xs).any_violation);
  SimConfig four = lattice_cfg({{0, 0.25}, {2, 0.75}}, 4);
  four.condition_on_survival = true;
  const auto e4 = domination_experiment(four, 20'000, xs);
  CHECK_FALSE(e4.any_violation);
  CHECK(e4.truncated == 0);
  for (const auto& p : e4.points) CHECK(p.cdf_brw + p.radius_brw >= p.cdf_ind - p.radius_ind);
}

TEST_CASE("superlinear speed corridor") {
  SimConfig cfg{OffspringLaw::from_pmf({{1, 0.8}, {2, 0.2}}), make_centered(0.5, 1.0, 1.0), 20, 1'000'000, 31, true};
  const double alpha = std::pow(std::log(1.2), 2.0);
  for (const int n : {20, 30, 40}) {
    cfg.horizon_n = n;
    const auto runs = run_conditioned(cfg, Process::Brw, 400);
    std::vector<double> scaled;
    for (const auto& r : runs.runs) scaled.push_back(*r.max_position / (static_cast<double>(n) * n));
    std::nth_element(scaled.begin(), scaled.begin() + scaled.size() / 2, scaled.end());
    const double median = scaled[scaled.size() / 2];
    CHECK(median > 0.0);
    CHECK(median < 3.0 * alpha);
  }
}
