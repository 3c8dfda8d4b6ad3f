#include <cmath>
#include <vector>

#include "doctest.h"

#include "brwld/errors.hpp"
#include "brwld/estimate.hpp"
#include "brwld/oracle.hpp"
#include "brwld/rates.hpp"

using namespace brwld;

namespace {

LatticeStepLaw pm_one() { return make_lattice_surrogate(1.0, {{-1, 0.5}, {1, 0.5}}); }
LatticeStepLaw lazy() { return make_lattice_surrogate(1.0, {{-1, 0.25}, {0, 0.5}, {1, 0.25}}); }
OffspringLaw quarter() { return OffspringLaw::from_pmf({{0, 0.25}, {2, 0.75}}); }

// Brute-force Legendre transform on a theta grid.
double brute_lattice_rate(const LatticeStepLaw& step, double x) {
  double best = 0.0;
  for (double theta = -20.0; theta <= 20.0; theta += 1e-4) {
    double mgf = 0.0;
    for (std::int64_t i = step.min_index(); i <= step.max_index(); ++i) {
      mgf += step.prob(i) * std::exp(theta * step.spacing() * static_cast<double>(i));
    }
    best = std::max(best, theta * x - std::log(mgf));
  }
  return best;
}

}  // namespace

TEST_CASE("tail estimates from counts") {
  const TailEstimate all = tail_estimate(500, 500, 7, 0.99);
  CHECK(all.p_hat == 1.0);
  REQUIRE(all.empirical_rate.has_value());
  CHECK(*all.empirical_rate == 0.0);
  CHECK(all.ci_high == 1.0);

  const TailEstimate none = tail_estimate(0, 500, 7, 0.99);
  CHECK(none.p_hat == 0.0);
  CHECK_FALSE(none.empirical_rate.has_value());
  CHECK(none.ci_low == 0.0);
  CHECK_FALSE(none.rate_high.has_value());

  const TailEstimate mid = tail_estimate(100, 1000, 5, 0.95);
  CHECK(mid.ci_low < 0.1);
  CHECK(mid.ci_high > 0.1);
  CHECK(*mid.empirical_rate == doctest::Approx(std::log(10.0) / 5.0).epsilon(1e-14));
  CHECK(*mid.rate_low <= *mid.empirical_rate);
  CHECK(*mid.rate_high >= *mid.empirical_rate);
}

TEST_CASE("event estimates") {
  // An event that always holds.
  SimConfig sure{quarter(), pm_one(), 3, 1'000'000, 8, true};
  const TailEstimate e = estimate_event(sure, Event{Side::Upper, -10.0, Process::Brw}, 200);
  CHECK(e.p_hat == 1.0);
  CHECK(*e.empirical_rate == 0.0);
  CHECK(e.attempts >= 200);

  // Single line of descent: the walk tail with the walk rate as its limit.
  SimConfig line{OffspringLaw::from_pmf({{1, 1.0}}), make_centered(0.5, 1.0, 1.0), 4, 1'000'000, 9, true};
  const Event up{Side::Upper, 1.0, Process::Brw};
  const TailEstimate w = estimate_event(line, up, 20'000);
  CHECK(w.analytic_rate.has_value());
  CHECK(w.analytic_rate->value() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.p_hat > 0.0);

  // Lattice tails against the exact conditional CDF.
  SimConfig lat{quarter(), pm_one(), 4, 1'000'000, 10, true};
  const LatticeDist exact = conditional_cdf(brw_max_cdf_exact(pm_one(), quarter(), 4));
  constexpr std::size_t kReplicas = 20'000;
  for (const double x : {-2.0, 0.0, 2.0}) {
    const TailEstimate t = estimate_event(lat, Event{Side::Upper, x, Process::Brw}, kReplicas);
    CHECK(std::abs(t.p_hat - (1.0 - exact.at(x - 0.5))) <= dkw_epsilon(kReplicas, 0.99));
    const TailEstimate l = estimate_event(lat, Event{Side::Lower, x, Process::Brw}, kReplicas);
    CHECK(std::abs(l.p_hat - exact.at(x)) <= dkw_epsilon(kReplicas, 0.99));
  }

  CHECK_THROWS_AS(estimate_event(lat, up, 10), ValidationError);
  SimConfig capped = lat;
  capped.population_cap = 2;
  CHECK_THROWS_AS(estimate_event(capped, up, 200), ResourceLimit);
}

TEST_CASE("analytic event rates") {
  SimConfig cfg{OffspringLaw::from_pmf({{1, 0.5}, {2, 0.5}}), make_centered(0.5, 1.0, 1.0), 4, 1'000'000, 1, true};
  const ModelParams p(cfg.offspring, std::get<StepLaw>(cfg.step));
  const auto above = analytic_event_rate(cfg, Event{Side::Upper, 2.0 * p.alpha(), Process::Brw});
  REQUIRE(above.has_value());
  CHECK(above->value() == doctest::Approx(brw_rate(p, 2.0 * p.alpha())).epsilon(1e-14));
  const auto typical = analytic_event_rate(cfg, Event{Side::Upper, 0.5 * p.alpha(), Process::Brw});
  CHECK(typical->value() == 0.0);
  const auto below = analytic_event_rate(cfg, Event{Side::Lower, 0.0, Process::Independent});
  CHECK(*below == ind_rate(p, 0.0));
}

TEST_CASE("semi-analytic independent-walks tail") {
  const OffspringLaw law = quarter();
  const ZDistribution z1 = exact_zn_distribution(law, 1, 4);
  CHECK(semianalytic_ind_tail(z1, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(semianalytic_ind_tail(z1, 0.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(semianalytic_ind_tail(z1, 0.5) == doctest::Approx(1.0 - 7.0 / 16.0).epsilon(1e-15));
  CHECK(semianalytic_ind_tail(z1, 0.5, true) == doctest::Approx((1.0 - 7.0 / 16.0) / 0.75).epsilon(1e-14));

  // Against the exact CDF of the independent-walks maximum.
  const LatticeStepLaw step = lazy();
  for (const int n : {2, 5, 8}) {
    const ZDistribution z = exact_zn_distribution(law, n, 1 << n);
    const LatticeDist g = ind_max_cdf_exact(step, law, n);
    const auto pmf = walk_pmf(step, n);
    double cum = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      cum += pmf[i];
      const double y = static_cast<double>(-n + static_cast<int>(i));
      CHECK(std::abs(semianalytic_ind_tail(z, std::min(1.0, cum)) - (1.0 - g.at(y))) <= 1e-12);
      CHECK(std::abs(ind_tail_via_pgf(law, n, std::max(0.0, 1.0 - cum)) - (1.0 - g.at(y))) <= 1e-12);
    }
  }

  const ZDistribution truncated = exact_zn_distribution(law, 6, 3);
  CHECK_THROWS_AS(semianalytic_ind_tail(truncated, 0.5), DomainError);
}

TEST_CASE("lattice walk rate against a brute-force transform") {
  const LatticeStepLaw step = lazy();
  for (const double x : {0.0, 0.3, 0.6, 0.9, -0.5}) {
    CHECK(lattice_rate(step, x).value() == doctest::Approx(brute_lattice_rate(step, x)).epsilon(1e-6));
  }
  CHECK(lattice_rate(step, 1.0).value() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(lattice_rate(step, 1.5).is_infinite());
  const LatticeStepLaw skew = make_lattice_surrogate(0.5, {{-2, 0.2}, {0, 0.4}, {1, 0.4}});
  CHECK(lattice_rate(skew, 0.25).value() == doctest::Approx(brute_lattice_rate(skew, 0.25)).epsilon(1e-6));
}

TEST_CASE("sum-as-max ratio") {
  const StepLaw law = make_centered(0.5, 1.0, 1.0);
  const SumAsMaxResult one = sumasmax_ratio(law, 1, 20.0, 200'000, 3);
  REQUIRE(one.ratio.has_value());
  CHECK(one.ci.contains(1.0));
  CHECK(one.denominator == doctest::Approx(tail_upper(law, 20.0)).epsilon(1e-14));

  const SumAsMaxResult small = sumasmax_ratio(law, 10, 1.0, 50'000, 4);
  CHECK(small.outside_regime);
  CHECK(std::abs(*small.ratio - 1.0) > 0.5);

  const SumAsMaxResult a = sumasmax_ratio(law, 5, 30.0, 50'000, 5, 1);
  const SumAsMaxResult b = sumasmax_ratio(law, 5, 30.0, 50'000, 5, 3);
  CHECK(a.successes == b.successes);
  CHECK_THROWS_AS(sumasmax_ratio(law, 0, 30.0, 100, 1), DomainError);
}

TEST_CASE("trend tables") {
  // Single line of descent: the exact tail converges to the walk rate.
  const std::vector<int> ns{10, 20, 40, 80};
  const auto control = trend_ind_upper_lattice(lazy(), OffspringLaw::from_pmf({{1, 1.0}}), 0.5, ns);
  CHECK(gaps_decreasing(control));
  CHECK(*control.back().gap < 0.05);

  const auto branching = trend_ind_upper_lattice(lazy(), quarter(), 0.9, ns);
  CHECK(gaps_decreasing(branching));
  CHECK(*branching.back().analytic_rate == doctest::Approx(lattice_rate(lazy(), 0.9).value() - std::log(1.5)).epsilon(1e-12));

  const std::vector<int> gw_ns{4, 8, 12};
  const auto gw = trend_gw_lower(quarter(), gw_ns);
  CHECK(*gw.back().gap < 1e-3);
  CHECK(*gw.back().analytic_rate == doctest::Approx(std::log(2.0)).epsilon(1e-11));

  const std::vector<int> zero{0};
  const auto degenerate = trend_ind_upper_lattice(lazy(), quarter(), 0.9, zero);
  CHECK(degenerate.front().degenerate);
  CHECK_FALSE(degenerate.front().empirical_rate.has_value());

  const std::vector<int> unsorted{5, 3};
  CHECK_THROWS_AS(trend_gw_lower(quarter(), unsorted), ValidationError);
}

TEST_CASE("interval coverage over repeated experiments") {
  // P(M_2 >= 2) for two children per individual on the +-1 lattice.
  const OffspringLaw law = OffspringLaw::from_pmf({{2, 1.0}});
  const double truth = 1.0 - brw_max_cdf_exact(pm_one(), law, 2).at(1.0);
  constexpr int kRepeats = 1000;
  constexpr double kLevel = 0.9;
  int covered = 0;
  for (int rep = 0; rep < kRepeats; ++rep) {
    SimConfig cfg{law, pm_one(), 2, 1000, static_cast<std::uint64_t>(1000 + rep), true};
    const TailEstimate t = estimate_event(cfg, Event{Side::Upper, 2.0, Process::Brw}, 100, {}, kLevel);
    if (t.ci_low <= truth && truth <= t.ci_high) ++covered;
  }
  CHECK(static_cast<double>(covered) / kRepeats >= kLevel - 0.02);
}
