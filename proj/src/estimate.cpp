#include "brwld/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "brwld/errors.hpp"
#include "brwld/oracle.hpp"
#include "brwld/parallel.hpp"
#include "brwld/rates.hpp"

namespace brwld {

namespace {

constexpr std::size_t kMinReplicas = 100;

bool is_single_walk(const OffspringLaw& law) { return law.max_offspring() == 1 && law.prob(1) == 1.0; }

double position_scale(const StepModel& step, int n) {
  if (const auto* law = std::get_if<StepLaw>(&step)) {
    return n == 0 ? 1.0 : std::pow(static_cast<double>(n), 1.0 / law->r());
  }
  return 1.0;
}

bool event_holds(const BrwRunResult& run, const Event& event, double scaled_threshold) {
  // Conditioned runs always carry a maximum; an empty one is -inf.
  const double m = run.max_position.value_or(-std::numeric_limits<double>::infinity());
  return event.side == Side::Upper ? m >= scaled_threshold : m <= scaled_threshold;
}

// log E[e^{theta X}] and its first two derivatives for a lattice law.
struct LogMgf {
  double value;
  double mean;
  double variance;
};

LogMgf lattice_log_mgf(const LatticeStepLaw& step, double theta) {
  const auto pmf = step.pmf();
  const double h = step.spacing();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] > 0.0) top = std::max(top, theta * h * static_cast<double>(step.min_index() + static_cast<std::int64_t>(i)));
  }
  double z = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] == 0.0) continue;
    const double x = h * static_cast<double>(step.min_index() + static_cast<std::int64_t>(i));
    const double w = pmf[i] * std::exp(theta * x - top);
    z += w;
    s1 += w * x;
    s2 += w * x * x;
  }
  const double mean = s1 / z;
  return {top + std::log(z), mean, std::max(0.0, s2 / z - mean * mean)};
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::Upper ? "upper" : "lower"; }

Side parse_side(std::string_view name) {
  if (name == "upper") return Side::Upper;
  if (name == "lower") return Side::Lower;
  throw ValidationError("unknown event side '" + std::string(name) + "' (expected upper or lower)");
}

TailEstimate tail_estimate(std::uint64_t successes, std::uint64_t trials, int n, double level) {
  TailEstimate out;
  out.successes = successes;
  out.trials = trials;
  out.level = level;
  out.horizon_n = n;
  out.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
  const Interval ci = clopper_pearson(successes, trials, level);
  out.ci_low = std::min(ci.low, out.p_hat);
  out.ci_high = std::max(ci.high, out.p_hat);
  if (n > 0) {
    const double dn = static_cast<double>(n);
    if (successes > 0) out.empirical_rate = -std::log(out.p_hat) / dn;
    out.rate_low = -std::log(out.ci_high) / dn;
    if (out.ci_low > 0.0) out.rate_high = -std::log(out.ci_low) / dn;
  }
  return out;
}

std::optional<RateValue> analytic_event_rate(const SimConfig& cfg, const Event& event) {
  const double x = event.threshold;
  const bool upper = event.side == Side::Upper;
  if (const auto* step = std::get_if<StepLaw>(&cfg.step)) {
    if (is_single_walk(cfg.offspring)) {
      const bool deviating = upper ? x > 0.0 : x < 0.0;
      return RateValue::finite(deviating ? walk_rate(*step, x) : 0.0);
    }
    if (!cfg.offspring.supercritical()) return std::nullopt;
    const ModelParams params(cfg.offspring, *step);
    const double alpha = params.alpha();
    const bool deviating = upper ? x > alpha : x < alpha;
    if (!deviating) return RateValue::finite(0.0);
    if (event.process == Process::Brw) return RateValue::finite(brw_rate(params, x));
    return ind_rate(params, x);
  }
  const auto& lattice = std::get<LatticeStepLaw>(cfg.step);
  if (is_single_walk(cfg.offspring)) {
    const bool deviating = upper ? x > 0.0 : x < 0.0;
    return deviating ? lattice_rate(lattice, x) : RateValue::finite(0.0);
  }
  if (event.process == Process::Independent && upper && cfg.offspring.supercritical()) {
    // Thresholds scale linearly in n on the lattice: x stands for x n.
    const RateValue walk = lattice_rate(lattice, x);
    const double log_m = std::log(cfg.offspring.mean());
    if (walk.is_infinite()) return walk;
    return RateValue::finite(std::max(0.0, walk.value() - log_m));
  }
  return std::nullopt;
}

TailEstimate estimate_event(const SimConfig& cfg, const Event& event, std::size_t replicas,
                            const RunOptions& options, double level) {
  if (replicas < kMinReplicas) {
    throw ValidationError("estimate_event needs at least " + std::to_string(kMinReplicas) + " replicas, got " +
                          std::to_string(replicas));
  }
  SimConfig conditioned = cfg;
  conditioned.condition_on_survival = true;
  const ConditionedRuns runs = run_conditioned(conditioned, event.process, replicas, options);
  if (runs.truncated > 0) {
    throw ResourceLimit(std::to_string(runs.truncated) + " runs hit the population cap of " +
                        std::to_string(cfg.population_cap) + "; raise the cap or lower the horizon");
  }
  const bool lattice = std::holds_alternative<LatticeStepLaw>(cfg.step);
  const double scaled = lattice ? event.threshold : event.threshold * position_scale(cfg.step, cfg.horizon_n);
  std::uint64_t successes = 0;
  for (const auto& run : runs.runs) {
    if (event_holds(run, event, scaled)) ++successes;
  }
  TailEstimate out = tail_estimate(successes, runs.runs.size(), cfg.horizon_n, level);
  out.attempts = runs.attempts;
  out.analytic_rate = analytic_event_rate(cfg, event);
  return out;
}

double semianalytic_ind_tail(const ZDistribution& zdist, double sn_cdf_at_y, bool conditional) {
  if (zdist.tail_mass > 0.0) {
    throw DomainError("semianalytic_ind_tail needs the full law of Z_n (tail_mass = " +
                      std::to_string(zdist.tail_mass) + ")");
  }
  if (!(sn_cdf_at_y >= 0.0 && sn_cdf_at_y <= 1.0)) throw DomainError("sn_cdf_at_y must lie in [0, 1]");
  // Horner in c over P(Z_n = k).
  double mixture = 0.0;
  for (std::size_t k = zdist.probs.size(); k-- > 0;) mixture = mixture * sn_cdf_at_y + zdist.probs[k];
  const double tail = std::max(0.0, 1.0 - mixture);
  if (!conditional) return tail;
  const double alive = 1.0 - zdist.probs.at(0);
  if (!(alive > 0.0)) throw DomainError("conditional tail undefined: Z_n = 0 almost surely");
  return tail / alive;
}

double ind_tail_via_pgf(const OffspringLaw& offspring, int n, double p_exceed, bool conditional) {
  if (n < 0) throw DomainError("horizon must be non-negative");
  if (!(p_exceed >= 0.0 && p_exceed <= 1.0)) throw DomainError("p_exceed must lie in [0, 1]");
  double u = p_exceed;
  double alive = 1.0;
  for (int k = 0; k < n; ++k) {
    u = pgf_complement(offspring, u);
    alive = pgf_complement(offspring, alive);
  }
  if (!conditional) return u;
  if (!(alive > 0.0)) throw DomainError("conditional tail undefined: Z_n = 0 almost surely");
  return u / alive;
}

RateValue lattice_rate(const LatticeStepLaw& step, double x) {
  const auto pmf = step.pmf();
  const double h = step.spacing();
  std::int64_t lo = step.max_index(), hi = step.min_index();
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] == 0.0) continue;
    lo = std::min(lo, step.min_index() + static_cast<std::int64_t>(i));
    hi = std::max(hi, step.min_index() + static_cast<std::int64_t>(i));
  }
  const double x_lo = h * static_cast<double>(lo);
  const double x_hi = h * static_cast<double>(hi);
  if (x > x_hi || x < x_lo) return RateValue::infinity();
  if (x == x_hi) return RateValue::finite(-std::log(step.prob(hi)));
  if (x == x_lo) return RateValue::finite(-std::log(step.prob(lo)));
  const double mean = step.mean();
  if (x == mean) return RateValue::finite(0.0);

  // Lambda'(theta) is increasing; bracket the root then run safeguarded Newton.
  double a = 0.0, b = 0.0;
  double probe = x > mean ? 1.0 : -1.0;
  while ((lattice_log_mgf(step, probe).mean - x) * (x > mean ? 1.0 : -1.0) < 0.0) {
    probe *= 2.0;
    if (std::abs(probe) > 1e6) break;
  }
  if (x > mean) b = probe; else a = probe;
  double theta = 0.5 * (a + b);
  for (int iter = 0; iter < 200; ++iter) {
    const LogMgf g = lattice_log_mgf(step, theta);
    const double f = g.mean - x;
    if (std::abs(f) < 1e-14 * std::max(1.0, std::abs(x))) break;
    if (f > 0.0) b = theta; else a = theta;
    double next = g.variance > 0.0 ? theta - f / g.variance : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - theta) < 1e-15 * std::max(1.0, std::abs(theta))) {
      theta = next;
      break;
    }
    theta = next;
  }
  const LogMgf g = lattice_log_mgf(step, theta);
  return RateValue::finite(std::max(0.0, theta * x - g.value));
}

SumAsMaxResult sumasmax_ratio(const StepLaw& step, int n, double x_n, std::size_t replicas, std::uint64_t seed,
                              unsigned workers, double level) {
  if (!(x_n > 0.0)) throw DomainError("sumasmax_ratio needs x_n > 0");
  if (n < 1) throw DomainError("sumasmax_ratio needs n >= 1");
  if (replicas == 0) throw DomainError("sumasmax_ratio needs at least one replica");
  SumAsMaxResult out;
  out.trials = replicas;
  out.denominator = static_cast<double>(n) * tail_upper(step, x_n);
  out.outside_regime = x_n < 10.0 * std::pow(static_cast<double>(n), 1.0 / (2.0 - 2.0 * step.r()));

  constexpr std::size_t kBlock = 1u << 14;
  const std::size_t blocks = (replicas + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> counts(blocks, 0);
  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::size_t end = std::min(replicas, (b + 1) * kBlock);
    std::uint64_t hits = 0;
    for (std::size_t i = b * kBlock; i < end; ++i) {
      CounterRng rng(seed, i, StreamPurpose::SingleWalk);
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += sample(step, rng);
      if (s > x_n) ++hits;
    }
    counts[b] = hits;
  });
  for (const auto c : counts) out.successes += c;

  const Interval p = clopper_pearson(out.successes, out.trials, level);
  out.ci = {p.low / out.denominator, p.high / out.denominator};
  if (out.successes > 0) {
    out.ratio = static_cast<double>(out.successes) / static_cast<double>(out.trials) / out.denominator;
  }
  return out;
}

namespace {

void require_ascending(std::span<const int> n_list) {
  if (n_list.empty()) throw ValidationError("n_list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 0) throw ValidationError("n_list entries must be non-negative");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ValidationError("n_list must be strictly ascending");
  }
}

void fill_rates(TrendRow& row, double probability, std::optional<double> analytic) {
  row.probability = probability;
  row.analytic_rate = analytic;
  if (row.n == 0 || !(probability > 0.0)) {
    row.degenerate = true;
    return;
  }
  row.empirical_rate = -std::log(probability) / static_cast<double>(row.n);
  if (analytic) row.gap = std::abs(*row.empirical_rate - *analytic);
}

}  // namespace

std::vector<TrendRow> trend_ind_upper_lattice(const LatticeStepLaw& step, const OffspringLaw& offspring, double x,
                                              std::span<const int> n_list) {
  require_ascending(n_list);
  std::optional<double> analytic;
  const RateValue walk = lattice_rate(step, x);
  const double log_m = std::log(offspring.mean());
  if (walk.is_finite() && offspring.mean() > 0.0) analytic = walk.value() - log_m;

  std::vector<TrendRow> rows;
  for (const int n : n_list) {
    TrendRow row;
    row.n = n;
    const auto pmf = walk_pmf(step, n);
    // P(S_n >= x n): smallest lattice index at or above x n / h.
    const auto threshold = static_cast<std::int64_t>(std::ceil(x * n / step.spacing() - 1e-9));
    const std::int64_t lo = static_cast<std::int64_t>(n) * step.min_index();
    double exceed = 0.0;
    for (std::size_t i = pmf.size(); i-- > 0;) {
      if (lo + static_cast<std::int64_t>(i) < threshold) break;
      exceed += pmf[i];
    }
    const double p = ind_tail_via_pgf(offspring, n, std::min(1.0, exceed), true);
    fill_rates(row, p, analytic);
    rows.push_back(row);
  }
  return rows;
}

std::vector<TrendRow> trend_gw_lower(const OffspringLaw& offspring, std::span<const int> n_list) {
  require_ascending(n_list);
  if (offspring.regime() != Regime::Schroeder || offspring.rho().is_infinite()) {
    throw RegimeError("the geometric lower-deviation trend needs a Schroeder law");
  }
  const int k_star = offspring.k_star();
  const int cap = std::max(k_star, offspring.max_offspring());
  std::vector<TrendRow> rows;
  for (const int n : n_list) {
    TrendRow row;
    row.n = n;
    const double now = exact_zn_distribution(offspring, n, cap).probs.at(static_cast<std::size_t>(k_star));
    const double next = exact_zn_distribution(offspring, n + 1, cap).probs.at(static_cast<std::size_t>(k_star));
    row.analytic_rate = offspring.rho().value();
    row.probability = now;
    if (n == 0 || !(now > 0.0) || !(next > 0.0)) {
      row.degenerate = true;
    } else {
      row.empirical_rate = -std::log(next / now);
      row.gap = std::abs(*row.empirical_rate - *row.analytic_rate);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<TrendRow> trend_mc_event(SimConfig cfg, const Event& event, std::span<const int> n_list,
                                     std::size_t replicas, const RunOptions& options) {
  require_ascending(n_list);
  std::vector<TrendRow> rows;
  for (const int n : n_list) {
    cfg.horizon_n = n;
    TrendRow row;
    row.n = n;
    const TailEstimate est = estimate_event(cfg, event, replicas, options);
    std::optional<double> analytic;
    if (est.analytic_rate && est.analytic_rate->is_finite()) analytic = est.analytic_rate->value();
    fill_rates(row, est.p_hat, analytic);
    rows.push_back(row);
  }
  return rows;
}

bool gaps_decreasing(std::span<const TrendRow> rows) {
  std::optional<double> previous;
  for (const auto& row : rows) {
    if (!row.gap) return false;
    if (previous && *row.gap > *previous) return false;
    previous = row.gap;
  }
  return true;
}

}  // namespace brwld
