#include "brwld/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "brwld/errors.hpp"
#include "brwld/estimate.hpp"
#include "brwld/io.hpp"
#include "brwld/oracle.hpp"
#include "brwld/rates.hpp"
#include "brwld/simulate.hpp"
#include "brwld/stats.hpp"

namespace brwld {

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
  Artifacts artifacts;
};

std::string sci(double v) {
  std::ostringstream ss;
  ss << std::setprecision(3) << std::scientific << v;
  return ss.str();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::setprecision(digits) << std::fixed << v;
  return ss.str();
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return out;
}

struct NamedParams {
  std::string name;
  ModelParams params;
};

// Three Schroeder parameter sets with different r, lambda and rho.
std::vector<NamedParams> schroeder_sets() {
  std::vector<NamedParams> sets;
  const double e = std::numbers::e;
  // m = e and rho = log 2 (p1 = 1/2, p0 = 0).
  sets.push_back({"A", ModelParams(validate_offspring({{1, 0.5}, {4, 3.0 - e}, {5, e - 2.5}}), make_centered(0.5, 1.0, 1.0))});
  sets.push_back({"B", ModelParams(validate_offspring({{1, 0.8}, {2, 0.1}, {5, 0.1}}), make_centered(0.5, 1.0, 2.0))});
  sets.push_back({"C", ModelParams(validate_offspring({{0, 0.1}, {2, 0.6}, {3, 0.3}}), make_centered(0.3, 1.0, 1.0))});
  return sets;
}

LatticeStepLaw pm_one_steps() { return make_lattice_surrogate(1.0, {{-1, 0.5}, {1, 0.5}}); }

OffspringLaw binary_quarter() { return OffspringLaw::from_pmf({{0, 0.25}, {2, 0.75}}); }

std::uint64_t criterion_seed(std::uint64_t seed, int id) { return seed + 1'000'003ull * static_cast<std::uint64_t>(id); }

Outcome criterion_h_equivalence() {
  Outcome out;
  CsvTable csv({"set", "x", "h_closed", "h_variational", "abs_diff", "tolerance"});
  double worst_excess = -1.0;
  std::size_t failures = 0;
  std::string worst_where;
  for (const auto& [name, params] : schroeder_sets()) {
    const double alpha = params.alpha();
    for (const double x : linspace(-3.0 * alpha, alpha - 1e-3, 200)) {
      const double closed = lower_rate_closed(params, x);
      const double variational = lower_rate_variational(params, x, 1e-10).value;
      const double diff = std::abs(variational - closed);
      const double tol = 1e-6 * (1.0 + std::abs(closed));
      if (diff > tol) ++failures;
      if (diff - tol > worst_excess) {
        worst_excess = diff - tol;
        worst_where = name + " x=" + fixed(x) + " diff=" + sci(diff);
      }
      csv.add_row({name, format_double(x), format_double(closed), format_double(variational), format_double(diff),
                   format_double(tol)});
    }
  }
  out.passed = failures == 0;
  out.detail = std::to_string(failures) + "/600 points outside tolerance; worst " + worst_where;
  out.artifacts["c1_h_equivalence.csv"] = csv.str();
  return out;
}

Outcome criterion_rate_structure() {
  Outcome out;
  CsvTable csv({"set", "check", "x", "brw", "ind", "ok"});
  bool near_zero = true, equal_above = true, dominates_below = true;
  double worst_alpha = 0.0;
  for (const auto& [name, params] : schroeder_sets()) {
    const double alpha = params.alpha();
    for (const double x : {alpha - 1e-6, alpha + 1e-6}) {
      const double v = brw_rate(params, x);
      const bool ok = std::abs(v) <= 1e-5;
      near_zero = near_zero && ok;
      worst_alpha = std::max(worst_alpha, std::abs(v));
      csv.add_row({name, "alpha", format_double(x), format_double(v), "nan", ok ? "1" : "0"});
    }
    for (const double x : linspace(alpha, 3.0 * alpha, 50)) {
      const double brw = brw_rate(params, x);
      const RateValue ind = ind_rate(params, x);
      const bool ok = ind == RateValue::finite(brw);
      equal_above = equal_above && ok;
      csv.add_row({name, "equal_above", format_double(x), format_double(brw), format_rate(ind), ok ? "1" : "0"});
    }
    for (const double x : linspace(-3.0 * alpha, alpha - 1e-3, 200)) {
      const double brw = brw_rate(params, x);
      const RateValue ind = ind_rate(params, x);
      const bool ok = ind >= RateValue::finite(brw);
      dominates_below = dominates_below && ok;
      csv.add_row({name, "ind_ge_brw", format_double(x), format_double(brw), format_rate(ind), ok ? "1" : "0"});
    }
  }
  out.passed = near_zero && equal_above && dominates_below;
  out.detail = std::string("|I_BRW(alpha+-1e-6)| max ") + sci(worst_alpha) + "; equal above alpha: " +
               (equal_above ? "yes" : "no") + "; ind >= brw below alpha: " + (dominates_below ? "yes" : "no");
  out.artifacts["c2_rate_structure.csv"] = csv.str();
  return out;
}

Outcome criterion_exact_domination() {
  Outcome out;
  CsvTable csv({"offspring", "n", "max_violation", "holds"});
  const LatticeStepLaw step = pm_one_steps();
  const std::vector<std::pair<std::string, OffspringLaw>> laws = {
      {"0:0.25|2:0.75", binary_quarter()},
      {"2:0.5|3:0.5", OffspringLaw::from_pmf({{2, 0.5}, {3, 0.5}})},
  };
  bool all = true;
  double worst = 0.0;
  for (const auto& [name, law] : laws) {
    for (int n = 0; n <= 6; ++n) {
      const DominationCheck check = domination_check_exact(step, law, n);
      all = all && check.holds;
      worst = std::max(worst, check.max_violation);
      csv.add_row({name, std::to_string(n), format_double(check.max_violation), check.holds ? "1" : "0"});
    }
  }
  out.passed = all;
  out.detail = "14 (law, n) pairs; max violation " + sci(worst);
  out.artifacts["c3_domination.csv"] = csv.str();
  return out;
}

Outcome criterion_mc_vs_oracle(std::uint64_t seed, unsigned workers) {
  Outcome out;
  constexpr int kN = 4;
  constexpr std::size_t kReplicas = 100'000;
  const LatticeStepLaw step = pm_one_steps();
  const OffspringLaw law = binary_quarter();
  SimConfig cfg{law, step, kN, 1'000'000, seed, true};
  RunOptions run_options;
  run_options.workers = workers;
  const double eps = dkw_epsilon(kReplicas, 0.99);

  CsvTable csv({"process", "x", "empirical_cdf", "oracle_cdf", "abs_diff", "dkw_epsilon"});
  bool passed = true;
  std::string detail;
  for (const Process process : {Process::Brw, Process::Independent}) {
    const std::string pname = process == Process::Brw ? "brw" : "ind";
    const ConditionedRuns runs = run_conditioned(cfg, process, kReplicas, run_options);
    const LatticeDist exact = conditional_cdf(process == Process::Brw ? brw_max_cdf_exact(step, law, kN)
                                                                       : ind_max_cdf_exact(step, law, kN));
    std::vector<std::int64_t> maxima;
    maxima.reserve(runs.runs.size());
    for (const auto& run : runs.runs) maxima.push_back(static_cast<std::int64_t>(std::lround(*run.max_position)));
    std::sort(maxima.begin(), maxima.end());
    double sup = 0.0;
    for (std::int64_t x = -kN; x <= kN; ++x) {
      const auto below = std::upper_bound(maxima.begin(), maxima.end(), x) - maxima.begin();
      const double empirical = static_cast<double>(below) / static_cast<double>(maxima.size());
      const double oracle = exact.at_index(x);
      const double diff = std::abs(empirical - oracle);
      sup = std::max(sup, diff);
      csv.add_row({pname, std::to_string(x), format_double(empirical), format_double(oracle), format_double(diff),
                   format_double(eps)});
    }
    passed = passed && runs.truncated == 0 && sup <= eps;
    detail += pname + " sup|F_emp-F_exact|=" + sci(sup) + " ";
  }
  out.passed = passed;
  out.detail = detail + "(DKW eps " + sci(eps) + ")";
  out.artifacts["c4_mc_vs_oracle.csv"] = csv.str();
  return out;
}

Outcome criterion_kesten_stigum(std::uint64_t seed, unsigned workers) {
  Outcome out;
  constexpr std::size_t kReplicas = 100'000;
  const OffspringLaw law = binary_quarter();
  SimConfig cfg{law, pm_one_steps(), 10, 1'000'000, seed, false};
  const WnSamples wn = wn_samples(cfg, kReplicas, workers);
  double sum = 0.0;
  for (const double w : wn.values) sum += w;
  const auto count = static_cast<double>(wn.values.size());
  const double mean = sum / count;
  double ss = 0.0;
  for (const double w : wn.values) ss += (w - mean) * (w - mean);
  const double se = std::sqrt(ss / (count - 1.0) / count);
  const double z = (mean - 1.0) / se;
  const bool mean_ok = wn.truncated == 0 && std::abs(z) <= 4.0;

  SimConfig deep = cfg;
  deep.horizon_n = 30;
  deep.population_cap = 1'000'000'000'000;
  const ExtinctionCount ext = extinction_by_horizon(deep, kReplicas, workers);
  const Interval ci = clopper_pearson(ext.extinct, ext.trials, 0.99);
  const double q = law.extinction();
  const bool ext_ok = ext.truncated == 0 && ci.contains(q);

  CsvTable wcsv({"n", "replicas", "mean", "std_error", "z_score", "truncated"});
  wcsv.add_row({"10", std::to_string(wn.values.size()), format_double(mean), format_double(se), format_double(z),
                std::to_string(wn.truncated)});
  CsvTable ecsv({"n", "extinct", "trials", "p_hat", "ci_low", "ci_high", "q", "truncated"});
  ecsv.add_row({"30", std::to_string(ext.extinct), std::to_string(ext.trials),
                format_double(static_cast<double>(ext.extinct) / static_cast<double>(ext.trials)),
                format_double(ci.low), format_double(ci.high), format_double(q), std::to_string(ext.truncated)});
  out.passed = mean_ok && ext_ok;
  out.detail = "mean W_10=" + fixed(mean) + " (z=" + fixed(z, 2) + "); extinction by 30: 99% CI [" +
               fixed(ci.low) + ", " + fixed(ci.high) + "] vs q=" + fixed(q);
  out.artifacts["c5_martingale_mean.csv"] = wcsv.str();
  out.artifacts["c5_extinction.csv"] = ecsv.str();
  return out;
}

Outcome criterion_gw_lower() {
  Outcome out;
  const OffspringLaw law = binary_quarter();
  std::vector<int> n_list;
  for (int n = 5; n <= 14; ++n) n_list.push_back(n);
  const auto rows = trend_gw_lower(law, n_list);
  const double target = std::exp(-law.rho().value());
  CsvTable csv({"n", "p_zn_kstar", "ratio", "target", "rel_err"});
  bool passed = true;
  std::string tail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double ratio = rows[i].empirical_rate ? std::exp(-*rows[i].empirical_rate) : 0.0;
    const double rel = std::abs(ratio - target) / target;
    if (i + 3 >= rows.size()) {
      passed = passed && rel <= 0.10;
      tail += " n=" + std::to_string(rows[i].n) + ":" + fixed(ratio, 5);
    }
    csv.add_row({std::to_string(rows[i].n), format_double(rows[i].probability), format_double(ratio),
                 format_double(target), format_double(rel)});
  }
  out.passed = passed;
  out.detail = "ratios" + tail + " vs e^-rho=" + fixed(target, 5);
  out.artifacts["c6_gw_lower.csv"] = csv.str();
  return out;
}

// Legendre transform by a plain grid over theta, independent of the library's Newton solve.
double brute_force_lattice_rate(const LatticeStepLaw& step, double x) {
  double best = 0.0;
  for (int i = -400'000; i <= 400'000; ++i) {
    const double theta = i * 5e-5;
    double mgf = 0.0;
    for (std::int64_t k = step.min_index(); k <= step.max_index(); ++k) {
      mgf += step.prob(k) * std::exp(theta * step.spacing() * static_cast<double>(k));
    }
    best = std::max(best, theta * x - std::log(mgf));
  }
  return best;
}

Outcome criterion_ind_upper_trend() {
  Outcome out;
  const LatticeStepLaw step = make_lattice_surrogate(1.0, {{-1, 0.25}, {0, 0.5}, {1, 0.25}});
  const OffspringLaw law = binary_quarter();
  constexpr double kX = 0.9;
  const std::vector<int> n_list = {10, 20, 30, 40};
  const auto rows = trend_ind_upper_lattice(step, law, kX, n_list);
  const double analytic = brute_force_lattice_rate(step, kX) - std::log(law.mean());

  CsvTable csv({"n", "x", "probability", "empirical_rate", "analytic_rate", "gap"});
  std::vector<TrendRow> checked;
  for (auto row : rows) {
    row.analytic_rate = analytic;
    if (row.empirical_rate) row.gap = std::abs(*row.empirical_rate - analytic);
    checked.push_back(row);
    csv.add_row({std::to_string(row.n), format_double(kX), format_double(row.probability),
                 format_optional(row.empirical_rate), format_double(analytic), format_optional(row.gap)});
  }
  const bool decreasing = gaps_decreasing(checked);
  const double final_gap = checked.back().gap.value_or(std::numeric_limits<double>::infinity());
  const bool small = final_gap < 0.10 * analytic;

  // The pgf-composition tail must agree with the explicit mixture over the law of Z_10.
  constexpr int kCheckN = 10;
  const auto pmf = walk_pmf(step, kCheckN);
  double exceed = 0.0;
  const auto threshold = static_cast<std::int64_t>(std::ceil(kX * kCheckN - 1e-9));
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (static_cast<std::int64_t>(i) - kCheckN >= threshold) exceed += pmf[i];
  }
  const ZDistribution z = exact_zn_distribution(law, kCheckN, 1 << kCheckN);
  const double mixture = semianalytic_ind_tail(z, 1.0 - exceed, true);
  const double composed = ind_tail_via_pgf(law, kCheckN, exceed, true);
  const bool consistent = std::abs(mixture - composed) <= 1e-9 * composed;

  out.passed = decreasing && small && consistent;
  std::string gaps;
  for (const auto& row : checked) gaps += " " + fixed(row.gap.value_or(-1.0), 5);
  out.detail = "gaps" + gaps + " (analytic " + fixed(analytic, 6) + ", final/analytic " +
               fixed(final_gap / analytic, 4) + "); mixture vs pgf at n=10 rel diff " +
               sci(std::abs(mixture - composed) / composed);
  out.artifacts["c7_ind_upper_trend.csv"] = csv.str();
  return out;
}

Outcome criterion_single_big_jump(std::uint64_t seed, unsigned workers) {
  Outcome out;
  const StepLaw step = make_centered(0.5, 1.0, 1.0);
  constexpr int kN = 10;
  constexpr double kX = 60.0;
  const SumAsMaxResult res = sumasmax_ratio(step, kN, kX, 10'000'000, seed, workers, 0.99);
  out.passed = res.ci.overlaps({0.7, 1.3});
  const bool warn = !res.ratio || *res.ratio < 0.5 || *res.ratio > 2.0;
  CsvTable csv({"n", "x_n", "successes", "trials", "denominator", "ratio", "ci_low", "ci_high", "outside_regime"});
  csv.add_row({std::to_string(kN), format_double(kX), std::to_string(res.successes), std::to_string(res.trials),
               format_double(res.denominator), format_optional(res.ratio), format_double(res.ci.low),
               format_double(res.ci.high), res.outside_regime ? "1" : "0"});
  out.detail = "ratio " + (res.ratio ? fixed(*res.ratio) : std::string("undefined")) + ", 99% CI [" +
               fixed(res.ci.low) + ", " + fixed(res.ci.high) + "] vs [0.7, 1.3]" +
               (warn ? "; warning: ratio outside [0.5, 2]" : "") +
               (res.outside_regime ? "; x_n below 10 n^{1/(2-2r)}" : "");
  out.artifacts["c8_single_big_jump.csv"] = csv.str();
  return out;
}

// Criteria whose artifacts depend on the worker count if anything does.
Artifacts monte_carlo_artifacts(std::uint64_t seed, unsigned workers) {
  Artifacts all;
  all.merge(criterion_mc_vs_oracle(criterion_seed(seed, 4), workers).artifacts);
  all.merge(criterion_kesten_stigum(criterion_seed(seed, 5), workers).artifacts);
  all.merge(criterion_single_big_jump(criterion_seed(seed, 8), workers).artifacts);
  return all;
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options) {
  const auto selected = [&](int id) { return options.only.empty() || options.only.count(id) > 0; };
  const std::uint64_t seed = options.seed;
  const unsigned workers = std::max(1u, options.workers);

  struct Spec {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> run;
  };
  const std::vector<Spec> specs = {
      {1, "variational H equals closed H", 2.0, [] { return criterion_h_equivalence(); }},
      {2, "rate function structure", 1.0, [] { return criterion_rate_structure(); }},
      {3, "exact domination on lattice", 5.0, [] { return criterion_exact_domination(); }},
      {4, "Monte Carlo vs exact oracle", 30.0, [&] { return criterion_mc_vs_oracle(criterion_seed(seed, 4), workers); }},
      {5, "martingale mean and extinction", 60.0, [&] { return criterion_kesten_stigum(criterion_seed(seed, 5), workers); }},
      {6, "geometric lower deviation of Z_n", 1.0, [] { return criterion_gw_lower(); }},
      {7, "independent-walks upper trend", 10.0, [] { return criterion_ind_upper_trend(); }},
      {8, "single big jump ratio", 120.0, [&] { return criterion_single_big_jump(criterion_seed(seed, 8), workers); }},
  };

  std::vector<CriterionResult> results;
  Artifacts produced;
  for (const auto& spec : specs) {
    if (!selected(spec.id)) continue;
    CriterionResult r;
    r.id = spec.id;
    r.name = spec.name;
    r.time_limit = spec.limit;
    const auto start = std::chrono::steady_clock::now();
    try {
      Outcome o = spec.run();
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      r.passed = o.passed && r.seconds < spec.limit;
      r.detail = o.detail;
      if (r.seconds >= spec.limit) r.detail += "; runtime " + fixed(r.seconds, 2) + " s over the bound";
      for (auto& [file, text] : o.artifacts) produced[file] = std::move(text);
    } catch (const std::exception& e) {
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }

  if (selected(9)) {
    CriterionResult r;
    r.id = 9;
    r.name = "determinism across worker counts";
    const auto start = std::chrono::steady_clock::now();
    try {
      Artifacts reference;
      for (const char* file : {"c4_mc_vs_oracle.csv", "c5_martingale_mean.csv", "c5_extinction.csv",
                               "c8_single_big_jump.csv"}) {
        if (produced.count(file)) reference[file] = produced.at(file);
      }
      if (reference.size() < 4) reference = monte_carlo_artifacts(seed, workers);
      const unsigned other = workers == 1 ? 4 : 1;
      const Artifacts rerun = monte_carlo_artifacts(seed, other);
      std::size_t mismatches = 0;
      for (const auto& [file, text] : reference) {
        if (!rerun.count(file) || rerun.at(file) != text) ++mismatches;
      }
      r.passed = mismatches == 0;
      r.detail = std::to_string(reference.size() - mismatches) + "/" + std::to_string(reference.size()) +
                 " Monte Carlo artifacts byte-identical between " + std::to_string(workers) + " and " +
                 std::to_string(other) + " workers";
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(std::move(r));
  }

  // Write artifacts and a summary, then confirm every file parses back.
  CsvTable summary({"id", "name", "passed"});
  for (const auto& r : results) summary.add_row({std::to_string(r.id), r.name, r.passed ? "1" : "0"});
  produced["verify_summary.csv"] = summary.str();
  std::vector<std::string> unreadable;
  for (const auto& [file, text] : produced) {
    const auto path = options.out_dir / file;
    write_text(path, text);
    const std::string problem = check_csv(read_text(path));
    if (!problem.empty()) unreadable.push_back(file + ": " + problem);
  }
  if (!unreadable.empty()) {
    CriterionResult r;
    r.id = 0;
    r.name = "artifacts parse";
    r.passed = false;
    for (const auto& u : unreadable) r.detail += u + "; ";
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_acceptance_table(const std::vector<CriterionResult>& results) {
  std::ostringstream ss;
  for (const auto& r : results) {
    ss << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << std::left << std::setw(36) << r.name << ' '
       << std::right << std::setw(8) << fixed(r.seconds, 2) << " s  " << r.detail << '\n';
  }
  const auto passed = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  ss << passed << "/" << results.size() << " criteria passed\n";
  return ss.str();
}

}  // namespace brwld
