#pragma once

// Tail-probability estimation with exact binomial intervals, empirical rates
// -(1/n) log p, semi-analytic tails of the independent-walks maximum and
// trend tables against the analytic rates.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "brwld/gw_core.hpp"
#include "brwld/rate_value.hpp"
#include "brwld/simulate.hpp"
#include "brwld/stats.hpp"
#include "brwld/step_law.hpp"

namespace brwld {

enum class Side { Upper, Lower };
std::string_view to_string(Side side);
Side parse_side(std::string_view name);

struct Event {
  Side side = Side::Upper;
  // On M_n / n^{1/r} for stretched-exponential steps, on M_n itself for lattice steps.
  double threshold = 0.0;
  Process process = Process::Brw;
};

struct TailEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double level = 0.99;
  int horizon_n = 0;
  std::optional<double> empirical_rate;  // empty when successes == 0 or n == 0
  // Rates implied by the interval ends; rate_high is empty when ci_low == 0.
  std::optional<double> rate_low;
  std::optional<double> rate_high;
  std::optional<RateValue> analytic_rate;
  std::uint64_t attempts = 0;  // conditioned-sampling attempts, extinct runs included
};

/// Fills p_hat, interval and empirical rates from a success count.
TailEstimate tail_estimate(std::uint64_t successes, std::uint64_t trials, int n, double level);

/// P*(event) from `replicas` runs conditioned on survival to cfg.horizon_n.
TailEstimate estimate_event(const SimConfig& cfg, const Event& event, std::size_t replicas,
                            const RunOptions& options = {}, double level = 0.99);

/// Limit of -(1/n) log P*(event) where the rates module supplies one, else empty.
std::optional<RateValue> analytic_event_rate(const SimConfig& cfg, const Event& event);

/// 1 - sum_k P(Z_n = k) c^k, optionally divided by P(Z_n > 0).
double semianalytic_ind_tail(const ZDistribution& zdist, double sn_cdf_at_y, bool conditional = false);

/// Same mixture via n-fold pgf composition in complement form: 1 - f^n(1 - p).
double ind_tail_via_pgf(const OffspringLaw& offspring, int n, double p_exceed, bool conditional = false);

/// Legendre transform of the lattice log-mgf at x (positions in real units).
RateValue lattice_rate(const LatticeStepLaw& step, double x);

struct SumAsMaxResult {
  std::optional<double> ratio;   // empty when no replica exceeded x_n
  Interval ci;                   // binomial interval scaled by the denominator
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double denominator = 0.0;      // n P(X >= x_n)
  bool outside_regime = false;   // x_n < 10 n^{1/(2-2r)}
};

/// Monte Carlo P(S_n > x_n) over n P(X > x_n).
SumAsMaxResult sumasmax_ratio(const StepLaw& step, int n, double x_n, std::size_t replicas,
                              std::uint64_t seed, unsigned workers = 1, double level = 0.99);

struct TrendRow {
  int n = 0;
  std::optional<double> empirical_rate;
  std::optional<double> analytic_rate;
  std::optional<double> gap;      // |empirical - analytic|
  double probability = 0.0;
  bool degenerate = false;        // n == 0 or probability 0
};

/// Independent-walks upper tail on a lattice, conditioned on survival:
/// P*(max >= x n) exactly, against Lambda*(x) - log m.
std::vector<TrendRow> trend_ind_upper_lattice(const LatticeStepLaw& step, const OffspringLaw& offspring,
                                              double x, std::span<const int> n_list);

/// -log of P(Z_{n+1} = k*) / P(Z_n = k*) against rho.
std::vector<TrendRow> trend_gw_lower(const OffspringLaw& offspring, std::span<const int> n_list);

/// Monte Carlo event rates, one conditioned run set per horizon.
std::vector<TrendRow> trend_mc_event(SimConfig cfg, const Event& event, std::span<const int> n_list,
                                     std::size_t replicas, const RunOptions& options = {});

/// True when every consecutive gap is no larger than the previous one.
bool gaps_decreasing(std::span<const TrendRow> rows);

}  // namespace brwld
