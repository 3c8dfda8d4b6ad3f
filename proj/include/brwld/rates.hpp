#pragma once

// Rate functions for M_n / n^{1/r} (branching random walk) and for the
// maximum of Z_n independent walks, plus the Boettcher-case scalings.

#include <span>
#include <string_view>
#include <vector>

#include "brwld/gw_core.hpp"
#include "brwld/rate_value.hpp"
#include "brwld/step_law.hpp"

namespace brwld {

/// Supercritical offspring law + stretched-exponential step law.
class ModelParams {
 public:
  ModelParams(OffspringLaw offspring, StepLaw step);

  const OffspringLaw& offspring() const { return offspring_; }
  const StepLaw& step() const { return step_; }
  double log_m() const;
  /// Almost-sure limit of M_n / n^{1/r}: (log m / lambda+)^{1/r}.
  double alpha() const;

 private:
  OffspringLaw offspring_;
  StepLaw step_;
};

/// Rate of S_n / n^{1/r}: lambda+ x^r for x >= 0, lambda- (-x)^r for x <= 0.
double walk_rate(const StepLaw& step, double x);

/// Upper end of the time fraction spent with few particles: 1 for x <= 0,
/// 1 - (x/alpha)^r for 0 < x < alpha.
double thinning_budget(const ModelParams& params, double x);

/// Lower-deviation rate of the branching walk below alpha, closed form.
double lower_rate_closed(const ModelParams& params, double x);

struct VariationalMinimum {
  double value = 0.0;
  double argmin_t = 0.0;
};

/// inf over t in [0, thinning_budget(x)] of
///   t rho + lambda- ((1-t)^{1/r} alpha - x)^r
/// by a 1024-point grid followed by golden-section refinement to width tol.
/// Boettcher laws delegate to lower_rate_closed (argmin reported as 0).
VariationalMinimum lower_rate_variational(const ModelParams& params, double x, double tol);

/// Branching random walk rate: lambda+ x^r - log m above alpha, the lower
/// deviation rate below.
double brw_rate(const ModelParams& params, double x);

/// Independent-walks rate. Infinite below alpha in the Boettcher regime.
RateValue ind_rate(const ModelParams& params, double x);

enum class BoettcherScale {
  Linear,          // log P ~ -predicted_coefficient * n
  DoubleLog,       // log |log P| ~ ...
  SuperExponential // log P ~ -n (k*)^n lambda- |x|^r
};

std::string_view to_string(BoettcherScale scale);

struct BoettcherPrediction {
  BoettcherScale scale = BoettcherScale::Linear;
  double predicted = 0.0;
};

/// The three asymptotic lines for the independent-walks maximum in the
/// Boettcher regime: x >= alpha gives log P, 0 <= x < alpha gives log|log P|,
/// x < 0 gives log P.
BoettcherPrediction boettcher_ind_scaling(const ModelParams& params, double x, int n);

enum class RateKind { I, IGW, H, IBRW, IIND, BOETTCHER_SCALING };

std::string_view to_string(RateKind kind);
RateKind parse_rate_kind(std::string_view name);

struct RateCurve {
  std::vector<double> x_grid;
  std::vector<RateValue> values;
  RateKind kind = RateKind::I;
};

/// Pointwise evaluation on an ascending grid. IGW is evaluated on growth
/// exponents in [0, log m]; BOETTCHER_SCALING gives the n-free coefficient of
/// each asymptotic line.
RateCurve rate_curve(const ModelParams& params, RateKind kind, std::span<const double> x_grid);

}  // namespace brwld
