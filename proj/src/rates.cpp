#include "brwld/rates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "brwld/errors.hpp"

namespace brwld {

namespace {

constexpr int kVariationalGridPoints = 1024;

void require_below_alpha(const ModelParams& params, double x, const char* what) {
  if (!(x < params.alpha())) {
    throw DomainError(std::string(what) + " is defined only for x < alpha");
  }
}

// Only called with x >= alpha, where the exact value is non-negative.
double upper_branch(const ModelParams& params, double x) {
  if (x == params.alpha()) return 0.0;
  return std::max(0.0, params.step().lambda_plus() * std::pow(x, params.step().r()) - params.log_m());
}

}  // namespace

ModelParams::ModelParams(OffspringLaw offspring, StepLaw step)
    : offspring_(std::move(offspring)), step_(step) {
  if (!offspring_.supercritical() || offspring_.prob(1) == 1.0) {
    throw ValidationError("model parameters need a supercritical offspring law (m > 1)");
  }
}

double ModelParams::log_m() const { return std::log(offspring_.mean()); }

double ModelParams::alpha() const {
  return std::pow(log_m() / step_.lambda_plus(), 1.0 / step_.r());
}

double walk_rate(const StepLaw& step, double x) {
  if (x >= 0.0) return step.lambda_plus() * std::pow(x, step.r());
  return step.lambda_minus() * std::pow(-x, step.r());
}

double thinning_budget(const ModelParams& params, double x) {
  require_below_alpha(params, x, "thinning_budget");
  if (x <= 0.0) return 1.0;
  return 1.0 - std::pow(x / params.alpha(), params.step().r());
}

double lower_rate_closed(const ModelParams& params, double x) {
  require_below_alpha(params, x, "lower_rate_closed");
  const double r = params.step().r();
  const double lm = params.step().lambda_minus();
  const double alpha = params.alpha();
  const OffspringLaw& law = params.offspring();
  if (law.regime() == Regime::Boettcher) {
    return law.k_star() * lm * std::pow(alpha - x, r);
  }
  const double rho = law.rho().value();
  if (x <= 0.0) {
    return std::min(rho + lm * std::pow(-x, r), lm * std::pow(alpha - x, r));
  }
  return std::min(lm * std::pow(alpha, r), rho) * (1.0 - std::pow(x / alpha, r));
}

VariationalMinimum lower_rate_variational(const ModelParams& params, double x, double tol) {
  require_below_alpha(params, x, "lower_rate_variational");
  if (!(tol > 0.0)) throw DomainError("lower_rate_variational needs tol > 0");
  const OffspringLaw& law = params.offspring();
  if (law.regime() == Regime::Boettcher) return {lower_rate_closed(params, x), 0.0};

  const double rho = law.rho().value();
  const double r = params.step().r();
  const double lm = params.step().lambda_minus();
  const double alpha = params.alpha();
  const double budget = thinning_budget(params, x);
  const auto objective = [&](double t) {
    const double gap = std::max(0.0, std::pow(1.0 - t, 1.0 / r) * alpha - x);
    return t * rho + lm * std::pow(gap, r);
  };

  // The objective need not be unimodal on [0, budget]; refine around the best grid cell only.
  int best = 0;
  double best_value = objective(0.0);
  const auto grid_t = [&](int i) { return budget * i / (kVariationalGridPoints - 1); };
  for (int i = 1; i < kVariationalGridPoints; ++i) {
    const double v = objective(grid_t(i));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = grid_t(std::max(best - 1, 0));
  double hi = grid_t(std::min(best + 1, kVariationalGridPoints - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
  }
  VariationalMinimum result{best_value, grid_t(best)};
  for (const double t : std::array{lo, hi, 0.5 * (lo + hi)}) {
    const double v = objective(t);
    if (v < result.value) result = {v, t};
  }
  return result;
}

double brw_rate(const ModelParams& params, double x) {
  if (x >= params.alpha()) return upper_branch(params, x);
  return lower_rate_closed(params, x);
}

RateValue ind_rate(const ModelParams& params, double x) {
  const double alpha = params.alpha();
  if (x >= alpha) return RateValue::finite(upper_branch(params, x));
  const OffspringLaw& law = params.offspring();
  if (law.regime() == Regime::Boettcher) return RateValue::infinity();
  const double rho = law.rho().value();
  const double r = params.step().r();
  if (x >= 0.0) {
    return RateValue::finite(rho * (1.0 - params.step().lambda_plus() * std::pow(x, r) / params.log_m()));
  }
  return RateValue::finite(law.k_star() * params.step().lambda_minus() * std::pow(-x, r) + rho);
}

std::string_view to_string(BoettcherScale scale) {
  switch (scale) {
    case BoettcherScale::Linear: return "linear";
    case BoettcherScale::DoubleLog: return "double_log";
    case BoettcherScale::SuperExponential: return "super_exponential";
  }
  return "unknown";
}

BoettcherPrediction boettcher_ind_scaling(const ModelParams& params, double x, int n) {
  const OffspringLaw& law = params.offspring();
  if (law.regime() != Regime::Boettcher) {
    throw RegimeError("boettcher_ind_scaling applies only in the Boettcher regime");
  }
  if (n < 0) throw DomainError("boettcher_ind_scaling needs n >= 0");
  const double r = params.step().r();
  if (x >= params.alpha()) {
    return {BoettcherScale::Linear, -upper_branch(params, x) * n};
  }
  const double log_k = std::log(static_cast<double>(law.k_star()));
  if (x >= 0.0) {
    const double frac = 1.0 - params.step().lambda_plus() * std::pow(x, r) / params.log_m();
    return {BoettcherScale::DoubleLog, -n * log_k * frac};
  }
  const double growth = std::pow(static_cast<double>(law.k_star()), n);
  return {BoettcherScale::SuperExponential,
          -n * growth * params.step().lambda_minus() * std::pow(-x, r)};
}

std::string_view to_string(RateKind kind) {
  switch (kind) {
    case RateKind::I: return "I";
    case RateKind::IGW: return "IGW";
    case RateKind::H: return "H";
    case RateKind::IBRW: return "IBRW";
    case RateKind::IIND: return "IIND";
    case RateKind::BOETTCHER_SCALING: return "BOETTCHER_SCALING";
  }
  return "unknown";
}

RateKind parse_rate_kind(std::string_view name) {
  for (const RateKind kind : {RateKind::I, RateKind::IGW, RateKind::H, RateKind::IBRW,
                              RateKind::IIND, RateKind::BOETTCHER_SCALING}) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown rate kind '" + std::string(name) + "'");
}

RateCurve rate_curve(const ModelParams& params, RateKind kind, std::span<const double> x_grid) {
  if (!std::is_sorted(x_grid.begin(), x_grid.end())) {
    throw ValidationError("rate_curve needs an ascending grid");
  }
  RateCurve curve;
  curve.kind = kind;
  curve.x_grid.assign(x_grid.begin(), x_grid.end());
  curve.values.reserve(x_grid.size());
  const double r = params.step().r();
  for (const double x : x_grid) {
    switch (kind) {
      case RateKind::I:
        curve.values.push_back(RateValue::finite(walk_rate(params.step(), x)));
        break;
      case RateKind::IGW:
        curve.values.push_back(RateValue::finite(gw_lower_rate(params.offspring(), x)));
        break;
      case RateKind::H:
        curve.values.push_back(RateValue::finite(lower_rate_closed(params, x)));
        break;
      case RateKind::IBRW:
        curve.values.push_back(RateValue::finite(brw_rate(params, x)));
        break;
      case RateKind::IIND:
        curve.values.push_back(ind_rate(params, x));
        break;
      case RateKind::BOETTCHER_SCALING: {
        const OffspringLaw& law = params.offspring();
        if (law.regime() != Regime::Boettcher) {
          throw RegimeError("BOETTCHER_SCALING curves need a Boettcher offspring law");
        }
        double coefficient = 0.0;
        if (x >= params.alpha()) {
          coefficient = upper_branch(params, x);
        } else if (x >= 0.0) {
          coefficient = std::log(static_cast<double>(law.k_star())) *
                        (1.0 - params.step().lambda_plus() * std::pow(x, r) / params.log_m());
        } else {
          coefficient = params.step().lambda_minus() * std::pow(-x, r);
        }
        curve.values.push_back(RateValue::finite(coefficient));
        break;
      }
    }
  }
  return curve;
}

}  // namespace brwld
