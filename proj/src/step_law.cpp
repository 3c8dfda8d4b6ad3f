#include "brwld/step_law.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "brwld/errors.hpp"

namespace brwld {

StepLaw make_centered(double r, double lambda_plus, double lambda_minus) {
  if (!(r > 0.0 && r < 1.0)) {
    if (r >= 1.0) {
      throw ValidationError(
          "r >= 1 gives light (Cramer-type) tails; only stretched-exponential r in (0,1) is supported");
    }
    throw ValidationError("step law exponent r must lie in (0, 1)");
  }
  if (!(lambda_plus > 0.0) || !(lambda_minus > 0.0) || !std::isfinite(lambda_plus) ||
      !std::isfinite(lambda_minus)) {
    throw ValidationError("step law scales lambda_plus and lambda_minus must be positive and finite");
  }
  StepLaw law;
  law.r_ = r;
  law.lambda_plus_ = lambda_plus;
  law.lambda_minus_ = lambda_minus;
  // a+ / a- = (lambda+ / lambda-)^{1/r}; written through the ratio to avoid overflow.
  const double log_ratio = std::log(lambda_plus / lambda_minus) / r;
  law.a_plus_ = 1.0 / (1.0 + std::exp(-log_ratio));
  law.a_minus_ = 1.0 / (1.0 + std::exp(log_ratio));
  return law;
}

double tail_upper(const StepLaw& law, double x) {
  if (!(x >= 0.0)) throw DomainError("tail_upper needs x >= 0");
  return law.a_plus() * std::exp(-law.lambda_plus() * std::pow(x, law.r()));
}

double tail_lower(const StepLaw& law, double x) {
  if (!(x >= 0.0)) throw DomainError("tail_lower needs x >= 0");
  return law.a_minus() * std::exp(-law.lambda_minus() * std::pow(x, law.r()));
}

double cdf(const StepLaw& law, double x) {
  if (x <= 0.0) return tail_lower(law, -x);
  return 1.0 - tail_upper(law, x);
}

double quantile(const StepLaw& law, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile needs u in (0, 1)");
  const double inv_r = 1.0 / law.r();
  if (u <= law.a_minus()) {
    const double e = -std::log(u / law.a_minus());
    return -std::pow(e / law.lambda_minus(), inv_r);
  }
  const double e = -std::log((1.0 - u) / law.a_plus());
  return std::pow(e / law.lambda_plus(), inv_r);
}

double LatticeStepLaw::prob(std::int64_t index) const {
  if (index < min_index() || index > max_index()) return 0.0;
  return pmf_[static_cast<std::size_t>(index - min_index_)];
}

std::int64_t LatticeStepLaw::index_for_uniform(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto offset = std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                               static_cast<std::ptrdiff_t>(pmf_.size()) - 1);
  return min_index_ + offset;
}

LatticeStepLaw make_lattice_surrogate(double h, const std::map<std::int64_t, double>& pmf) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("lattice spacing h must be positive");
  if (pmf.empty()) throw ValidationError("lattice pmf is empty");
  double total = 0.0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool any = false;
  for (const auto& [k, p] : pmf) {
    if (!std::isfinite(p) || p < 0.0) throw ValidationError("lattice probabilities must be non-negative");
    total += p;
    if (p > 0.0) {
      lo = any ? std::min(lo, k) : k;
      hi = any ? std::max(hi, k) : k;
      any = true;
    }
  }
  if (!any || std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "lattice pmf sums to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }

  LatticeStepLaw law;
  law.h_ = h;
  law.min_index_ = lo;
  law.pmf_.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  double mean_index = 0.0;
  for (const auto& [k, p] : pmf) {
    if (p == 0.0) continue;
    law.pmf_[static_cast<std::size_t>(k - lo)] = p;
    mean_index += static_cast<double>(k) * p;
  }
  law.mean_ = h * mean_index;
  if (std::abs(law.mean_) > 1e-12) {
    std::ostringstream msg;
    msg << "lattice step law has mean " << law.mean_ << ", expected 0";
    throw ValidationError(msg.str());
  }
  law.cumulative_.resize(law.pmf_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < law.pmf_.size(); ++i) {
    acc += law.pmf_[i];
    law.cumulative_[i] = acc;
  }
  return law;
}

}  // namespace brwld
