#include "brwld/gw_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "brwld/errors.hpp"

namespace brwld {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kFixedPointTolerance = 1e-14;
constexpr int kFixedPointMaxIterations = 1'000'000;

// Truncated convolution of two laws on {0..cap}, each with mass above cap given
// separately. Returns the retained part and sets out_tail = P(A + B > cap).
std::vector<double> convolve_truncated(const std::vector<double>& a, double a_tail,
                                       const std::vector<double>& b, double b_tail,
                                       double& out_tail) {
  const std::size_t size = a.size();
  std::vector<double> out(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    if (a[i] == 0.0) continue;
    const double ai = a[i];
    for (std::size_t j = 0; i + j < size; ++j) out[i + j] += ai * b[j];
  }
  // survival[c] = P(B > c) for c in [0, cap]; summed from the top, no cancellation.
  std::vector<double> survival(size, 0.0);
  double acc = b_tail;
  for (std::size_t c = size; c-- > 0;) {
    survival[c] = acc;
    acc += b[c];
  }
  double tail = a_tail;
  for (std::size_t l = 0; l < size; ++l) tail += a[l] * survival[size - 1 - l];
  out_tail = tail;
  return out;
}

}  // namespace

std::string_view to_string(Regime regime) {
  return regime == Regime::Schroeder ? "Schroeder" : "Boettcher";
}

OffspringLaw OffspringLaw::from_pmf(const std::map<int, double>& pmf) {
  if (pmf.empty()) throw ValidationError("offspring pmf is empty");
  int max_k = 0;
  double total = 0.0;
  for (const auto& [k, p] : pmf) {
    if (k < 0) throw ValidationError("offspring count " + std::to_string(k) + " is negative");
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError("offspring probability for k=" + std::to_string(k) +
                            " is negative or not finite");
    }
    total += p;
    if (p > 0.0) max_k = std::max(max_k, k);
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "offspring pmf sums to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }

  OffspringLaw law;
  law.pmf_.assign(static_cast<std::size_t>(max_k) + 1, 0.0);
  for (const auto& [k, p] : pmf) {
    if (k <= max_k) law.pmf_[static_cast<std::size_t>(k)] = p;
  }
  law.mean_ = 0.0;
  for (int k = 0; k <= max_k; ++k) law.mean_ += k * law.pmf_[static_cast<std::size_t>(k)];

  law.k_star_ = 0;
  for (int k = 1; k <= max_k; ++k) {
    if (law.pmf_[static_cast<std::size_t>(k)] > 0.0) {
      law.k_star_ = k;
      break;
    }
  }
  const double p0 = law.prob(0);
  const double p1 = law.prob(1);
  law.regime_ = (p0 + p1 == 0.0) ? Regime::Boettcher : Regime::Schroeder;
  law.extinction_ = extinction_prob(law);
  if (law.regime_ == Regime::Boettcher) {
    law.rho_ = RateValue::infinity();
  } else {
    const double slope = pgf_derivative(law, law.extinction_);
    law.rho_ = slope > 0.0 ? RateValue::finite(-std::log(slope)) : RateValue::infinity();
  }
  return law;
}

double OffspringLaw::prob(int k) const {
  if (k < 0 || k > max_offspring()) return 0.0;
  return pmf_[static_cast<std::size_t>(k)];
}

std::map<int, double> OffspringLaw::as_map() const {
  std::map<int, double> out;
  for (int k = 0; k <= max_offspring(); ++k) {
    if (pmf_[static_cast<std::size_t>(k)] > 0.0) out[k] = pmf_[static_cast<std::size_t>(k)];
  }
  return out;
}

OffspringLaw validate_offspring(const std::map<int, double>& pmf) {
  OffspringLaw law = OffspringLaw::from_pmf(pmf);
  if (law.prob(1) == 1.0) throw ValidationError("offspring law is degenerate: p(1) = 1");
  if (!(law.mean() > 1.0)) {
    std::ostringstream msg;
    msg << "offspring law is not supercritical: mean " << law.mean() << " <= 1";
    throw ValidationError(msg.str());
  }
  return law;
}

double pgf_eval(const OffspringLaw& law, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf argument must lie in [0, 1]");
  const auto pmf = law.pmf();
  double acc = 0.0;
  for (std::size_t k = pmf.size(); k-- > 0;) acc = acc * s + pmf[k];
  return acc;
}

double pgf_derivative(const OffspringLaw& law, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf argument must lie in [0, 1]");
  const auto pmf = law.pmf();
  double acc = 0.0;
  for (std::size_t k = pmf.size(); k-- > 1;) acc = acc * s + static_cast<double>(k) * pmf[k];
  return acc;
}

double pgf_iterate(const OffspringLaw& law, double s, int n) {
  if (n < 0) throw DomainError("pgf iteration count must be non-negative");
  for (int i = 0; i < n; ++i) s = pgf_eval(law, s);
  return s;
}

double pgf_complement(const OffspringLaw& law, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("pgf complement argument must lie in [0, 1]");
  const auto pmf = law.pmf();
  if (u == 1.0) return 1.0 - pmf[0];
  const double log_keep = std::log1p(-u);
  double acc = 0.0;
  for (std::size_t k = 1; k < pmf.size(); ++k) {
    if (pmf[k] == 0.0) continue;
    acc += pmf[k] * -std::expm1(static_cast<double>(k) * log_keep);
  }
  return acc;
}

double extinction_prob(const OffspringLaw& law) {
  double s = 0.0;
  for (int i = 0; i < kFixedPointMaxIterations; ++i) {
    const double next = pgf_eval(law, s);
    if (std::abs(next - s) <= kFixedPointTolerance) return next;
    s = next;
  }
  return s;
}

double ZDistribution::mean() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) acc += static_cast<double>(k) * probs[k];
  return acc;
}

namespace {

void check_cap(const OffspringLaw& law, int cap) {
  if (cap < std::max(1, law.max_offspring())) {
    throw ValidationError("cap " + std::to_string(cap) +
                          " cannot hold the generation-1 support (max offspring " +
                          std::to_string(law.max_offspring()) + ")");
  }
}

// Z_{k+1} is the sum of Z_1 iid copies of Z_k, i.e. G_{k+1} = f(G_k).
void advance_generation(const OffspringLaw& law, ZDistribution& dist) {
  const std::size_t size = dist.probs.size();
  std::vector<double> next(size, 0.0);
  next[0] = law.prob(0);
  double next_tail = 0.0;
  std::vector<double> power = dist.probs;
  double power_tail = dist.tail_mass;
  for (int j = 1; j <= law.max_offspring(); ++j) {
    if (j > 1) power = convolve_truncated(power, power_tail, dist.probs, dist.tail_mass, power_tail);
    const double pj = law.prob(j);
    if (pj == 0.0) continue;
    for (std::size_t l = 0; l < size; ++l) next[l] += pj * power[l];
    next_tail += pj * power_tail;
  }
  dist.probs = std::move(next);
  dist.tail_mass = next_tail;
  if (dist.tail_mass > 0.0) dist.truncated = true;
  ++dist.generation;
}

ZDistribution point_mass_at_one(int cap) {
  ZDistribution dist;
  dist.probs.assign(static_cast<std::size_t>(cap) + 1, 0.0);
  dist.probs[1] = 1.0;
  return dist;
}

}  // namespace

ZDistribution exact_zn_distribution(const OffspringLaw& law, int n, int cap) {
  if (n < 0) throw DomainError("generation must be non-negative");
  check_cap(law, cap);
  ZDistribution dist = point_mass_at_one(cap);
  for (int gen = 0; gen < n; ++gen) advance_generation(law, dist);
  return dist;
}

std::vector<std::int64_t> reachable_values(const OffspringLaw& law, int n, int cap) {
  if (n < 1) throw DomainError("reachable_values needs n >= 1");
  check_cap(law, cap);
  std::vector<bool> seen(static_cast<std::size_t>(cap) + 1, false);
  ZDistribution dist = point_mass_at_one(cap);
  for (int j = 1; j <= n; ++j) {
    advance_generation(law, dist);
    for (std::size_t l = 0; l < dist.probs.size(); ++l) {
      if (dist.probs[l] > 0.0) seen[l] = true;
    }
  }
  std::vector<std::int64_t> out;
  for (std::size_t l = 0; l < seen.size(); ++l) {
    if (seen[l]) out.push_back(static_cast<std::int64_t>(l));
  }
  return out;
}

double gw_lower_rate(const OffspringLaw& law, double x) {
  if (law.regime() != Regime::Schroeder) {
    throw RegimeError("gw_lower_rate is defined only in the Schroeder regime");
  }
  if (!law.supercritical()) throw ValidationError("gw_lower_rate needs a supercritical law");
  const double log_m = std::log(law.mean());
  if (!(x >= 0.0 && x <= log_m)) throw DomainError("gw_lower_rate needs 0 <= x <= log m");
  return law.rho().value() * (1.0 - x / log_m);
}

BottcherThreshold boettcher_bn(const OffspringLaw& law, int n, double k_n) {
  if (law.regime() != Regime::Boettcher) {
    throw RegimeError("boettcher_bn is defined only in the Boettcher regime");
  }
  if (n < 0) throw DomainError("boettcher_bn needs n >= 0");
  if (!(k_n > 0.0)) throw DomainError("boettcher_bn needs k_n > 0");
  const double log_m = std::log(law.mean());
  const double log_k = std::log(static_cast<double>(law.k_star()));
  const double target = std::log(2.0 * k_n);
  // Log-space comparison; the slack lets exact ties such as 2^10 >= 2*512 register.
  const double slack = 1e-12 * std::max(1.0, std::abs(target));

  BottcherThreshold result;
  result.k_n_below_minimum = std::log(k_n) < n * log_k - slack;
  for (int j = 0; j <= n; ++j) {
    if (j * log_m + (n - j) * log_k >= target - slack) {
      result.b_n = j;
      result.scaling = std::exp((j - n) * log_k);
      return result;
    }
  }
  throw DomainError("boettcher_bn: no j <= n satisfies m^j (k*)^(n-j) >= 2 k_n");
}

}  // namespace brwld
