#pragma once

// Galton-Watson analytics for finite offspring laws: pgf machinery, extinction
// probability, regime classification, exact laws of Z_n and the lower-deviation
// quantities used by the rate functions.

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "brwld/rate_value.hpp"

namespace brwld {

enum class Regime { Schroeder, Boettcher };

std::string_view to_string(Regime regime);

/// Finite offspring distribution with its derived analytics.
///
/// from_pmf() only checks that the pmf is a probability vector, so the
/// degenerate laws {0:1} and {1:1} used by the simulators are representable.
/// validate_offspring() additionally requires supercriticality.
class OffspringLaw {
 public:
  static OffspringLaw from_pmf(const std::map<int, double>& pmf);

  /// Dense pmf indexed by offspring count 0..max_offspring().
  std::span<const double> pmf() const { return pmf_; }
  double prob(int k) const;
  int max_offspring() const { return static_cast<int>(pmf_.size()) - 1; }

  double mean() const { return mean_; }
  /// Smallest fixed point of the pgf on [0,1].
  double extinction() const { return extinction_; }
  /// Smallest k >= 1 with p(k) > 0; 0 when the law is the point mass at 0.
  int k_star() const { return k_star_; }
  Regime regime() const { return regime_; }
  /// -log f'(q); infinite exactly in the Boettcher regime.
  RateValue rho() const { return rho_; }
  bool supercritical() const { return mean_ > 1.0; }

  std::map<int, double> as_map() const;

 private:
  OffspringLaw() = default;
  std::vector<double> pmf_;
  double mean_ = 0.0;
  double extinction_ = 1.0;
  int k_star_ = 0;
  Regime regime_ = Regime::Schroeder;
  RateValue rho_ = RateValue::infinity();
};

/// Builds an OffspringLaw and rejects anything that is not supercritical.
OffspringLaw validate_offspring(const std::map<int, double>& pmf);

double pgf_eval(const OffspringLaw& law, double s);
double pgf_derivative(const OffspringLaw& law, double s);
/// n-fold composition f(f(...f(s))).
double pgf_iterate(const OffspringLaw& law, double s, int n);
/// 1 - f(1 - u), evaluated without cancellation for small u.
double pgf_complement(const OffspringLaw& law, double u);

/// Fixed-point iteration from 0 (tolerance 1e-14, at most 10^6 steps).
double extinction_prob(const OffspringLaw& law);

struct ZDistribution {
  int generation = 0;
  std::vector<double> probs;  // P(Z_n = k) for k = 0..cap
  double tail_mass = 0.0;     // P(Z_n > cap)
  // Set when mass above cap appeared at this or any earlier generation.
  bool truncated = false;

  int cap() const { return static_cast<int>(probs.size()) - 1; }
  /// Mean of the retained part; equals E[Z_n] when tail_mass is zero.
  double mean() const;
};

/// Exact law of Z_n by generation-wise pgf composition, truncated at cap.
/// Entries at or below cap are exact regardless of truncation.
ZDistribution exact_zn_distribution(const OffspringLaw& law, int n, int cap);

/// { l <= cap : P(Z_j = l) > 0 for some 1 <= j <= n }, ascending.
std::vector<std::int64_t> reachable_values(const OffspringLaw& law, int n, int cap);

/// Schroeder-case lower deviation rate of Z_n <= e^{xn}: rho (1 - x / log m).
double gw_lower_rate(const OffspringLaw& law, double x);

struct BottcherThreshold {
  int b_n = 0;
  bool k_n_below_minimum = false;  // k_n < (k*)^n; the two-sided bound needs k_n >= (k*)^n
  double scaling = 1.0;            // (k*)^{b_n - n}, the normalisation of log P(Z_n <= k_n)
};

/// Smallest j in [0, n] with m^j (k*)^{n-j} >= 2 k_n (Boettcher regime).
BottcherThreshold boettcher_bn(const OffspringLaw& law, int n, double k_n);

}  // namespace brwld
