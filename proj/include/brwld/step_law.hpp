#pragma once

// Displacement laws: the centred two-sided stretched-exponential law
//   P(X >= x) = a+ exp(-lambda+ x^r),  P(X <= -x) = a- exp(-lambda- x^r),  x >= 0,
// and finite lattice laws used as exact-oracle surrogates.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "brwld/rng.hpp"

namespace brwld {

class StepLaw {
 public:
  double r() const { return r_; }
  double lambda_plus() const { return lambda_plus_; }
  double lambda_minus() const { return lambda_minus_; }
  double a_plus() const { return a_plus_; }
  double a_minus() const { return a_minus_; }

  friend StepLaw make_centered(double r, double lambda_plus, double lambda_minus);

 private:
  StepLaw() = default;
  double r_ = 0.5;
  double lambda_plus_ = 1.0;
  double lambda_minus_ = 1.0;
  double a_plus_ = 0.5;
  double a_minus_ = 0.5;
};

/// Chooses a+ / a- so that a+ lambda+^{-1/r} = a- lambda-^{-1/r}, which makes
/// E[X] = 0. Rejects r outside (0,1); r >= 1 is the Cramer case.
StepLaw make_centered(double r, double lambda_plus, double lambda_minus);

double tail_upper(const StepLaw& law, double x);  // P(X >= x), x >= 0
double tail_lower(const StepLaw& law, double x);  // P(X <= -x), x >= 0
double cdf(const StepLaw& law, double x);
double quantile(const StepLaw& law, double u);

template <UniformSource G>
double sample(const StepLaw& law, G& source) {
  return quantile(law, source.uniform_open());
}

/// Finite lattice law on h * {min_index, ..., max_index} with mean zero.
class LatticeStepLaw {
 public:
  double spacing() const { return h_; }
  std::int64_t min_index() const { return min_index_; }
  std::int64_t max_index() const { return min_index_ + static_cast<std::int64_t>(pmf_.size()) - 1; }
  /// pmf()[i] = P(X = h * (min_index + i)).
  std::span<const double> pmf() const { return pmf_; }
  double prob(std::int64_t index) const;
  double mean() const { return mean_; }

  /// Lattice index of the step for a uniform u in (0,1), by inverse CDF.
  std::int64_t index_for_uniform(double u) const;

  friend LatticeStepLaw make_lattice_surrogate(double h, const std::map<std::int64_t, double>& pmf);

 private:
  LatticeStepLaw() = default;
  double h_ = 1.0;
  std::int64_t min_index_ = 0;
  std::vector<double> pmf_;
  std::vector<double> cumulative_;
  double mean_ = 0.0;
};

LatticeStepLaw make_lattice_surrogate(double h, const std::map<std::int64_t, double>& pmf);

template <UniformSource G>
double sample(const LatticeStepLaw& law, G& source) {
  return law.spacing() * static_cast<double>(law.index_for_uniform(source.uniform_open()));
}

}  // namespace brwld
