#pragma once

// Exact CDFs of M_n and of the independent-walks maximum for lattice step
// laws, by the branching recursion and by pgf composition respectively.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "brwld/gw_core.hpp"
#include "brwld/step_law.hpp"

namespace brwld {

/// CDF of a maximum on the lattice h * {min_index, ..., min_index + size - 1}.
/// Below the range the CDF equals extinct_mass; above it equals 1.
struct LatticeDist {
  double h = 1.0;
  std::int64_t min_index = 0;
  std::vector<double> cdf;
  double extinct_mass = 0.0;
  int generation = 0;

  std::int64_t max_index() const { return min_index + static_cast<std::int64_t>(cdf.size()) - 1; }
  double at_index(std::int64_t index) const;
  /// CDF at an arbitrary real x (right-continuous step function).
  double at(double x) const;
};

struct OracleOptions {
  std::size_t max_points = 10'000'000;
};

/// pmf of S_n on indices [n*min_index, n*max_index] by repeated convolution.
std::vector<double> walk_pmf(const LatticeStepLaw& step, int n);

/// F_0 = 1{x >= 0}; F_{k+1}(x) = f( sum_s mu(s) F_k(x - s) ).
LatticeDist brw_max_cdf_exact(const LatticeStepLaw& step, const OffspringLaw& offspring, int n,
                              const OracleOptions& options = {});

/// G_n(x) = f^{(n)}(F_{S_n}(x)).
LatticeDist ind_max_cdf_exact(const LatticeStepLaw& step, const OffspringLaw& offspring, int n,
                              const OracleOptions& options = {});

/// (F - extinct_mass) / (1 - extinct_mass), i.e. the law given survival to n.
LatticeDist conditional_cdf(const LatticeDist& dist);

struct DominationCheck {
  bool holds = true;
  double max_violation = 0.0;  // max over lattice points of G_n(x) - F_n(x), floored at 0
  std::int64_t worst_index = 0;
};

/// Compares P(M_n <= x) against P(max of independent walks <= x) pointwise.
DominationCheck domination_check_exact(const LatticeStepLaw& step, const OffspringLaw& offspring, int n,
                                       const OracleOptions& options = {});

}  // namespace brwld
