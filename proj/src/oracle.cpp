#include "brwld/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brwld/errors.hpp"

namespace brwld {

namespace {

constexpr double kDominationSlack = 1e-12;

struct LatticeRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
};

LatticeRange range_for(const LatticeStepLaw& step, int n, const OracleOptions& options) {
  if (n < 0) throw DomainError("oracle horizon must be non-negative");
  LatticeRange range{n * std::min<std::int64_t>(0, step.min_index()),
                     n * std::max<std::int64_t>(0, step.max_index())};
  if (range.size() > options.max_points) {
    throw ResourceLimit("oracle lattice of " + std::to_string(range.size()) +
                        " points exceeds the bound of " + std::to_string(options.max_points));
  }
  return range;
}

}  // namespace

double LatticeDist::at_index(std::int64_t index) const {
  if (index < min_index) return extinct_mass;
  if (index > max_index()) return 1.0;
  return cdf[static_cast<std::size_t>(index - min_index)];
}

double LatticeDist::at(double x) const {
  return at_index(static_cast<std::int64_t>(std::floor(x / h + 1e-9)));
}

std::vector<double> walk_pmf(const LatticeStepLaw& step, int n) {
  if (n < 0) throw DomainError("walk_pmf needs n >= 0");
  std::vector<double> pmf{1.0};
  const auto mu = step.pmf();
  for (int k = 0; k < n; ++k) {
    std::vector<double> next(pmf.size() + mu.size() - 1, 0.0);
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      if (pmf[i] == 0.0) continue;
      for (std::size_t j = 0; j < mu.size(); ++j) next[i + j] += pmf[i] * mu[j];
    }
    pmf = std::move(next);
  }
  return pmf;
}

LatticeDist brw_max_cdf_exact(const LatticeStepLaw& step, const OffspringLaw& offspring, int n,
                              const OracleOptions& options) {
  const LatticeRange range = range_for(step, n, options);
  const std::size_t size = range.size();
  const auto mu = step.pmf();
  const std::int64_t step_lo = step.min_index();

  std::vector<double> current(size);
  for (std::size_t i = 0; i < size; ++i) current[i] = (range.lo + static_cast<std::int64_t>(i) >= 0) ? 1.0 : 0.0;
  double extinct = 0.0;

  std::vector<double> next(size);
  for (int gen = 0; gen < n; ++gen) {
    const auto value_at = [&](std::int64_t index) {
      if (index < range.lo) return extinct;
      if (index > range.hi) return 1.0;
      return current[static_cast<std::size_t>(index - range.lo)];
    };
    for (std::size_t i = 0; i < size; ++i) {
      const std::int64_t x = range.lo + static_cast<std::int64_t>(i);
      double child = 0.0;
      for (std::size_t j = 0; j < mu.size(); ++j) {
        if (mu[j] == 0.0) continue;
        child += mu[j] * value_at(x - (step_lo + static_cast<std::int64_t>(j)));
      }
      next[i] = pgf_eval(offspring, std::clamp(child, 0.0, 1.0));
    }
    current.swap(next);
    extinct = pgf_eval(offspring, extinct);
  }

  LatticeDist out;
  out.h = step.spacing();
  out.min_index = range.lo;
  out.cdf = std::move(current);
  out.extinct_mass = extinct;
  out.generation = n;
  return out;
}

LatticeDist ind_max_cdf_exact(const LatticeStepLaw& step, const OffspringLaw& offspring, int n,
                              const OracleOptions& options) {
  const LatticeRange range = range_for(step, n, options);
  const std::vector<double> pmf = walk_pmf(step, n);
  // walk_pmf covers [n*min_index, n*max_index]; widen to the range (which includes 0).
  const std::int64_t pmf_lo = static_cast<std::int64_t>(n) * step.min_index();
  LatticeDist out;
  out.h = step.spacing();
  out.min_index = range.lo;
  out.generation = n;
  out.cdf.resize(range.size());
  out.extinct_mass = pgf_iterate(offspring, 0.0, n);
  double walk_cdf = 0.0;
  for (std::size_t i = 0; i < out.cdf.size(); ++i) {
    const std::int64_t x = range.lo + static_cast<std::int64_t>(i);
    const std::int64_t offset = x - pmf_lo;
    if (offset >= 0 && offset < static_cast<std::int64_t>(pmf.size())) {
      walk_cdf += pmf[static_cast<std::size_t>(offset)];
    }
    out.cdf[i] = pgf_iterate(offspring, std::clamp(walk_cdf, 0.0, 1.0), n);
  }
  return out;
}

LatticeDist conditional_cdf(const LatticeDist& dist) {
  if (!(dist.extinct_mass < 1.0)) {
    throw DomainError("conditional_cdf: the population is extinct with probability 1");
  }
  LatticeDist out = dist;
  const double survive = 1.0 - dist.extinct_mass;
  for (double& v : out.cdf) v = std::clamp((v - dist.extinct_mass) / survive, 0.0, 1.0);
  out.extinct_mass = 0.0;
  return out;
}

DominationCheck domination_check_exact(const LatticeStepLaw& step, const OffspringLaw& offspring, int n,
                                       const OracleOptions& options) {
  const LatticeDist brw = brw_max_cdf_exact(step, offspring, n, options);
  const LatticeDist ind = ind_max_cdf_exact(step, offspring, n, options);
  DominationCheck out;
  out.worst_index = brw.min_index;
  for (std::int64_t x = brw.min_index; x <= brw.max_index(); ++x) {
    const double gap = ind.at_index(x) - brw.at_index(x);
    if (gap > out.max_violation) {
      out.max_violation = gap;
      out.worst_index = x;
    }
  }
  out.holds = out.max_violation <= kDominationSlack;
  return out;
}

}  // namespace brwld
