#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace brwld {

struct Interval {
  double low = 0.0;
  double high = 1.0;
  bool contains(double v) const { return low <= v && v <= high; }
  bool overlaps(const Interval& other) const { return low <= other.high && other.low <= high; }
};

/// Exact (Clopper-Pearson) two-sided binomial interval at confidence `level`.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double level);

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz band: sqrt(log(2/alpha) / (2n)),
/// alpha = 1 - level.
double dkw_epsilon(std::size_t samples, double level);

/// sup_x |F_a(x) - F_b(x)| for two samples (ties handled exactly).
double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical value c(alpha) sqrt((n+m)/(nm)), c(alpha) = sqrt(-log(alpha/2)/2).
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

}  // namespace brwld
