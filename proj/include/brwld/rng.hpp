#pragma once

#include <concepts>
#include <cstdint>
#include <limits>

namespace brwld {

/// Purpose tags keep the streams of different experiments on the same
/// (seed, replica) pair disjoint.
enum class StreamPurpose : std::uint64_t {
  BranchingWalk = 1,
  IndependentWalks = 2,
  Population = 3,
  SingleWalk = 4,
  Bernoulli = 5,
};

/// Counter-based generator: output k of stream (seed, index, purpose) is
/// mix(key + (k+1) * golden) with key derived from the triple. No state is
/// shared between streams, so results do not depend on which thread runs
/// which replica.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t index,
             StreamPurpose purpose = StreamPurpose::BranchingWalk)
      : key_(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) ^ mix(index + 0x3c6ef372fe94f82bULL) ^
                 (static_cast<std::uint64_t>(purpose) << 56))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    counter_ += kGolden;
    return mix(key_ + counter_);
  }

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform_open() {
    const std::uint64_t bits = (*this)() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t draws() const { return counter_ / kGolden; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  // SplitMix64 finaliser.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

template <class G>
concept UniformSource = requires(G& g) {
  { g.uniform_open() } -> std::convertible_to<double>;
};

}  // namespace brwld
