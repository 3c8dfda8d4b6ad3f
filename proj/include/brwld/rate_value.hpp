#pragma once

#include <compare>
#include <limits>

#include "brwld/errors.hpp"

namespace brwld {

/// A non-negative rate that may be +infinity. The infinite state is a flag,
/// not a large float, so arithmetic on it has to go through value().
class RateValue {
 public:
  static constexpr RateValue finite(double v) { return RateValue(v, false); }
  static constexpr RateValue infinity() { return RateValue(0.0, true); }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) throw DomainError("RateValue::value() called on an infinite rate");
    return value_;
  }

  // IEEE view for serialization and plotting only.
  constexpr double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr bool operator==(const RateValue& a, const RateValue& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend constexpr std::partial_ordering operator<=>(const RateValue& a, const RateValue& b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

 private:
  constexpr RateValue(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

}  // namespace brwld
