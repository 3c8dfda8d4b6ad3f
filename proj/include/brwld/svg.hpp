#pragma once

#include <span>
#include <string>

#include "brwld/rates.hpp"

namespace brwld {

/// Static line plot of rate curves sharing one x axis. Infinite values are
/// clipped to the top edge and the segments touching them are dashed.
std::string render_rate_svg(std::span<const RateCurve> curves, const std::string& title);

}  // namespace brwld
