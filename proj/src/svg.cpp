#include "brwld/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "brwld/io.hpp"

namespace brwld {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;
constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << std::fixed << v;
  return ss.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_rate_svg(std::span<const RateCurve> curves, const std::string& title) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = 0.0, y_hi = 0.0;
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.x_grid.size(); ++i) {
      x_lo = std::min(x_lo, c.x_grid[i]);
      x_hi = std::max(x_hi, c.x_grid[i]);
      if (c.values[i].is_finite()) {
        y_lo = std::min(y_lo, c.values[i].value());
        y_hi = std::max(y_hi, c.values[i].value());
      }
    }
  }
  if (!(x_hi > x_lo)) {
    x_lo = std::isfinite(x_lo) ? x_lo - 1.0 : 0.0;
    x_hi = x_lo + 2.0;
  }
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  y_hi += 0.08 * (y_hi - y_lo);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  const auto sy = [&](const RateValue& v) {
    const double y = v.is_infinite() ? y_hi : std::min(v.value(), y_hi);
    return kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x_lo + (x_hi - x_lo) * t / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
    svg << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">"
        << format_double(std::round(xv * 1000) / 1000) << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(sy(RateValue::finite(yv)) + 4)
        << "\" text-anchor=\"end\">" << format_double(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">x</text>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const char* color = kColors[ci % kColors.size()];
    for (std::size_t i = 1; i < c.x_grid.size(); ++i) {
      const bool clipped = c.values[i - 1].is_infinite() || c.values[i].is_infinite() ||
                           c.values[i - 1].as_double() > y_hi || c.values[i].as_double() > y_hi;
      svg << "<line x1=\"" << fmt(sx(c.x_grid[i - 1])) << "\" y1=\"" << fmt(sy(c.values[i - 1])) << "\" x2=\""
          << fmt(sx(c.x_grid[i])) << "\" y2=\"" << fmt(sy(c.values[i])) << "\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"" << (clipped ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
    }
    const double ly = kTop + 16.0 * static_cast<double>(ci) + 10.0;
    svg << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 36
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 42 << "\" y=\"" << ly + 4 << "\">" << to_string(c.kind) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace brwld
