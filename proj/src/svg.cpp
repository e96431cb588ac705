#include "graddiv/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace graddiv {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;  // legend column
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool usable(double x, double y) { return std::isfinite(x) && std::isfinite(y) && x > 0.0 && y > 0.0; }

struct Axis {
  double lo, hi;  // log10 range, whole decades
  double pixel_lo, pixel_hi;
  double map(double v) const { return pixel_lo + (std::log10(v) - lo) / (hi - lo) * (pixel_hi - pixel_lo); }
};

Axis make_axis(double min, double max, double pixel_lo, double pixel_hi) {
  double lo = std::floor(std::log10(min));
  double hi = std::ceil(std::log10(max));
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi, pixel_lo, pixel_hi};
}

}  // namespace

void write_svg(std::ostream& os, const LogLogPlot& plot) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i])) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
  if (!(xmax > 0.0)) xmin = ymin = 0.1, xmax = ymax = 1.0;

  const Axis ax = make_axis(xmin, xmax, kLeft, kWidth - kRight);
  const Axis ay = make_axis(ymin, ymax, kHeight - kBottom, kTop);

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
     << "</text>\n";

  // Frame, decade grid and labels.
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kLeft - kRight)
     << "\" height=\"" << num(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = ax.lo; e <= ax.hi + 0.5; e += 1.0) {
    const double px = ax.map(std::pow(10.0, e));
    os << "<line x1=\"" << num(px) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px) << "\" y2=\""
       << num(kHeight - kBottom) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << num(px) << "\" y=\"" << num(kHeight - kBottom + 18) << "\" text-anchor=\"middle\">1e"
       << static_cast<int>(e) << "</text>\n";
  }
  for (double e = ay.lo; e <= ay.hi + 0.5; e += 1.0) {
    const double py = ay.map(std::pow(10.0, e));
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\""
       << num(py) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">1e"
       << static_cast<int>(e) << "</text>\n";
  }
  os << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 16)
     << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << num((kTop + kHeight - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << num((kTop + kHeight - kBottom) / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % kColors.size()];
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i])) points += num(ax.map(s.x[i])) + "," + num(ay.map(s.y[i])) + " ";
    if (!points.empty()) {
      points.pop_back();
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"" << points << "\"/>\n";
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
        if (usable(s.x[i], s.y[i]))
          os << "<circle cx=\"" << num(ax.map(s.x[i])) << "\" cy=\"" << num(ay.map(s.y[i])) << "\" r=\"3\" fill=\""
             << color << "\"/>\n";
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(kWidth - kRight + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
       << num(kWidth - kRight + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"1.8\"/>\n";
    os << "<text x=\"" << num(kWidth - kRight + 35) << "\" y=\"" << num(ly) << "\">" << escape(s.label) << "</text>\n";
  }

  // Slope triangles in the lower right corner of the data box, stacked upward.
  const double span = 0.5;  // decades of the horizontal leg
  for (std::size_t k = 0; k < plot.reference_slopes.size(); ++k) {
    const double slope = plot.reference_slopes[k];
    const double x1 = ax.hi - 0.15 - 0.9 * static_cast<double>(k);
    const double x0 = x1 - span;
    const double y0 = ay.lo + 0.2;
    const double y1 = y0 + slope * span;
    if (x0 < ax.lo || y1 > ay.hi) continue;
    const double px0 = ax.map(std::pow(10.0, x0)), px1 = ax.map(std::pow(10.0, x1));
    const double py0 = ay.map(std::pow(10.0, y0)), py1 = ay.map(std::pow(10.0, y1));
    os << "<polygon points=\"" << num(px0) << ',' << num(py0) << ' ' << num(px1) << ',' << num(py0) << ' ' << num(px1)
       << ',' << num(py1) << "\" fill=\"none\" stroke=\"#555555\" stroke-dasharray=\"4 2\"/>\n";
    os << "<text x=\"" << num(px1 + 4) << "\" y=\"" << num((py0 + py1) / 2 + 4) << "\" fill=\"#555555\">" << num(slope)
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace graddiv
