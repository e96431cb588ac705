#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graddiv {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log line plot with optional reference-slope triangles.
struct LogLogPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<double> reference_slopes;
};

/// Self-contained SVG; nonpositive or non-finite points are skipped.
void write_svg(std::ostream& os, const LogLogPlot& plot);

}  // namespace graddiv
