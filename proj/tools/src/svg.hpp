#pragma once

#include <string>
#include <utility>
#include <vector>

namespace varbif::cli {

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool markers = false;
  bool dashed = false;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  /// Horizontal reference line drawn as an axis (e.g. the trivial branch).
  bool zero_axis = true;
  int width = 720;
  int height = 480;
};

/// Standalone SVG document with axes, ticks, polylines and a legend.
std::string render_svg(const Figure& figure);

/// Color for series k, cycling through a fixed palette.
std::string palette(std::size_t k);

}  // namespace varbif::cli
