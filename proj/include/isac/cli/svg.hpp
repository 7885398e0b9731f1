#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isac/common.hpp"

namespace isac::cli {

struct Series {
  std::string name;
  RVec x;
  RVec y;
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 800;
  int height = 500;
  bool markers = false;  // single-point series always get a marker
  std::optional<double> y_min;  // values below are drawn on the axis
  std::optional<double> y_max;
};

/// Self-contained SVG line plot with axes, ticks and a legend. Output is a
/// pure function of the inputs. Throws InvalidParameter when `series` is
/// empty or a series has no points.
std::string write_svg(std::span<const Series> series, const PlotStyle& style);

struct Heatmap {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string value_label;
  std::size_t rows = 0;  // y
  std::size_t cols = 0;  // x
  RVec values;           // values[row * cols + col]
  double x0 = 0.0;
  double dx = 1.0;
  double y0 = 0.0;
  double dy = 1.0;
  /// Non-empty: values are category indices drawn with a discrete legend.
  std::vector<std::string> categories;
  int width = 800;
  int height = 500;
};

/// Self-contained SVG heatmap; runs of equal cells are drawn as one rectangle.
std::string write_heatmap_svg(const Heatmap& map);

}  // namespace isac::cli
