// Minimal SVG line charts for experiment tables.
#pragma once

#include <string>

#include "tlreg/csv.hpp"

namespace tlreg {

struct PlotSpec {
  std::string x_column = "param";
  std::string y_column = "mean_mse";
  std::string group_column = "method";
  std::string x_label;
  std::string y_label;
  std::string title;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// One polyline (an SVG path with class "series") per distinct group value,
/// points sorted by x, with axes, ticks and a legend.
std::string render_svg(const CsvFrame& table, const PlotSpec& spec);

}  // namespace tlreg
