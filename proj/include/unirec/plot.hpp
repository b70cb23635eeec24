#pragma once

#include "unirec/harness.hpp"
#include "unirec/theory.hpp"

#include <string>
#include <vector>

namespace unirec {

enum class ColorMap { SuccessRate, MeanRelError };

struct PlotSpec {
  std::string grid_path;
  std::vector<std::string> theory_csv;
  std::string output;
  std::string title;
  ColorMap color_map = ColorMap::SuccessRate;
};

/// Heatmap of the grid cells (structure on x, delta on y), one rect per cell,
/// plus one polyline per overlay curve. Output depends only on the inputs.
std::string render_svg(const PhaseGrid &grid, const std::vector<TheoryCurve> &overlays, const std::string &title,
                       ColorMap color_map);

/// Loads the inputs named by `spec`, renders and writes the SVG.
void plot(const PlotSpec &spec);

} // namespace unirec
