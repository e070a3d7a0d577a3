#pragma once

#include <array>
#include <string>

#include "lace/eval.hpp"
#include "lace/model.hpp"

namespace lace::svg {

/// Colour for t in [0, 1] (clamped): piecewise-linear through the five
/// viridis anchors #440154, #3b528b, #21918c, #5ec962, #fde725.
std::array<int, 3> viridis(double t);
std::string hex_colour(double t);

struct ArrowOptions {
  double pixels_per_meter = 20.0;
  double arrow_length = 0.0;  // meters; 0 picks 0.8 x typical centroid spacing
};

/// One arrow per cluster at its centroid along the argmax bin of the Gamma^L
/// direction marginal, coloured by that bin's probability on [0, 1].
/// Includes a colour legend. Self-contained SVG text.
std::string render_arrows(const LaceModel& model, const ArrowOptions& options = {});

struct HeatmapOptions {
  double pixels_per_meter = 20.0;
};

/// Cells filled by mean FDE on [0, max cell mean]; empty cells are transparent
/// (fill="none"). Includes a colour bar.
std::string render_heatmap(const HeatmapGrid& grid, const HeatmapOptions& options = {});

}  // namespace lace::svg
