#pragma once

#include <cstddef>
#include <vector>

#include "stroke_painter/geometry.hpp"
#include "stroke_painter/image.hpp"
#include "stroke_painter/renderer.hpp"
#include "stroke_painter/sequence.hpp"

namespace stroke_painter {

/// Mean squared error over all pixels and channels.
double l_pixel(const Canvas& image, const Canvas& canvas);

/// Mean of l_pixel over a 3-level box pyramid (full, 1/2, 1/4 resolution).
double l_multiscale(const Canvas& image, const Canvas& canvas, int levels = 3);

/// -||next - prev|| over (x, y, w, h).
double r_spatial(const Window& prev, const Window& next);

/// -||rgb_next - rgb_prev||.
double r_color(const Stroke& prev, const Stroke& next);

struct SequenceReport {
  double l_pixel = 0.0;
  double l_ms = 0.0;
  std::size_t stroke_count_total = 0;
  std::size_t stroke_count_active = 0;
  double spatial_penalty_sum = 0.0;
  double color_penalty_sum = 0.0;
  /// l_pixel of each layer's terminal canvas.
  std::vector<double> layer_l2;
};

SequenceReport report(const StrokeSequence& sequence, const Canvas& target, const Canvas& init,
                      int num_layers = 0, const RasterOptions& options = {});

}  // namespace stroke_painter
