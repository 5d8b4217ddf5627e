#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "stroke_painter/geometry.hpp"
#include "stroke_painter/image.hpp"
#include "stroke_painter/layering.hpp"
#include "stroke_painter/renderer.hpp"
#include "stroke_painter/sequence.hpp"

namespace stroke_painter {

struct SaliencyBundle {
  SaliencyMap saliency;
  std::optional<RankedSaliency> ranked;
  /// Object boxes B_1..B_N; the whole-canvas box B_0 is implicit.
  std::vector<Window> boxes;
};

/// Per-window gradient descent settings.
struct DescentConfig {
  int steps = 40;
  double learning_rate = 0.02;
  double grad_clip = 1.0;
  double init_width = 0.3;
  double init_opacity = 0.8;
};

struct PlannerConfig {
  int num_layers = 2;
  int total_strokes = 300;
  int strokes_per_window = 4;
  double w_min = kDefaultMinWindowSide;
  double h_min = kDefaultMinWindowSide;
  /// Maximum local-window center jump per step, as a fraction of the coarse diagonal.
  double jump_limit = 0.5;
  double binarize_threshold = 0.5;
  Rgb background{1.0, 1.0, 1.0};
  std::uint64_t seed = 0;
  DescentConfig descent;
  RasterOptions raster;
};

struct PaintingTask {
  Canvas target;
  SaliencyBundle saliency;
  PlannerConfig config;
};

struct PlanResult {
  StrokeSequence sequence;
  std::vector<Canvas> layer_canvases;
  /// Coarse window of every visit, in visit order (per layer, concatenated).
  std::vector<Window> coarse_visits;
  /// Masked distance under the active layer mask after each accepted stroke, preceded by
  /// the value at the start of each layer.
  std::vector<std::vector<double>> masked_distance_trace;
};

Canvas blank_canvas(int height, int width, Rgb background);

/// Mask used while painting `layer` (all ones for single-layer tasks).
LayeredMask mask_for_layer(const SaliencyBundle& bundle, int layer, int num_layers,
                           double threshold = 0.5);

/// Coarse windows visited in `layer`, in order.
std::vector<Window> schedule_objects(const SaliencyBundle& bundle, int layer, int num_layers = 2);

struct WindowProposal {
  double w_min = kDefaultMinWindowSide;
  double h_min = kDefaultMinWindowSide;
  double jump_limit = 0.5;
};

/// Places the next local window on the blurred residual peak inside `coarse`, moving at
/// most jump_limit * diag(coarse) from the previous center. Throws kEmptyResidual.
Window propose_window(const Plane& residual, const Window& coarse, const Window& prev_local,
                      double t_norm, const WindowProposal& options = {});

struct WindowStrokes {
  std::vector<Stroke> strokes;
  Canvas canvas;
  /// Masked distance (whole canvas) after each accepted stroke.
  std::vector<double> distances;
};

/// Optimizes k strokes inside `window` and keeps each one only if it strictly lowers the
/// masked distance.
WindowStrokes optimize_window_strokes(const Canvas& canvas, const Canvas& target,
                                      const Plane& mask, const Window& window, int k,
                                      const DescentConfig& descent, std::mt19937_64& rng,
                                      const RasterOptions& raster = {});

PlanResult plan(const PaintingTask& task);

/// Baseline: the same optimizer applied to a fixed uniform grid of cells, row-major, with
/// no layering and no saliency.
PlanResult plan_uniform_grid(const Canvas& target, const PlannerConfig& config);

/// Per-pixel masked squared error summed over channels.
Plane masked_residual(const Canvas& target, const Canvas& canvas, const Plane& mask);

}  // namespace stroke_painter
