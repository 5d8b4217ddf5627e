#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "stroke_painter/geometry.hpp"
#include "stroke_painter/image.hpp"
#include "stroke_painter/sequence.hpp"

namespace stroke_painter {

/// Soft-disk sweep rasterizer settings.
///
/// A stroke is sampled at S points along its Bezier curve. Each sample contributes a disk
/// whose radius and opacity interpolate linearly between the endpoints, with a smooth
/// (quintic) edge ramp of `edge_px` pixels giving coverage c_s. With a_s = z_s * c_s, the
/// per-pixel alpha is the coverage-weighted log-mean-exp
///   tau * log(sum_s c_s exp(a_s / tau) / sum_s c_s),
/// which lies in [min, max] of the a_s of the covering samples.
struct RasterOptions {
  double temperature = 0.1;
  int min_samples = 32;
  int max_samples = 512;
  double edge_px = 1.5;
  double min_radius_px = 0.5;
};

struct StrokeGradient {
  std::array<double, Stroke::kParamCount> d{};

  double& operator[](std::size_t i) { return d[i]; }
  double operator[](std::size_t i) const { return d[i]; }
  bool finite() const;
  StrokeGradient& operator+=(const StrokeGradient& o);
};

/// Alpha of one stroke over a pixel rectangle, plus the per-pixel sums the backward pass
/// needs: exp_sum = sum_s c_s (exp(a_s / tau) - 1) and weight_sum = sum_s c_s.
struct Footprint {
  PixelRect rect;
  int samples = 0;
  std::vector<double> alpha;
  std::vector<double> exp_sum;
  std::vector<double> weight_sum;

  double at(int y, int x) const {
    return alpha[static_cast<std::size_t>(y - rect.y0) * rect.width() + (x - rect.x0)];
  }
};

/// Effective disk radius in pixels for a half-width given as a canvas fraction.
double radius_px(double half_width, int height, int width, const RasterOptions& options = {});

int sample_count(const Stroke& stroke, int height, int width, const RasterOptions& options = {});

/// Pixels that can receive nonzero alpha (clipped to the canvas).
PixelRect stroke_bounds(const Stroke& stroke, int height, int width,
                        const RasterOptions& options = {});

Footprint rasterize_footprint(const Stroke& stroke, int height, int width, const PixelRect& clip,
                              const RasterOptions& options = {});

/// Adds d(loss)/d(geometry, opacity) given d(loss)/d(alpha) laid out over footprint.rect.
void backprop_alpha(const Stroke& stroke, int height, int width, const Footprint& footprint,
                    std::span<const double> grad_alpha, StrokeGradient& out,
                    const RasterOptions& options = {});

struct RasterResult {
  AlphaMap alpha;
  ColorMap color;
};

RasterResult rasterize(const Stroke& stroke, int height, int width,
                       const RasterOptions& options = {});

/// Gradient of a loss with respect to all 13 stroke fields, given the loss gradients with
/// respect to the alpha map and the premultiplied color map. Throws kNonFiniteGradient.
StrokeGradient rasterize_with_grad(const Stroke& stroke, const AlphaMap& loss_grad_alpha,
                                   const ColorMap& loss_grad_color,
                                   const RasterOptions& options = {});

/// canvas * (1 - alpha) + color, clamped to [0, 1].
Canvas composite(const Canvas& canvas, const AlphaMap& alpha, const ColorMap& color);
/// canvas * (1 - beta * alpha) + beta * color, clamped to [0, 1].
Canvas composite_gated(const Canvas& canvas, const AlphaMap& alpha, const ColorMap& color,
                       double beta);

/// In-place gated over-composite of a footprint. `canvas` may be a crop whose top-left
/// pixel sits at (origin_x, origin_y) in footprint coordinates.
void composite_footprint(Canvas& canvas, const Footprint& footprint, Rgb color, double beta = 1.0,
                         int origin_x = 0, int origin_y = 0);

/// Rasterizes and composites one stroke onto the canvas.
void paint_stroke(Canvas& canvas, const Stroke& stroke, double beta = 1.0,
                  const RasterOptions& options = {});

struct RenderResult {
  Canvas canvas;
  /// Terminal canvas of each layer; layer l + 1 starts from layers[l].
  std::vector<Canvas> layers;
};

/// Folds the gated composite over the sequence. `num_layers` pads trailing empty layers.
RenderResult render_sequence(const StrokeSequence& sequence, const Canvas& init,
                             int num_layers = 0, const RasterOptions& options = {});

/// Canvas after the first `active_strokes` entries with nonzero importance.
Canvas render_prefix(const StrokeSequence& sequence, const Canvas& init, std::size_t active_strokes,
                     const RasterOptions& options = {});

/// Caps the half-widths and pulls control points inward so that the whole footprint of
/// the stroke lies inside `window` on a height x width canvas.
Stroke fit_to_window(const Stroke& stroke, const Window& window, int height, int width,
                     const RasterOptions& options = {});

/// Same containment as fit_to_window, but control points keep their positions (up to the
/// thinnest-stroke margin) and the half-widths shrink to whatever room is left.
Stroke shrink_to_window(const Stroke& stroke, const Window& window, int height, int width,
                        const RasterOptions& options = {});

/// Pixels whose centers lie inside the window.
PixelRect window_pixels(const Window& window, int height, int width);

/// Gradient of  mean_{p in region, c} (mask_p * (C_out - target))^2  for a gated stroke
/// list composited over `init`. Gate gradients are d(loss)/d(beta_i).
struct GatedL2Result {
  double loss = 0.0;
  std::vector<StrokeGradient> stroke_grads;
  std::vector<double> gate_grads;
};

GatedL2Result gated_l2_gradient(std::span<const Stroke> strokes, std::span<const double> gates,
                                const Canvas& init, const Canvas& target, const Plane* mask,
                                const PixelRect& region, const RasterOptions& options = {});

/// Forward-only counterpart of gated_l2_gradient.
double gated_l2_loss(std::span<const Stroke> strokes, std::span<const double> gates,
                     const Canvas& init, const Canvas& target, const Plane* mask,
                     const PixelRect& region, const RasterOptions& options = {});

}  // namespace stroke_painter
