#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "stroke_painter/geometry.hpp"
#include "stroke_painter/image.hpp"
#include "stroke_painter/renderer.hpp"
#include "stroke_painter/sequence.hpp"

namespace stroke_painter::testing {

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Stroke random_stroke(std::mt19937_64& rng, double max_width = 1.0) {
  auto p = Stroke{}.to_array();
  for (double& v : p) v = uniform(rng);
  p[kW0] *= max_width;
  p[kW2] *= max_width;
  return Stroke::from_array(p);
}

inline Window random_window(std::mt19937_64& rng, double min_side = 0.05) {
  const double w = uniform(rng, min_side, 1.0);
  const double h = uniform(rng, min_side, 1.0);
  return {uniform(rng, 0.0, 1.0 - w), uniform(rng, 0.0, 1.0 - h), w, h};
}

inline Canvas random_canvas(std::mt19937_64& rng, int height, int width) {
  Canvas c(height, width);
  for (double& v : c.values()) v = uniform(rng);
  return c;
}

inline Plane random_plane(std::mt19937_64& rng, int height, int width) {
  Plane p(height, width);
  for (double& v : p.values()) v = uniform(rng);
  return p;
}

inline Plane random_binary(std::mt19937_64& rng, int height, int width, double density = 0.5) {
  Plane p(height, width);
  for (double& v : p.values()) v = uniform(rng) < density ? 1.0 : 0.0;
  return p;
}

// Hard disk coverage by 16 x 16 point sampling per pixel.
inline Plane supersampled_disk(double cx, double cy, double radius, int height, int width,
                               int factor = 16) {
  Plane out(height, width);
  const double step = 1.0 / factor;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int hits = 0;
      for (int sy = 0; sy < factor; ++sy) {
        for (int sx = 0; sx < factor; ++sx) {
          const double px = x + (sx + 0.5) * step;
          const double py = y + (sy + 0.5) * step;
          if ((px - cx) * (px - cx) + (py - cy) * (py - cy) <= radius * radius) ++hits;
        }
      }
      out(y, x) = static_cast<double>(hits) / (factor * factor);
    }
  }
  return out;
}

// Linear functional of the raster: sum ga * alpha + sum gc * color.
struct LinearLoss {
  AlphaMap ga;
  ColorMap gc;

  double operator()(const Stroke& s, const RasterOptions& options = {}) const {
    const RasterResult r = rasterize(s, ga.height(), ga.width(), options);
    double acc = 0.0;
    const auto a = r.alpha.values();
    const auto c = r.color.values();
    const auto wa = ga.values();
    const auto wc = gc.values();
    for (std::size_t i = 0; i < a.size(); ++i) acc += wa[i] * a[i];
    for (std::size_t i = 0; i < c.size(); ++i) acc += wc[i] * c[i];
    return acc;
  }
};

inline LinearLoss sum_alpha_loss(int height, int width) {
  return {Plane(height, width, 1.0), Canvas(height, width)};
}

// Smooth random fields: an affine alpha weight and sinusoidal color weights.
inline LinearLoss smooth_random_loss(std::mt19937_64& rng, int height, int width) {
  const double c0 = uniform(rng, -0.5, 0.5);
  const double c1 = uniform(rng, -0.5, 0.5);
  const double c2 = uniform(rng, -0.5, 0.5);
  const double c3 = uniform(rng, -0.5, 0.5);
  LinearLoss loss{Plane(height, width), Canvas(height, width)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      loss.ga(y, x) = c0 + c1 * x / width + c2 * y / height;
      for (int c = 0; c < 3; ++c) loss.gc.at(y, x, c) = c3 * (c + 1) * std::sin(0.1 * x + c);
    }
  }
  return loss;
}

struct PartialCheck {
  double analytic = 0.0;
  double numeric = 0.0;
  bool ok = false;
};

inline bool partial_matches(double analytic, double numeric, double rel = 1e-3, double abs = 1e-6) {
  const double err = std::abs(analytic - numeric);
  return err <= abs || err <= rel * std::abs(numeric);
}

// Central differences with step h on every stroke field.
inline std::array<PartialCheck, Stroke::kParamCount> check_gradient(const Stroke& s,
                                                                     const LinearLoss& loss,
                                                                     double h = 1e-4,
                                                                     const RasterOptions& options = {}) {
  const StrokeGradient g = rasterize_with_grad(s, loss.ga, loss.gc, options);
  std::array<PartialCheck, Stroke::kParamCount> out;
  const auto base = s.to_array();
  for (std::size_t p = 0; p < Stroke::kParamCount; ++p) {
    auto up = base;
    auto down = base;
    up[p] += h;
    down[p] -= h;
    const double fd = (loss(Stroke::from_array(up), options) - loss(Stroke::from_array(down), options)) / (2.0 * h);
    out[p] = {g[p], fd, partial_matches(g[p], fd)};
  }
  return out;
}

// Over-compositing written out per pixel, independent of the library's compositing helpers.
inline Canvas reference_composite(const Canvas& canvas, const AlphaMap& alpha, const ColorMap& color,
                                  double beta = 1.0) {
  Canvas out = canvas;
  for (int y = 0; y < canvas.height(); ++y) {
    for (int x = 0; x < canvas.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = canvas.at(y, x, c) * (1.0 - beta * alpha(y, x)) + beta * color.at(y, x, c);
        out.at(y, x, c) = std::min(1.0, std::max(0.0, v));
      }
    }
  }
  return out;
}

// Fraction of a stroke's alpha mass whose pixel centers fall inside `window`.
inline double mass_inside(const Stroke& s, const Window& window, int height, int width,
                          const RasterOptions& options = {}) {
  const RasterResult r = rasterize(s, height, width, options);
  double total = 0.0;
  double inside = 0.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double a = r.alpha(y, x);
      total += a;
      const double u = (x + 0.5) / width;
      const double v = (y + 0.5) / height;
      if (u >= window.x && u <= window.x + window.w && v >= window.y && v <= window.y + window.h) inside += a;
    }
  }
  return total > 0.0 ? inside / total : 1.0;
}

inline StrokeSequence random_sequence(std::mt19937_64& rng, int count, int layers = 2) {
  StrokeSequence seq;
  int prev_layer = -1;
  int t = 0;
  for (int i = 0; i < count; ++i) {
    const int layer = i * layers / std::max(1, count);
    t = layer == prev_layer ? t + 1 : 0;
    prev_layer = layer;
    seq.entries.push_back({layer, t, random_stroke(rng, 0.2), uniform(rng) < 0.2 ? 0.0 : 1.0,
                           random_window(rng)});
  }
  return seq;
}

}  // namespace stroke_painter::testing
