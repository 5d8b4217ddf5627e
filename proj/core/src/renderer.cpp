#include "stroke_painter/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "stroke_painter/error.hpp"
#include "stroke_painter/parallel.hpp"

namespace stroke_painter {

namespace {

// Quintic smoothstep and its derivative on [0, 1].
double smoother(double u) { return u * u * u * (u * (6.0 * u - 15.0) + 10.0); }
double smoother_grad(double u) { return 30.0 * u * u * (u - 1.0) * (u - 1.0); }

// max over u of d(smoother)/du
constexpr double kMaxRampSlope = 1.875;

double min_side(int height, int width) { return static_cast<double>(std::min(height, width)); }

struct CurveSample {
  double t = 0.0;
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double cx = 0.0, cy = 0.0;
  double half_width = 0.0;
  double radius = 0.0;
  double opacity = 0.0;
};

CurveSample sample_at(const Stroke& s, int index, int count, int height, int width,
                      const RasterOptions& options) {
  CurveSample c;
  c.t = count > 1 ? static_cast<double>(index) / (count - 1) : 0.0;
  const double t = c.t;
  c.b0 = (1.0 - t) * (1.0 - t);
  c.b1 = 2.0 * t * (1.0 - t);
  c.b2 = t * t;
  c.cx = width * (c.b0 * s.x0 + c.b1 * s.x1 + c.b2 * s.x2);
  c.cy = height * (c.b0 * s.y0 + c.b1 * s.y1 + c.b2 * s.y2);
  c.half_width = (1.0 - t) * s.w0 + t * s.w2;
  c.radius = radius_px(c.half_width, height, width, options);
  c.opacity = (1.0 - t) * s.z0 + t * s.z2;
  return c;
}

// Pixels whose centers lie within `reach` of (cx, cy).
PixelRect disk_rect(double cx, double cy, double reach) {
  return {static_cast<int>(std::ceil(cx - reach - 0.5)), static_cast<int>(std::ceil(cy - reach - 0.5)),
          static_cast<int>(std::floor(cx + reach - 0.5)) + 1,
          static_cast<int>(std::floor(cy + reach - 0.5)) + 1};
}

// Half-open column range of pixel centers with (x + 0.5 - cx)^2 <= r2 - dy2, clipped to [lo, hi).
std::pair<int, int> row_span(double cx, double r2, double dy2, int lo, int hi) {
  const double rest = r2 - dy2;
  if (rest < 0.0) return {lo, lo};
  const double h = std::sqrt(rest);
  const int a = std::max(lo, static_cast<int>(std::ceil(cx - h - 0.5)));
  const int b = std::min(hi, static_cast<int>(std::floor(cx + h - 0.5)) + 1);
  return a < b ? std::pair{a, b} : std::pair{lo, lo};
}

void check_same(const Canvas& a, const Plane& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kDimensionMismatch, what);
}

void check_same(const Canvas& a, const Canvas& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kDimensionMismatch, what);
}

double over(double under, double alpha, double premultiplied, double beta) {
  return std::clamp(under * (1.0 - beta * alpha) + beta * premultiplied, 0.0, 1.0);
}

}  // namespace

bool StrokeGradient::finite() const {
  return std::all_of(d.begin(), d.end(), [](double v) { return std::isfinite(v); });
}

StrokeGradient& StrokeGradient::operator+=(const StrokeGradient& o) {
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += o.d[i];
  return *this;
}

double radius_px(double half_width, int height, int width, const RasterOptions& options) {
  return half_width * min_side(height, width) + options.min_radius_px;
}

int sample_count(const Stroke& s, int height, int width, const RasterOptions& options) {
  const double len = std::hypot((s.x1 - s.x0) * width, (s.y1 - s.y0) * height) +
                     std::hypot((s.x2 - s.x1) * width, (s.y2 - s.y1) * height);
  const double r_min = std::min(radius_px(s.w0, height, width, options),
                                radius_px(s.w2, height, width, options));
  // Neighbouring samples must differ by well under tau on the stroke flank, otherwise the
  // smooth max degenerates into a hard switch between a handful of disks.
  const double spacing =
      std::clamp(std::sqrt(options.temperature * options.edge_px * r_min / kMaxRampSlope), 0.25, 1.0);
  // Power-of-two counts keep the sample layout piecewise constant over wide parameter ranges.
  const double wanted = std::ceil(len / spacing) + 1.0;
  int count = std::max(1, options.min_samples);
  while (count < wanted && count < options.max_samples) count *= 2;
  return std::min(count, std::max(options.min_samples, options.max_samples));
}

PixelRect stroke_bounds(const Stroke& s, int height, int width, const RasterOptions& options) {
  const double reach = std::max(radius_px(s.w0, height, width, options),
                                radius_px(s.w2, height, width, options)) +
                       0.5 * options.edge_px;
  const double xs[] = {s.x0 * width, s.x1 * width, s.x2 * width};
  const double ys[] = {s.y0 * height, s.y1 * height, s.y2 * height};
  const auto [xmin, xmax] = std::minmax({xs[0], xs[1], xs[2]});
  const auto [ymin, ymax] = std::minmax({ys[0], ys[1], ys[2]});
  const PixelRect r{static_cast<int>(std::ceil(xmin - reach - 0.5)),
                    static_cast<int>(std::ceil(ymin - reach - 0.5)),
                    static_cast<int>(std::floor(xmax + reach - 0.5)) + 1,
                    static_cast<int>(std::floor(ymax + reach - 0.5)) + 1};
  return r.intersect({0, 0, width, height});
}

Footprint rasterize_footprint(const Stroke& s, int height, int width, const PixelRect& clip,
                              const RasterOptions& options) {
  Footprint fp;
  fp.rect = stroke_bounds(s, height, width, options).intersect(clip);
  if (fp.rect.empty()) fp.rect = {};
  fp.samples = sample_count(s, height, width, options);
  fp.alpha.assign(fp.rect.area(), 0.0);
  fp.exp_sum.assign(fp.rect.area(), 0.0);
  fp.weight_sum.assign(fp.rect.area(), 0.0);
  if (fp.rect.empty()) return fp;

  const double tau = options.temperature;
  const double edge = options.edge_px;
  const int rw = fp.rect.width();
  for (int k = 0; k < fp.samples; ++k) {
    const CurveSample c = sample_at(s, k, fp.samples, height, width, options);
    const double reach = c.radius + 0.5 * edge;
    const double outer2 = reach * reach;
    const double core = c.radius - 0.5 * edge;
    const double core2 = core > 0.0 ? core * core : -1.0;
    const double full = std::expm1(c.opacity / tau);
    const PixelRect disk = disk_rect(c.cx, c.cy, reach).intersect(fp.rect);
    for (int y = disk.y0; y < disk.y1; ++y) {
      const double dy = (y + 0.5) - c.cy;
      const auto [o0, o1] = row_span(c.cx, outer2, dy * dy, disk.x0, disk.x1);
      if (o0 == o1) continue;
      auto [i0, i1] = row_span(c.cx, core2, dy * dy, o0, o1);
      if (i0 == i1) i0 = i1 = o1;
      const std::size_t row = static_cast<std::size_t>(y - fp.rect.y0) * rw - fp.rect.x0;
      double* num = &fp.exp_sum[row];
      double* den = &fp.weight_sum[row];
      for (int x = i0; x < i1; ++x) {
        num[x] += full;
        den[x] += 1.0;
      }
      auto ring = [&](int x) {
        const double dx = (x + 0.5) - c.cx;
        const double u = (c.radius - std::sqrt(dx * dx + dy * dy)) / edge + 0.5;
        if (u <= 0.0) return;
        const double cov = u >= 1.0 ? 1.0 : smoother(u);
        num[x] += cov * std::expm1(c.opacity * cov / tau);
        den[x] += cov;
      };
      for (int x = o0; x < i0; ++x) ring(x);
      for (int x = i1; x < o1; ++x) ring(x);
    }
  }
  for (std::size_t i = 0; i < fp.alpha.size(); ++i) {
    if (fp.weight_sum[i] > 0.0) {
      fp.alpha[i] = std::max(0.0, tau * std::log1p(fp.exp_sum[i] / fp.weight_sum[i]));
    }
  }
  return fp;
}

void backprop_alpha(const Stroke& s, int height, int width, const Footprint& fp,
                    std::span<const double> grad_alpha, StrokeGradient& out,
                    const RasterOptions& options) {
  if (grad_alpha.size() != fp.rect.area()) {
    throw Error(ErrorCode::kDimensionMismatch, "alpha gradient does not cover the footprint");
  }
  if (fp.rect.empty()) return;

  const double tau = options.temperature;
  const double edge = options.edge_px;
  const double side = min_side(height, width);
  const int rw = fp.rect.width();

  // q = g / (den + num) per pixel, with row prefix sums for the interior runs.
  std::vector<double> q(fp.rect.area(), 0.0);
  std::vector<double> prefix(fp.rect.area() + fp.rect.height(), 0.0);
  for (int y = 0; y < fp.rect.height(); ++y) {
    double acc = 0.0;
    for (int x = 0; x < rw; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * rw + x;
      const double den = fp.weight_sum[idx];
      if (grad_alpha[idx] != 0.0 && den > 0.0) q[idx] = grad_alpha[idx] / (den + fp.exp_sum[idx]);
      prefix[static_cast<std::size_t>(y) * (rw + 1) + x] = acc;
      acc += q[idx];
    }
    prefix[static_cast<std::size_t>(y) * (rw + 1) + rw] = acc;
  }

  for (int k = 0; k < fp.samples; ++k) {
    const CurveSample c = sample_at(s, k, fp.samples, height, width, options);
    const double reach = c.radius + 0.5 * edge;
    const double outer2 = reach * reach;
    const double core = c.radius - 0.5 * edge;
    const double core2 = core > 0.0 ? core * core : -1.0;
    const double full = std::expm1(c.opacity / tau);
    const PixelRect disk = disk_rect(c.cx, c.cy, reach).intersect(fp.rect);

    double g_cx = 0.0, g_cy = 0.0, g_radius = 0.0, g_opacity = 0.0, g_interior = 0.0;
    for (int y = disk.y0; y < disk.y1; ++y) {
      const double dy = (y + 0.5) - c.cy;
      const auto [o0, o1] = row_span(c.cx, outer2, dy * dy, disk.x0, disk.x1);
      if (o0 == o1) continue;
      auto [i0, i1] = row_span(c.cx, core2, dy * dy, o0, o1);
      if (i0 == i1) i0 = i1 = o1;
      const std::size_t row = static_cast<std::size_t>(y - fp.rect.y0) * rw - fp.rect.x0;
      if (i0 < i1) {
        const std::size_t run = static_cast<std::size_t>(y - fp.rect.y0) * (rw + 1) - fp.rect.x0;
        g_interior += prefix[run + i1] - prefix[run + i0];
      }
      auto ring = [&](int x) {
        const std::size_t idx = row + x;
        const double qx = q[idx];
        if (qx == 0.0) return;
        const double dx = (x + 0.5) - c.cx;
        const double dist = std::sqrt(dx * dx + dy * dy + 1e-24);
        const double u = (c.radius - dist) / edge + 0.5;
        if (u <= 0.0) return;
        const bool inner = u >= 1.0;
        const double cov = inner ? 1.0 : smoother(u);
        const double m = std::expm1(c.opacity * cov / tau);
        // alpha = tau * log(sum c E / sum c) with E = exp(z c / tau)
        const double weight = cov * (1.0 + m) * qx;
        g_opacity += weight * cov;
        if (!inner) {
          const double den = fp.weight_sum[idx];
          const double direct = qx * tau * (m - fp.exp_sum[idx] / den);
          const double gu = (weight * c.opacity + direct) * smoother_grad(u) / edge;
          g_radius += gu;
          // d(dist)/d(cx) = -dx / dist and d(u)/d(dist) = -1 / edge
          g_cx += gu * dx / dist;
          g_cy += gu * dy / dist;
        }
      };
      for (int x = o0; x < i0; ++x) ring(x);
      for (int x = i1; x < o1; ++x) ring(x);
    }
    g_opacity += g_interior * (1.0 + full);
    const double t = c.t;
    out[kX0] += g_cx * width * c.b0;
    out[kX1] += g_cx * width * c.b1;
    out[kX2] += g_cx * width * c.b2;
    out[kY0] += g_cy * height * c.b0;
    out[kY1] += g_cy * height * c.b1;
    out[kY2] += g_cy * height * c.b2;
    out[kZ0] += g_opacity * (1.0 - t);
    out[kZ2] += g_opacity * t;
    const double g_half_width = g_radius * side;
    out[kW0] += g_half_width * (1.0 - t);
    out[kW2] += g_half_width * t;
  }
}

RasterResult rasterize(const Stroke& stroke, int height, int width, const RasterOptions& options) {
  if (height < 1 || width < 1) throw Error(ErrorCode::kInvalidArgument, "empty raster");
  RasterResult out{AlphaMap(height, width, 0.0), ColorMap(height, width)};
  const Footprint fp = rasterize_footprint(stroke, height, width, {0, 0, width, height}, options);
  const Rgb color{stroke.r, stroke.g, stroke.b};
  for (int y = fp.rect.y0; y < fp.rect.y1; ++y) {
    for (int x = fp.rect.x0; x < fp.rect.x1; ++x) {
      const double a = fp.at(y, x);
      out.alpha(y, x) = a;
      out.color.set_pixel(y, x, {a * color.r, a * color.g, a * color.b});
    }
  }
  return out;
}

StrokeGradient rasterize_with_grad(const Stroke& stroke, const AlphaMap& loss_grad_alpha,
                                   const ColorMap& loss_grad_color, const RasterOptions& options) {
  check_same(loss_grad_color, loss_grad_alpha, "alpha and color gradients differ in size");
  const int height = loss_grad_alpha.height();
  const int width = loss_grad_alpha.width();
  if (height < 1 || width < 1) throw Error(ErrorCode::kInvalidArgument, "empty raster");

  const Footprint fp = rasterize_footprint(stroke, height, width, {0, 0, width, height}, options);
  StrokeGradient grad;
  std::vector<double> g_alpha(fp.rect.area(), 0.0);
  const double rgb[3] = {stroke.r, stroke.g, stroke.b};
  for (int y = fp.rect.y0; y < fp.rect.y1; ++y) {
    for (int x = fp.rect.x0; x < fp.rect.x1; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y - fp.rect.y0) * fp.rect.width() + (x - fp.rect.x0);
      const double a = fp.alpha[idx];
      double g = loss_grad_alpha(y, x);
      for (int c = 0; c < 3; ++c) {
        g += loss_grad_color.at(y, x, c) * rgb[c];
        grad[kR + c] += loss_grad_color.at(y, x, c) * a;
      }
      g_alpha[idx] = g;
    }
  }
  backprop_alpha(stroke, height, width, fp, g_alpha, grad, options);
  if (!grad.finite()) throw Error(ErrorCode::kNonFiniteGradient, "stroke gradient is not finite");
  return grad;
}

Canvas composite(const Canvas& canvas, const AlphaMap& alpha, const ColorMap& color) {
  return composite_gated(canvas, alpha, color, 1.0);
}

Canvas composite_gated(const Canvas& canvas, const AlphaMap& alpha, const ColorMap& color,
                       double beta) {
  check_same(canvas, alpha, "canvas and alpha differ in size");
  check_same(canvas, color, "canvas and color differ in size");
  Canvas out = canvas;
  for (int y = 0; y < canvas.height(); ++y) {
    for (int x = 0; x < canvas.width(); ++x) {
      const double a = alpha(y, x);
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = over(canvas.at(y, x, c), a, color.at(y, x, c), beta);
      }
    }
  }
  return out;
}

void composite_footprint(Canvas& canvas, const Footprint& fp, Rgb color, double beta, int origin_x,
                         int origin_y) {
  const PixelRect local = PixelRect{origin_x, origin_y, origin_x + canvas.width(),
                                    origin_y + canvas.height()}
                              .intersect(fp.rect);
  const double rgb[3] = {color.r, color.g, color.b};
  for (int y = local.y0; y < local.y1; ++y) {
    for (int x = local.x0; x < local.x1; ++x) {
      const double a = fp.at(y, x);
      if (a == 0.0) continue;
      for (int c = 0; c < 3; ++c) {
        double& px = canvas.at(y - origin_y, x - origin_x, c);
        px = over(px, a, a * rgb[c], beta);
      }
    }
  }
}

void paint_stroke(Canvas& canvas, const Stroke& stroke, double beta, const RasterOptions& options) {
  const Footprint fp =
      rasterize_footprint(stroke, canvas.height(), canvas.width(), canvas.bounds(), options);
  composite_footprint(canvas, fp, {stroke.r, stroke.g, stroke.b}, beta);
}

RenderResult render_sequence(const StrokeSequence& sequence, const Canvas& init, int num_layers,
                             const RasterOptions& options) {
  if (!sequence.is_sorted()) {
    throw Error(ErrorCode::kInvalidArgument, "sequence is not sorted by (layer, timestep)");
  }
  RenderResult out{init, {}};
  const int layers = std::max(num_layers, sequence.layer_count());
  out.layers.reserve(layers);
  for (const auto& entry : sequence.entries) {
    if (entry.layer < 0) throw Error(ErrorCode::kLayerOutOfRange, "negative layer index");
    while (static_cast<int>(out.layers.size()) < entry.layer) out.layers.push_back(out.canvas);
    if (!entry.active()) continue;
    paint_stroke(out.canvas, entry.stroke, entry.importance, options);
  }
  while (static_cast<int>(out.layers.size()) < layers) out.layers.push_back(out.canvas);
  return out;
}

Canvas render_prefix(const StrokeSequence& sequence, const Canvas& init, std::size_t active_strokes,
                     const RasterOptions& options) {
  Canvas canvas = init;
  std::size_t painted = 0;
  for (const auto& entry : sequence.entries) {
    if (painted >= active_strokes) break;
    if (!entry.active()) continue;
    paint_stroke(canvas, entry.stroke, entry.importance, options);
    ++painted;
  }
  return canvas;
}

Stroke fit_to_window(const Stroke& stroke, const Window& window, int height, int width,
                     const RasterOptions& options) {
  Stroke s = stroke.clamped();
  const double left = window.x * width;
  const double right = (window.x + window.w) * width;
  const double top = window.y * height;
  const double bottom = (window.y + window.h) * height;
  const double side = min_side(height, width);

  const double allowed = 0.5 * std::min(right - left, bottom - top) - 0.5 * options.edge_px;
  const double cap = std::max(0.0, allowed - options.min_radius_px) / side;
  s.w0 = std::min(s.w0, cap);
  s.w2 = std::min(s.w2, cap);

  const double margin = std::max(radius_px(s.w0, height, width, options),
                                 radius_px(s.w2, height, width, options)) +
                        0.5 * options.edge_px;
  auto fit = [](double v, double lo, double hi, double extent) {
    if (lo > hi) return (lo + hi) / (2.0 * extent);
    return std::clamp(v * extent, lo, hi) / extent;
  };
  s.x0 = fit(s.x0, left + margin, right - margin, width);
  s.x1 = fit(s.x1, left + margin, right - margin, width);
  s.x2 = fit(s.x2, left + margin, right - margin, width);
  s.y0 = fit(s.y0, top + margin, bottom - margin, height);
  s.y1 = fit(s.y1, top + margin, bottom - margin, height);
  s.y2 = fit(s.y2, top + margin, bottom - margin, height);
  return s.clamped();
}

Stroke shrink_to_window(const Stroke& stroke, const Window& window, int height, int width,
                        const RasterOptions& options) {
  Stroke s = stroke.clamped();
  const double left = window.x * width;
  const double right = (window.x + window.w) * width;
  const double top = window.y * height;
  const double bottom = (window.y + window.h) * height;
  const double margin = options.min_radius_px + 0.5 * options.edge_px;
  auto fit = [](double v, double lo, double hi, double extent) {
    if (lo > hi) return (lo + hi) / (2.0 * extent);
    return std::clamp(v * extent, lo, hi) / extent;
  };
  double room = std::numeric_limits<double>::infinity();
  for (auto [px, py] : {std::pair{&s.x0, &s.y0}, std::pair{&s.x1, &s.y1}, std::pair{&s.x2, &s.y2}}) {
    *px = fit(*px, left + margin, right - margin, width);
    *py = fit(*py, top + margin, bottom - margin, height);
    const double x = *px * width;
    const double y = *py * height;
    room = std::min({room, x - left, right - x, y - top, bottom - y});
  }
  const double cap = std::max(0.0, room - margin) / min_side(height, width);
  s.w0 = std::min(s.w0, cap);
  s.w2 = std::min(s.w2, cap);
  return s.clamped();
}

PixelRect window_pixels(const Window& window, int height, int width) {
  const PixelRect r{static_cast<int>(std::ceil(window.x * width - 0.5)),
                    static_cast<int>(std::ceil(window.y * height - 0.5)),
                    static_cast<int>(std::floor((window.x + window.w) * width - 0.5)) + 1,
                    static_cast<int>(std::floor((window.y + window.h) * height - 0.5)) + 1};
  return r.intersect({0, 0, width, height});
}

namespace {

struct ForwardTrace {
  PixelRect region;
  Canvas work;
  std::vector<Footprint> footprints;
  std::vector<std::vector<double>> under;
};

ForwardTrace forward_pass(std::span<const Stroke> strokes, std::span<const double> gates,
                          const Canvas& init, const PixelRect& region_in, bool keep_under,
                          const RasterOptions& options) {
  if (strokes.size() != gates.size()) {
    throw Error(ErrorCode::kLengthMismatch, "strokes and gates differ in length");
  }
  ForwardTrace tr;
  tr.region = region_in.intersect(init.bounds());
  tr.work = init.crop(tr.region);
  tr.footprints.resize(strokes.size());
  const int height = init.height();
  const int width = init.width();
  parallel_for(strokes.size(), [&](std::size_t i) {
    tr.footprints[i] = rasterize_footprint(strokes[i], height, width, tr.region, options);
  });
  if (keep_under) tr.under.resize(strokes.size());
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    const Footprint& fp = tr.footprints[i];
    if (keep_under) {
      auto& saved = tr.under[i];
      saved.reserve(fp.rect.area() * 3);
      for (int y = fp.rect.y0; y < fp.rect.y1; ++y) {
        for (int x = fp.rect.x0; x < fp.rect.x1; ++x) {
          for (int c = 0; c < 3; ++c) {
            saved.push_back(tr.work.at(y - tr.region.y0, x - tr.region.x0, c));
          }
        }
      }
    }
    if (gates[i] != 0.0) {
      composite_footprint(tr.work, fp, {strokes[i].r, strokes[i].g, strokes[i].b}, gates[i],
                          tr.region.x0, tr.region.y0);
    }
  }
  return tr;
}

void check_problem(const Canvas& init, const Canvas& target, const Plane* mask) {
  check_same(init, target, "init and target differ in size");
  if (mask) check_same(init, *mask, "mask differs in size");
}

}  // namespace

double gated_l2_loss(std::span<const Stroke> strokes, std::span<const double> gates,
                     const Canvas& init, const Canvas& target, const Plane* mask,
                     const PixelRect& region, const RasterOptions& options) {
  check_problem(init, target, mask);
  const ForwardTrace tr = forward_pass(strokes, gates, init, region, false, options);
  if (tr.region.empty()) return 0.0;
  double acc = 0.0;
  for (int y = tr.region.y0; y < tr.region.y1; ++y) {
    for (int x = tr.region.x0; x < tr.region.x1; ++x) {
      const double m = mask ? (*mask)(y, x) : 1.0;
      for (int c = 0; c < 3; ++c) {
        const double d = m * (tr.work.at(y - tr.region.y0, x - tr.region.x0, c) - target.at(y, x, c));
        acc += d * d;
      }
    }
  }
  return acc / (3.0 * static_cast<double>(tr.region.area()));
}

GatedL2Result gated_l2_gradient(std::span<const Stroke> strokes, std::span<const double> gates,
                                const Canvas& init, const Canvas& target, const Plane* mask,
                                const PixelRect& region, const RasterOptions& options) {
  check_problem(init, target, mask);
  ForwardTrace tr = forward_pass(strokes, gates, init, region, true, options);
  GatedL2Result out;
  out.stroke_grads.resize(strokes.size());
  out.gate_grads.assign(strokes.size(), 0.0);
  if (tr.region.empty()) return out;

  const PixelRect& reg = tr.region;
  const double norm = 1.0 / (3.0 * static_cast<double>(reg.area()));
  Canvas grad(reg.height(), reg.width());
  double acc = 0.0;
  for (int y = reg.y0; y < reg.y1; ++y) {
    for (int x = reg.x0; x < reg.x1; ++x) {
      const double m = mask ? (*mask)(y, x) : 1.0;
      for (int c = 0; c < 3; ++c) {
        const double diff = tr.work.at(y - reg.y0, x - reg.x0, c) - target.at(y, x, c);
        acc += m * m * diff * diff;
        grad.at(y - reg.y0, x - reg.x0, c) = 2.0 * norm * m * m * diff;
      }
    }
  }
  out.loss = acc * norm;

  std::vector<std::vector<double>> alpha_grads(strokes.size());
  for (std::size_t i = strokes.size(); i-- > 0;) {
    const Footprint& fp = tr.footprints[i];
    const double beta = gates[i];
    const double rgb[3] = {strokes[i].r, strokes[i].g, strokes[i].b};
    auto& g_alpha = alpha_grads[i];
    g_alpha.assign(fp.rect.area(), 0.0);
    double g_gate = 0.0;
    double g_rgb[3] = {0.0, 0.0, 0.0};
    std::size_t idx = 0;
    for (int y = fp.rect.y0; y < fp.rect.y1; ++y) {
      for (int x = fp.rect.x0; x < fp.rect.x1; ++x, ++idx) {
        const double a = fp.alpha[idx];
        if (a == 0.0) continue;
        const double* under = &tr.under[i][idx * 3];
        double q = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double gc = grad.at(y - reg.y0, x - reg.x0, c);
          q += gc * (rgb[c] - under[c]);
          g_rgb[c] += beta * a * gc;
        }
        g_gate += a * q;
        g_alpha[idx] = beta * q;
        const double keep = 1.0 - beta * a;
        for (int c = 0; c < 3; ++c) grad.at(y - reg.y0, x - reg.x0, c) *= keep;
      }
    }
    out.gate_grads[i] = g_gate;
    for (int c = 0; c < 3; ++c) out.stroke_grads[i][kR + c] = g_rgb[c];
  }

  const int height = init.height();
  const int width = init.width();
  parallel_for(strokes.size(), [&](std::size_t i) {
    if (gates[i] == 0.0) return;
    backprop_alpha(strokes[i], height, width, tr.footprints[i], alpha_grads[i],
                   out.stroke_grads[i], options);
  });
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    if (!out.stroke_grads[i].finite() || !std::isfinite(out.gate_grads[i])) {
      throw Error(ErrorCode::kNonFiniteGradient, "sequence gradient is not finite");
    }
  }
  return out;
}

}  // namespace stroke_painter
