#include "stroke_painter/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stroke_painter/error.hpp"
#include "stroke_painter/optim.hpp"

namespace stroke_painter {

namespace {

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Stroke to_canvas(const Stroke& unit, const Window& window, int height, int width,
                 const RasterOptions& raster) {
  return fit_to_window(param_adjust(unit, window), window, height, width, raster);
}

Rgb footprint_mean_color(const Stroke& stroke, const Canvas& target, const Plane& mask,
                         const PixelRect& region, const RasterOptions& raster) {
  const Footprint fp = rasterize_footprint(stroke, target.height(), target.width(), region, raster);
  double acc[3] = {0.0, 0.0, 0.0};
  double weight = 0.0;
  for (int y = fp.rect.y0; y < fp.rect.y1; ++y) {
    for (int x = fp.rect.x0; x < fp.rect.x1; ++x) {
      const double wgt = fp.at(y, x) * mask(y, x);
      for (int c = 0; c < 3; ++c) acc[c] += wgt * target.at(y, x, c);
      weight += wgt;
    }
  }
  if (weight <= 0.0) {
    for (int y = region.y0; y < region.y1; ++y) {
      for (int x = region.x0; x < region.x1; ++x) {
        for (int c = 0; c < 3; ++c) acc[c] += target.at(y, x, c);
      }
    }
    weight = static_cast<double>(region.area());
  }
  if (weight <= 0.0) return {0.5, 0.5, 0.5};
  return {acc[0] / weight, acc[1] / weight, acc[2] / weight};
}

void validate(const PlannerConfig& c) {
  if (c.num_layers < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one layer");
  if (c.total_strokes < 1 || c.total_strokes % c.num_layers != 0) {
    throw Error(ErrorCode::kInvalidArgument, "stroke budget must be a positive multiple of the layer count");
  }
  if (c.strokes_per_window < 1 || c.strokes_per_window > c.total_strokes / c.num_layers) {
    throw Error(ErrorCode::kInvalidArgument, "strokes per window must be in [1, T / L]");
  }
  if (c.descent.steps < 0) throw Error(ErrorCode::kInvalidArgument, "negative descent steps");
}

void check_target(const Canvas& target) {
  if (target.height() < 1 || target.width() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "empty target image");
  }
}

// Runs the window schedule of one coarse visit and appends its strokes.
struct VisitRunner {
  const Canvas& target;
  const Plane& mask;
  const PlannerConfig& config;
  std::mt19937_64& rng;
  Canvas& canvas;
  PlanResult& result;
  int layer;
  int timestep = 0;

  void run_window(const Window& window) {
    WindowStrokes ws = optimize_window_strokes(canvas, target, mask, window, config.strokes_per_window,
                                               config.descent, rng, config.raster);
    for (std::size_t i = 0; i < ws.strokes.size(); ++i) {
      result.sequence.entries.push_back({layer, timestep++, ws.strokes[i], 1.0, window});
      result.masked_distance_trace.back().push_back(ws.distances[i]);
    }
    canvas = std::move(ws.canvas);
  }

  void run_visit(const Window& coarse, int windows) {
    const WindowProposal proposal{config.w_min, config.h_min, config.jump_limit};
    Window prev = coarse;
    for (int j = 0; j < windows; ++j) {
      const double t_norm = windows > 1 ? static_cast<double>(j) / (windows - 1) : 0.0;
      Window window;
      try {
        window = propose_window(masked_residual(target, canvas, mask), coarse, prev, t_norm, proposal);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kEmptyResidual) continue;
        throw;
      }
      run_window(window);
      prev = window;
    }
  }
};

}  // namespace

Canvas blank_canvas(int height, int width, Rgb background) { return Canvas(height, width, background); }

LayeredMask mask_for_layer(const SaliencyBundle& bundle, int layer, int num_layers, double threshold) {
  if (layer < 0 || layer >= num_layers) throw Error(ErrorCode::kLayerOutOfRange, "layer out of range");
  const Plane& sal = bundle.saliency;
  if (num_layers == 1) return {Plane(sal.height(), sal.width(), 1.0), 0};
  if (bundle.ranked) return layered_mask_ranked(*bundle.ranked, layer, num_layers);
  if (num_layers == 2) return layered_mask(sal, layer, 2);
  return layered_mask_ranked(build_ranked_saliency(sal, bundle.boxes, num_layers, threshold), layer,
                             num_layers);
}

std::vector<Window> schedule_objects(const SaliencyBundle& bundle, int layer, int num_layers) {
  if (layer < 0 || layer >= num_layers) throw Error(ErrorCode::kLayerOutOfRange, "layer out of range");
  if (layer == 0) return {Window::full()};
  std::vector<Window> out;
  for (std::size_t idx : objects_for_layer(bundle.saliency, bundle.boxes, layer, num_layers)) {
    out.push_back(bundle.boxes[idx]);
  }
  if (out.empty()) out.push_back(Window::full());
  return out;
}

Plane masked_residual(const Canvas& target, const Canvas& canvas, const Plane& mask) {
  if (!target.same_shape(canvas) || !target.same_shape(mask)) {
    throw Error(ErrorCode::kDimensionMismatch, "residual inputs differ in size");
  }
  Plane out(target.height(), target.width());
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      double acc = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = mask(y, x) * (target.at(y, x, c) - canvas.at(y, x, c));
        acc += d * d;
      }
      out(y, x) = acc;
    }
  }
  return out;
}

Window propose_window(const Plane& residual, const Window& coarse, const Window& prev_local,
                      double t_norm, const WindowProposal& options) {
  if (!(coarse.w > 0.0 && coarse.h > 0.0)) {
    throw Error(ErrorCode::kDegenerateWindow, "coarse window has no extent");
  }
  const int height = residual.height();
  const int width = residual.width();
  const PixelRect cp = window_pixels(coarse, height, width);
  double total = 0.0;
  for (int y = cp.y0; y < cp.y1; ++y) {
    for (int x = cp.x0; x < cp.x1; ++x) {
      if (!(residual(y, x) >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "residual must be nonnegative");
      total += residual(y, x);
    }
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kEmptyResidual, "nothing left to paint in the window");

  const Window prev_unit = to_frame(prev_local, coarse);
  const double ew = std::max(1.0 - t_norm, options.w_min) * coarse.w;
  const double eh = std::max(1.0 - t_norm, options.h_min) * coarse.h;
  double cx = prev_local.center_x();
  double cy = prev_local.center_y();

  if (ew < coarse.w || eh < coarse.h) {
    Plane crop(cp.height(), cp.width());
    for (int y = cp.y0; y < cp.y1; ++y) {
      for (int x = cp.x0; x < cp.x1; ++x) crop(y - cp.y0, x - cp.x0) = residual(y, x);
    }
    const double sigma = std::max(0.5, 0.25 * std::min(ew * width, eh * height));
    const Plane blurred = gaussian_blur(crop, sigma);
    const auto bv = blurred.values();
    const double peak = *std::max_element(bv.begin(), bv.end());
    const double tie = peak * (1.0 - 1e-12);
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int y = 0; y < blurred.height(); ++y) {
      for (int x = 0; x < blurred.width(); ++x) {
        if (blurred(y, x) < tie) continue;
        const double px = (x + cp.x0 + 0.5) / width;
        const double py = (y + cp.y0 + 0.5) / height;
        const double d2 = (px - prev_local.center_x()) * (px - prev_local.center_x()) +
                          (py - prev_local.center_y()) * (py - prev_local.center_y());
        if (d2 < best_d2) {
          best_d2 = d2;
          cx = px;
          cy = py;
        }
      }
    }
    const double limit = options.jump_limit * coarse.diagonal();
    const double jump = std::sqrt(best_d2);
    if (jump > limit) {
      const double s = limit / jump;
      cx = prev_local.center_x() + (cx - prev_local.center_x()) * s;
      cy = prev_local.center_y() + (cy - prev_local.center_y()) * s;
    }
  }

  const WindowDelta delta{
      std::clamp((cx - 0.5 * ew - coarse.x) / coarse.w - prev_unit.x, -1.0, 1.0),
      std::clamp((cy - 0.5 * eh - coarse.y) / coarse.h - prev_unit.y, -1.0, 1.0), 0.0, 0.0};
  return markov_update(coarse, prev_unit, delta, t_norm, options.w_min, options.h_min);
}

WindowStrokes optimize_window_strokes(const Canvas& canvas, const Canvas& target, const Plane& mask,
                                      const Window& window, int k, const DescentConfig& descent,
                                      std::mt19937_64& rng, const RasterOptions& raster) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (!(window.w > 0.0 && window.h > 0.0)) {
    throw Error(ErrorCode::kDegenerateWindow, "window has no extent");
  }
  if (!canvas.same_shape(target) || !canvas.same_shape(mask)) {
    throw Error(ErrorCode::kDimensionMismatch, "canvas, target and mask differ in size");
  }
  const int height = canvas.height();
  const int width = canvas.width();
  WindowStrokes out{{}, canvas, {}};
  const PixelRect region = window_pixels(window, height, width);
  if (region.empty()) return out;

  constexpr std::size_t P = Stroke::kParamCount;
  std::vector<double> unit(P * k);
  for (int i = 0; i < k; ++i) {
    Stroke s;
    s.x0 = unit_draw(rng);
    s.y0 = unit_draw(rng);
    s.x1 = unit_draw(rng);
    s.y1 = unit_draw(rng);
    s.x2 = unit_draw(rng);
    s.y2 = unit_draw(rng);
    s.z0 = s.z2 = descent.init_opacity;
    s.w0 = s.w2 = descent.init_width;
    const Rgb c = footprint_mean_color(to_canvas(s, window, height, width, raster), target, mask,
                                       region, raster);
    s.r = std::clamp(c.r, 0.0, 1.0);
    s.g = std::clamp(c.g, 0.0, 1.0);
    s.b = std::clamp(c.b, 0.0, 1.0);
    const auto a = s.to_array();
    std::copy(a.begin(), a.end(), unit.begin() + P * i);
  }

  auto strokes_of = [&](const std::vector<double>& u) {
    std::vector<Stroke> strokes(k);
    for (int i = 0; i < k; ++i) {
      strokes[i] = to_canvas(Stroke::from_array(std::span<const double, P>(u.data() + P * i, P)),
                             window, height, width, raster);
    }
    return strokes;
  };

  const std::vector<double> gates(k, 1.0);
  const double width_scale = 0.5 * (window.w + window.h);
  Adam adam(unit.size());
  std::vector<double> grad(unit.size());
  std::vector<double> best = unit;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int step = 0; step <= descent.steps; ++step) {
    const auto strokes = strokes_of(unit);
    if (step == descent.steps) {
      const double loss = gated_l2_loss(strokes, gates, canvas, target, &mask, region, raster);
      if (loss < best_loss) best = unit;
      break;
    }
    const GatedL2Result r = gated_l2_gradient(strokes, gates, canvas, target, &mask, region, raster);
    if (r.loss < best_loss) {
      best_loss = r.loss;
      best = unit;
    }
    for (int i = 0; i < k; ++i) {
      const auto& g = r.stroke_grads[i];
      double* gu = grad.data() + P * i;
      for (std::size_t p = 0; p < P; ++p) gu[p] = g[p];
      for (std::size_t p : {kX0, kX1, kX2}) gu[p] *= window.w;
      for (std::size_t p : {kY0, kY1, kY2}) gu[p] *= window.h;
      gu[kW0] *= width_scale;
      gu[kW2] *= width_scale;
    }
    clip_grad_norm(grad, descent.grad_clip);
    adam.step(unit, grad, cosine_lr(descent.learning_rate, step, descent.steps));
    for (double& v : unit) v = std::clamp(v, 0.0, 1.0);
  }

  double current = masked_distance(target, out.canvas, mask);
  for (const Stroke& s : strokes_of(best)) {
    Canvas candidate = out.canvas;
    paint_stroke(candidate, s, 1.0, raster);
    const double d = masked_distance(target, candidate, mask);
    if (d < current) {
      current = d;
      out.canvas = std::move(candidate);
      out.strokes.push_back(s);
      out.distances.push_back(d);
    }
  }
  return out;
}

PlanResult plan(const PaintingTask& task) {
  const PlannerConfig& config = task.config;
  validate(config);
  check_target(task.target);
  const int height = task.target.height();
  const int width = task.target.width();
  const int L = config.num_layers;
  if (L > 1 && !task.target.same_shape(task.saliency.saliency)) {
    throw Error(ErrorCode::kDimensionMismatch, "saliency differs in size from the target");
  }

  PlanResult result;
  std::mt19937_64 rng(config.seed);
  Canvas canvas = blank_canvas(height, width, config.background);
  const int windows_per_layer = (config.total_strokes / L) / config.strokes_per_window;

  for (int layer = 0; layer < L; ++layer) {
    const Plane mask = L == 1 ? Plane(height, width, 1.0)
                              : mask_for_layer(task.saliency, layer, L, config.binarize_threshold).values;
    const auto visits = schedule_objects(task.saliency, layer, L);
    result.masked_distance_trace.push_back({masked_distance(task.target, canvas, mask)});
    VisitRunner runner{task.target, mask, config, rng, canvas, result, layer};
    const int n = static_cast<int>(visits.size());
    for (int v = 0; v < n; ++v) {
      result.coarse_visits.push_back(visits[v]);
      const int windows = windows_per_layer / n + (v < windows_per_layer % n ? 1 : 0);
      if (window_pixels(visits[v], height, width).empty()) continue;
      runner.run_visit(visits[v], windows);
    }
    result.layer_canvases.push_back(canvas);
  }
  return result;
}

PlanResult plan_uniform_grid(const Canvas& target, const PlannerConfig& config) {
  PlannerConfig flat = config;
  flat.num_layers = 1;
  validate(flat);
  check_target(target);
  const int height = target.height();
  const int width = target.width();

  PlanResult result;
  std::mt19937_64 rng(config.seed);
  Canvas canvas = blank_canvas(height, width, config.background);
  const Plane mask(height, width, 1.0);
  const int windows = flat.total_strokes / flat.strokes_per_window;
  const int side = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(windows)))));
  const double cell = 1.0 / side;

  result.masked_distance_trace.push_back({masked_distance(target, canvas, mask)});
  result.coarse_visits.push_back(Window::full());
  VisitRunner runner{target, mask, flat, rng, canvas, result, 0};
  for (int j = 0; j < windows; ++j) {
    const int idx = j % (side * side);
    runner.run_window({(idx % side) * cell, (idx / side) * cell, cell, cell});
  }
  result.layer_canvases.push_back(canvas);
  return result;
}

}  // namespace stroke_painter
