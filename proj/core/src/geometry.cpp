#include "stroke_painter/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "stroke_painter/error.hpp"

namespace stroke_painter {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Order-independent sum: terms are added in ascending order.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

void clamp_axis(double& pos, double& extent, double lo, double size) {
  extent = std::max(0.0, extent);
  const double hi = lo + size;
  if (pos < lo) pos = lo;
  if (pos + extent > hi) pos = hi - extent;
  if (pos < lo) pos = lo;
  if (pos + extent > hi) extent = std::max(0.0, hi - pos);
}

}  // namespace

std::array<double, Stroke::kParamCount> Stroke::to_array() const {
  return {x0, y0, x1, y1, x2, y2, z0, z2, w0, w2, r, g, b};
}

Stroke Stroke::from_array(std::span<const double, kParamCount> p) {
  return {p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9], p[10], p[11], p[12]};
}

bool Stroke::valid() const {
  for (double v : to_array()) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

Stroke Stroke::clamped() const {
  auto p = to_array();
  for (double& v : p) v = std::isfinite(v) ? clamp01(v) : 0.0;
  return from_array(p);
}

double Window::diagonal() const { return std::hypot(w, h); }

bool Window::contains(const Window& inner, double tol) const {
  return inner.x >= x - tol && inner.y >= y - tol && inner.x + inner.w <= x + w + tol &&
         inner.y + inner.h <= y + h + tol;
}

bool Window::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
         w >= 0.0 && h >= 0.0 && Window::full().contains(*this, 1e-9);
}

Window object_select(std::span<const double> alphas, std::span<const Window> boxes) {
  if (alphas.size() != boxes.size()) {
    throw Error(ErrorCode::kLengthMismatch, "alphas and boxes differ in length");
  }
  if (alphas.empty()) throw Error(ErrorCode::kLengthMismatch, "no candidate boxes");

  std::vector<double> weights(alphas.begin(), alphas.end());
  for (double a : weights) {
    if (!(a >= 0.0)) throw Error(ErrorCode::kNonConvexCoefficients, "negative coefficient");
  }
  std::vector<double> copy = weights;
  if (std::abs(sorted_sum(copy) - 1.0) > kConvexTolerance) {
    throw Error(ErrorCode::kNonConvexCoefficients, "coefficients do not sum to one");
  }

  auto component = [&](auto get) {
    std::vector<double> terms;
    terms.reserve(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) terms.push_back(weights[i] * get(boxes[i]));
    return sorted_sum(terms);
  };
  return {component([](const Window& b) { return b.x; }),
          component([](const Window& b) { return b.y; }),
          component([](const Window& b) { return b.w; }),
          component([](const Window& b) { return b.h; })};
}

Window clamp_window(Window w, const Window& bounds) {
  clamp_axis(w.x, w.w, bounds.x, std::max(0.0, bounds.w));
  clamp_axis(w.y, w.h, bounds.y, std::max(0.0, bounds.h));
  return w;
}

Window to_frame(const Window& w, const Window& frame) {
  if (frame.w <= 0.0 || frame.h <= 0.0) {
    throw Error(ErrorCode::kDegenerateWindow, "frame has no extent");
  }
  return {(w.x - frame.x) / frame.w, (w.y - frame.y) / frame.h, w.w / frame.w, w.h / frame.h};
}

Window from_frame(const Window& unit, const Window& frame) {
  return {frame.x + unit.x * frame.w, frame.y + unit.y * frame.h, unit.w * frame.w,
          unit.h * frame.h};
}

Window markov_update(const Window& coarse_next, const Window& local_prev_unit,
                     const WindowDelta& delta, double t_norm, double w_min, double h_min) {
  if (!(t_norm >= 0.0 && t_norm <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "t_norm outside [0, 1]");
  }
  if (!(w_min > 0.0 && w_min <= 1.0 && h_min > 0.0 && h_min <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "minimum window side outside (0, 1]");
  }
  if (!(coarse_next.w > 0.0 && coarse_next.h > 0.0)) {
    throw Error(ErrorCode::kDegenerateWindow, "coarse window has no extent");
  }

  const Window& g = coarse_next;
  Window next{
      g.x + (local_prev_unit.x + delta.dx) * g.w,
      g.y + (local_prev_unit.y + delta.dy) * g.h,
      (std::max(1.0 - t_norm, w_min) + delta.dw) * g.w,
      (std::max(1.0 - t_norm, h_min) + delta.dh) * g.h,
  };
  const Window bounds = clamp_window(g, Window::full());
  return clamp_window(next, bounds);
}

Stroke param_adjust(const Stroke& s, const Window& win) {
  const double scale = 0.5 * (win.w + win.h);
  Stroke out = s;
  out.x0 = clamp01(win.x + s.x0 * win.w);
  out.y0 = clamp01(win.y + s.y0 * win.h);
  out.x1 = clamp01(win.x + s.x1 * win.w);
  out.y1 = clamp01(win.y + s.y1 * win.h);
  out.x2 = clamp01(win.x + s.x2 * win.w);
  out.y2 = clamp01(win.y + s.y2 * win.h);
  out.w0 = clamp01(s.w0 * scale);
  out.w2 = clamp01(s.w2 * scale);
  out.z0 = clamp01(s.z0);
  out.z2 = clamp01(s.z2);
  out.r = clamp01(s.r);
  out.g = clamp01(s.g);
  out.b = clamp01(s.b);
  return out;
}

Stroke param_unadjust(const Stroke& s, const Window& win) {
  if (!(win.w > 0.0 && win.h > 0.0)) {
    throw Error(ErrorCode::kDegenerateWindow, "window has no extent");
  }
  const double scale = 0.5 * (win.w + win.h);
  Stroke out = s;
  out.x0 = (s.x0 - win.x) / win.w;
  out.y0 = (s.y0 - win.y) / win.h;
  out.x1 = (s.x1 - win.x) / win.w;
  out.y1 = (s.y1 - win.y) / win.h;
  out.x2 = (s.x2 - win.x) / win.w;
  out.y2 = (s.y2 - win.y) / win.h;
  out.w0 = s.w0 / scale;
  out.w2 = s.w2 / scale;
  return out;
}

}  // namespace stroke_painter
