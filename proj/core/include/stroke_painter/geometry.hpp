#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace stroke_painter {

/// Quadratic Bezier brushstroke. Every field is a unit-normalized value in [0, 1]:
/// control points and half-widths are canvas fractions, z0/z2 are endpoint opacities.
struct Stroke {
  static constexpr std::size_t kParamCount = 13;

  double x0 = 0.5, y0 = 0.5;
  double x1 = 0.5, y1 = 0.5;
  double x2 = 0.5, y2 = 0.5;
  double z0 = 1.0, z2 = 1.0;
  double w0 = 0.1, w2 = 0.1;
  double r = 0.0, g = 0.0, b = 0.0;

  std::array<double, kParamCount> to_array() const;
  static Stroke from_array(std::span<const double, kParamCount> p);

  bool valid() const;
  Stroke clamped() const;

  bool operator==(const Stroke&) const = default;
};

/// Index of each field in Stroke::to_array().
enum StrokeParam : std::size_t {
  kX0, kY0, kX1, kY1, kX2, kY2, kZ0, kZ2, kW0, kW2, kR, kG, kB,
};

/// Normalized rectangle; (x, y) is the top-left corner.
struct Window {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  static constexpr Window full() { return {0.0, 0.0, 1.0, 1.0}; }

  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  double area() const { return w * h; }
  double diagonal() const;
  bool contains(const Window& inner, double tol = 1e-12) const;
  bool valid() const;

  bool operator==(const Window&) const = default;
};

struct WindowDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;
};

struct AttentionState {
  Window coarse = Window::full();
  Window local = Window::full();
  double t_norm = 0.0;
};

inline constexpr double kDefaultMinWindowSide = 0.2;
inline constexpr double kConvexTolerance = 1e-6;

/// Convex combination of candidate boxes; boxes[0] is conventionally the whole canvas.
Window object_select(std::span<const double> alphas, std::span<const Window> boxes);

/// Translate `w` into `bounds`, then shrink whatever still overflows.
Window clamp_window(Window w, const Window& bounds);

/// Express `w` in the unit frame of `frame` and back.
Window to_frame(const Window& w, const Window& frame);
Window from_frame(const Window& unit, const Window& frame);

/// Next local window. `local_prev_unit` is the previous local window expressed in the
/// previous coarse window's unit frame (see to_frame).
Window markov_update(const Window& coarse_next, const Window& local_prev_unit,
                     const WindowDelta& delta, double t_norm,
                     double w_min = kDefaultMinWindowSide,
                     double h_min = kDefaultMinWindowSide);

/// Maps a window-unit stroke into canvas space. Widths scale with avg(w, h) of the window.
Stroke param_adjust(const Stroke& stroke, const Window& window);

/// Inverse of param_adjust for non-degenerate windows (results are not clamped).
Stroke param_unadjust(const Stroke& stroke, const Window& window);

}  // namespace stroke_painter
