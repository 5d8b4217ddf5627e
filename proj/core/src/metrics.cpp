#include "stroke_painter/metrics.hpp"

#include <cmath>

#include "stroke_painter/error.hpp"

namespace stroke_painter {

double l_pixel(const Canvas& image, const Canvas& canvas) {
  if (!image.same_shape(canvas)) throw Error(ErrorCode::kDimensionMismatch, "images differ in size");
  const auto a = image.values();
  const auto b = canvas.values();
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

double l_multiscale(const Canvas& image, const Canvas& canvas, int levels) {
  if (!image.same_shape(canvas)) throw Error(ErrorCode::kDimensionMismatch, "images differ in size");
  if (levels < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one pyramid level");
  Canvas a = image;
  Canvas b = canvas;
  double acc = 0.0;
  int used = 0;
  for (int level = 0; level < levels; ++level) {
    if (a.pixel_count() == 0) break;
    acc += l_pixel(a, b);
    ++used;
    if (a.height() < 2 || a.width() < 2) break;
    a = box_downsample(a);
    b = box_downsample(b);
  }
  return used ? acc / used : 0.0;
}

double r_spatial(const Window& prev, const Window& next) {
  const double dx = next.x - prev.x;
  const double dy = next.y - prev.y;
  const double dw = next.w - prev.w;
  const double dh = next.h - prev.h;
  return -std::sqrt(dx * dx + dy * dy + dw * dw + dh * dh);
}

double r_color(const Stroke& prev, const Stroke& next) {
  const double dr = next.r - prev.r;
  const double dg = next.g - prev.g;
  const double db = next.b - prev.b;
  return -std::sqrt(dr * dr + dg * dg + db * db);
}

SequenceReport report(const StrokeSequence& sequence, const Canvas& target, const Canvas& init,
                      int num_layers, const RasterOptions& options) {
  if (!target.same_shape(init)) throw Error(ErrorCode::kDimensionMismatch, "target and init differ in size");
  const RenderResult rendered = render_sequence(sequence, init, num_layers, options);

  SequenceReport r;
  r.l_pixel = l_pixel(target, rendered.canvas);
  r.l_ms = l_multiscale(target, rendered.canvas);
  r.stroke_count_total = sequence.size();
  r.stroke_count_active = sequence.active_count();
  const SequenceEntry* prev = nullptr;
  for (const auto& e : sequence.entries) {
    if (!e.active()) continue;
    if (prev) {
      r.spatial_penalty_sum += r_spatial(prev->window, e.window);
      r.color_penalty_sum += r_color(prev->stroke, e.stroke);
    }
    prev = &e;
  }
  for (const auto& layer : rendered.layers) r.layer_l2.push_back(l_pixel(target, layer));
  return r;
}

}  // namespace stroke_painter
