#include "stroke_painter/layering.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>

#include "stroke_painter/error.hpp"
#include "stroke_painter/renderer.hpp"

namespace stroke_painter {

namespace {

constexpr double kFlatRange = 1e-9;
constexpr int kSaliencyWorkingSide = 64;
constexpr double kSaliencySigma = 2.0;
constexpr int kSpectrumBoxRadius = 2;
// Floor on the magnitude spectrum, relative to its mean, so exact zeros do not dominate the
// local log-amplitude average.
constexpr double kSpectrumFloor = 0.1;

// FFTW planning is not thread-safe.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

void check_same(const Canvas& a, const Canvas& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kDimensionMismatch, "images differ in size");
}

void check_same(const Canvas& a, const Plane& m) {
  if (!a.same_shape(m)) throw Error(ErrorCode::kDimensionMismatch, "mask differs in size");
}

bool normalize_in_place(Plane& p) {
  const auto v = p.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo;
  const double range = *hi - *lo;
  if (!(range >= kFlatRange)) {
    std::fill(v.begin(), v.end(), 0.0);
    return false;
  }
  for (double& x : v) x = std::clamp((x - min) / range, 0.0, 1.0);
  return true;
}

// Box mean with periodic borders, matching the spectrum's wrap-around.
Plane box_mean(const Plane& p, int radius) {
  const int h = p.height();
  const int w = p.width();
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          acc += p(((y + dy) % h + h) % h, ((x + dx) % w + w) % w);
        }
      }
      out(y, x) = acc / ((2 * radius + 1) * (2 * radius + 1));
    }
  }
  return out;
}

Plane spectral_residual(const Plane& gray) {
  const int h = gray.height();
  const int w = gray.width();
  const std::size_t n = gray.size();
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  fftw_plan forward;
  fftw_plan inverse;
  {
    std::lock_guard lock(fftw_mutex());
    forward = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_2d(h, w, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = gray.values()[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(forward);

  Plane log_amp(h, w);
  std::vector<double> phase(n);
  double mean_amp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> z(buf[i][0], buf[i][1]);
    log_amp.values()[i] = std::abs(z);
    mean_amp += log_amp.values()[i];
    phase[i] = std::arg(z);
  }
  const double floor = kSpectrumFloor * mean_amp / static_cast<double>(n) + 1e-300;
  for (double& v : log_amp.values()) v = std::log(v + floor);
  const Plane smooth = box_mean(log_amp, kSpectrumBoxRadius);
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> z =
        std::polar(std::exp(log_amp.values()[i] - smooth.values()[i]), phase[i]);
    buf[i][0] = z.real();
    buf[i][1] = z.imag();
  }
  fftw_execute(inverse);

  Plane out(h, w);
  for (std::size_t i = 0; i < n; ++i) {
    out.values()[i] = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
  }
  {
    std::lock_guard lock(fftw_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
  fftw_free(buf);
  return out;
}

struct RankedBox {
  std::size_t index;
  double saliency;
  double area;
};

}  // namespace

LayeredMask layered_mask(const SaliencyMap& saliency, int layer, int num_layers) {
  if (num_layers != 2) {
    throw Error(ErrorCode::kInvalidArgument, "the two-layer mask needs num_layers == 2");
  }
  if (layer < 0 || layer > 1) throw Error(ErrorCode::kLayerOutOfRange, "layer must be 0 or 1");
  LayeredMask m{saliency, layer};
  for (double& v : m.values.values()) v = std::clamp(1.0 - v * (1.0 - layer), 0.0, 1.0);
  return m;
}

LayeredMask layered_mask_ranked(const RankedSaliency& ranked, int layer, int num_layers) {
  if (num_layers < 1 || ranked.maps.size() != static_cast<std::size_t>(num_layers)) {
    throw Error(ErrorCode::kLengthMismatch, "need exactly num_layers ranked maps");
  }
  if (layer < 0 || layer >= num_layers) throw Error(ErrorCode::kLayerOutOfRange, "layer out of range");
  const Plane& first = ranked.maps.front();
  for (const auto& m : ranked.maps) {
    if (!m.same_shape(first)) throw Error(ErrorCode::kDimensionMismatch, "ranked maps differ in size");
  }
  Plane excluded(first.height(), first.width(), 0.0);
  for (int k = 0; k < num_layers - layer; ++k) {
    const auto src = ranked.maps[k].values();
    auto dst = excluded.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
  }
  for (double& v : excluded.values()) v = std::clamp(1.0 - v, 0.0, 1.0);
  return {std::move(excluded), layer};
}

double masked_distance(const Canvas& image, const Canvas& canvas, const Plane& mask) {
  check_same(image, canvas);
  check_same(image, mask);
  if (image.pixel_count() == 0) return 0.0;
  double acc = 0.0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double m = mask(y, x);
      for (int c = 0; c < 3; ++c) {
        const double d = (image.at(y, x, c) - canvas.at(y, x, c)) * m;
        acc += d * d;
      }
    }
  }
  return acc / (3.0 * static_cast<double>(image.pixel_count()));
}

double layer_reward(const Canvas& image, const Canvas& canvas_before, const Canvas& canvas_after,
                    const Plane& mask, const MaskedDistance& distance) {
  check_same(image, canvas_before);
  check_same(image, canvas_after);
  check_same(image, mask);
  return distance(image, canvas_before, mask) - distance(image, canvas_after, mask);
}

SaliencyMap heuristic_saliency(const Canvas& image) {
  const int h = image.height();
  const int w = image.width();
  if (h < 1 || w < 1) throw Error(ErrorCode::kInvalidArgument, "empty image");

  Plane gray(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      gray(y, x) = 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2);
    }
  }
  const auto gv = gray.values();
  const auto [lo, hi] = std::minmax_element(gv.begin(), gv.end());
  if (*hi - *lo < kFlatRange) return Plane(h, w, 0.0);

  const double scale = static_cast<double>(kSaliencyWorkingSide) / std::max(h, w);
  const int wh = std::max(1, static_cast<int>(std::lround(h * scale)));
  const int ww = std::max(1, static_cast<int>(std::lround(w * scale)));
  Plane response = gaussian_blur(spectral_residual(resample(gray, wh, ww)), kSaliencySigma);
  if (!normalize_in_place(response)) return Plane(h, w, 0.0);
  Plane out = resample(response, h, w);
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double mean_saliency(const SaliencyMap& saliency, const Window& box) {
  const PixelRect r = window_pixels(box, saliency.height(), saliency.width());
  if (r.empty()) return 0.0;
  double acc = 0.0;
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) acc += saliency(y, x);
  }
  return acc / static_cast<double>(r.area());
}

std::optional<Window> saliency_box(const SaliencyMap& saliency, double threshold) {
  int x0 = saliency.width(), y0 = saliency.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < saliency.height(); ++y) {
    for (int x = 0; x < saliency.width(); ++x) {
      if (saliency(y, x) > threshold) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return std::nullopt;
  const double w = saliency.width();
  const double h = saliency.height();
  return Window{x0 / w, y0 / h, (x1 + 1 - x0) / w, (y1 + 1 - y0) / h};
}

Plane binarize(const Plane& values, double threshold) {
  Plane out = values;
  for (double& v : out.values()) v = v > threshold ? 1.0 : 0.0;
  return out;
}

std::vector<std::size_t> rank_boxes(const SaliencyMap& saliency, std::span<const Window> boxes) {
  std::vector<RankedBox> ranked;
  ranked.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    ranked.push_back({i, mean_saliency(saliency, boxes[i]), boxes[i].area()});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedBox& a, const RankedBox& b) {
    if (a.saliency != b.saliency) return a.saliency > b.saliency;
    if (a.area != b.area) return a.area > b.area;
    return a.index < b.index;
  });
  std::vector<std::size_t> order;
  order.reserve(ranked.size());
  for (const auto& r : ranked) order.push_back(r.index);
  return order;
}

namespace {

// Foreground group (1-based, 1 = most salient) of each ranked object.
std::vector<int> object_groups(std::size_t count, int num_layers) {
  std::vector<int> groups(count);
  const int n_groups = num_layers - 1;
  for (std::size_t j = 0; j < count; ++j) {
    groups[j] = 1 + static_cast<int>(j * n_groups / count);
  }
  return groups;
}

}  // namespace

RankedSaliency build_ranked_saliency(const SaliencyMap& saliency, std::span<const Window> boxes,
                                     int num_layers, double threshold) {
  if (num_layers < 1) throw Error(ErrorCode::kInvalidArgument, "num_layers must be at least 1");
  const int h = saliency.height();
  const int w = saliency.width();
  RankedSaliency out;
  out.maps.assign(num_layers, Plane(h, w, 0.0));
  if (num_layers == 1) return out;

  const auto order = rank_boxes(saliency, boxes);
  const auto groups = object_groups(order.size(), num_layers);
  std::vector<PixelRect> rects;
  rects.reserve(order.size());
  for (std::size_t idx : order) rects.push_back(window_pixels(boxes[idx], h, w));

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!(saliency(y, x) > threshold)) continue;
      int group = num_layers - 1;
      for (std::size_t j = 0; j < rects.size(); ++j) {
        const PixelRect& r = rects[j];
        if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) {
          group = groups[j];
          break;
        }
      }
      // S[k] holds group L - k + 1, so group g lands in maps[num_layers - g].
      out.maps[num_layers - group](y, x) = 1.0;
    }
  }
  return out;
}

std::vector<std::size_t> objects_for_layer(const SaliencyMap& saliency,
                                           std::span<const Window> boxes, int layer,
                                           int num_layers) {
  if (layer < 0 || layer >= num_layers) throw Error(ErrorCode::kLayerOutOfRange, "layer out of range");
  if (layer == 0 || boxes.empty()) return {};
  const auto order = rank_boxes(saliency, boxes);
  const auto groups = object_groups(order.size(), num_layers);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < order.size(); ++j) {
    if (groups[j] == layer) out.push_back(order[j]);
  }
  return out;
}

}  // namespace stroke_painter
