#include "stroke_painter/image.hpp"

#include <cmath>

#include "stroke_painter/error.hpp"

namespace stroke_painter {

namespace {

void check_size(int height, int width) {
  if (height < 0 || width < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative image size");
  }
}

// Weights of source cells [s0, s1) overlapping destination cell [d0, d1) in source units.
struct Span1D {
  int first = 0;
  std::vector<double> weights;
};

std::vector<Span1D> area_weights(int src, int dst) {
  std::vector<Span1D> out(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int d = 0; d < dst; ++d) {
    const double lo = d * scale;
    const double hi = (d + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
    out[d].first = first;
    double total = 0.0;
    for (int s = first; s <= last; ++s) {
      const double w = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      out[d].weights.push_back(std::max(0.0, w));
      total += std::max(0.0, w);
    }
    for (double& w : out[d].weights) w /= total;
  }
  return out;
}

// Bilinear taps with pixel-center alignment.
std::vector<Span1D> linear_weights(int src, int dst) {
  std::vector<Span1D> out(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int d = 0; d < dst; ++d) {
    double pos = (d + 0.5) * scale - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const int i0 = std::min(static_cast<int>(std::floor(pos)), src - 1);
    const int i1 = std::min(i0 + 1, src - 1);
    const double f = pos - i0;
    out[d].first = i0;
    if (i1 == i0) {
      out[d].weights = {1.0};
    } else {
      out[d].weights = {1.0 - f, f};
    }
  }
  return out;
}

std::vector<Span1D> resample_weights(int src, int dst) {
  return dst <= src ? area_weights(src, dst) : linear_weights(src, dst);
}

template <typename Get, typename Set>
void separable_resample(int src_h, int src_w, int dst_h, int dst_w, int channels, Get get,
                        Set set) {
  const auto wx = resample_weights(src_w, dst_w);
  const auto wy = resample_weights(src_h, dst_h);
  std::vector<double> rows(static_cast<std::size_t>(src_h) * dst_w * channels, 0.0);
  for (int y = 0; y < src_h; ++y) {
    for (int x = 0; x < dst_w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < wx[x].weights.size(); ++k) {
          acc += wx[x].weights[k] * get(y, wx[x].first + static_cast<int>(k), c);
        }
        rows[(static_cast<std::size_t>(y) * dst_w + x) * channels + c] = acc;
      }
    }
  }
  for (int y = 0; y < dst_h; ++y) {
    for (int x = 0; x < dst_w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < wy[y].weights.size(); ++k) {
          const int sy = wy[y].first + static_cast<int>(k);
          acc += wy[y].weights[k] * rows[(static_cast<std::size_t>(sy) * dst_w + x) * channels + c];
        }
        set(y, x, c, std::clamp(acc, 0.0, 1.0));
      }
    }
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
  }
  return k;
}

}  // namespace

Plane::Plane(int height, int width, double fill) : height_(height), width_(width) {
  check_size(height, width);
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

Canvas::Canvas(int height, int width, Rgb fill) : height_(height), width_(width) {
  check_size(height, width);
  data_.resize(static_cast<std::size_t>(height) * width * kChannels);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    data_[i * 3 + 0] = fill.r;
    data_[i * 3 + 1] = fill.g;
    data_[i * 3 + 2] = fill.b;
  }
}

Canvas Canvas::crop(const PixelRect& rect) const {
  const PixelRect r = rect.intersect(bounds());
  Canvas out(r.height(), r.width());
  for (int y = r.y0; y < r.y1; ++y) {
    const double* src = &data_[(static_cast<std::size_t>(y) * width_ + r.x0) * kChannels];
    std::copy(src, src + static_cast<std::size_t>(r.width()) * kChannels,
              &out.data_[static_cast<std::size_t>(y - r.y0) * r.width() * kChannels]);
  }
  return out;
}

void Canvas::paste(const Canvas& patch, int x0, int y0) {
  for (int y = 0; y < patch.height(); ++y) {
    const int ty = y + y0;
    if (ty < 0 || ty >= height_) continue;
    for (int x = 0; x < patch.width(); ++x) {
      const int tx = x + x0;
      if (tx < 0 || tx >= width_) continue;
      for (int c = 0; c < kChannels; ++c) at(ty, tx, c) = patch.at(y, x, c);
    }
  }
}

Canvas resample(const Canvas& image, int height, int width) {
  if (height < 1 || width < 1) throw Error(ErrorCode::kInvalidArgument, "resample to empty size");
  if (image.height() == height && image.width() == width) return image;
  Canvas out(height, width);
  separable_resample(
      image.height(), image.width(), height, width, 3,
      [&](int y, int x, int c) { return image.at(y, x, c); },
      [&](int y, int x, int c, double v) { out.at(y, x, c) = v; });
  return out;
}

Plane resample(const Plane& image, int height, int width) {
  if (height < 1 || width < 1) throw Error(ErrorCode::kInvalidArgument, "resample to empty size");
  if (image.height() == height && image.width() == width) return image;
  Plane out(height, width);
  separable_resample(
      image.height(), image.width(), height, width, 1,
      [&](int y, int x, int) { return image(y, x); },
      [&](int y, int x, int, double v) { out(y, x) = v; });
  return out;
}

Canvas box_downsample(const Canvas& image) {
  Canvas out(image.height() / 2, image.width() / 2);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = 0.25 * (image.at(2 * y, 2 * x, c) + image.at(2 * y, 2 * x + 1, c) +
                                  image.at(2 * y + 1, 2 * x, c) + image.at(2 * y + 1, 2 * x + 1, c));
      }
    }
  }
  return out;
}

Plane box_downsample(const Plane& image) {
  Plane out(image.height() / 2, image.width() / 2);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      out(y, x) = 0.25 * (image(2 * y, 2 * x) + image(2 * y, 2 * x + 1) + image(2 * y + 1, 2 * x) +
                          image(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

Plane gaussian_blur(const Plane& image, double sigma) {
  if (sigma <= 0.0 || image.size() == 0) return image;
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int h = image.height();
  const int w = image.width();
  Plane tmp(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      double norm = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sx = x + k;
        if (sx < 0 || sx >= w) continue;
        acc += kernel[k + radius] * image(y, sx);
        norm += kernel[k + radius];
      }
      tmp(y, x) = acc / norm;
    }
  }
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      double norm = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sy = y + k;
        if (sy < 0 || sy >= h) continue;
        acc += kernel[k + radius] * tmp(sy, x);
        norm += kernel[k + radius];
      }
      out(y, x) = acc / norm;
    }
  }
  return out;
}

}  // namespace stroke_painter
