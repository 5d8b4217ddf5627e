#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace stroke_painter {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  bool operator==(const Rgb&) const = default;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return std::max(0, x1 - x0); }
  int height() const { return std::max(0, y1 - y0); }
  bool empty() const { return width() == 0 || height() == 0; }
  std::size_t area() const { return static_cast<std::size_t>(width()) * height(); }

  PixelRect intersect(const PixelRect& o) const {
    return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  }

  bool operator==(const PixelRect&) const = default;
};

/// Single-channel H x W image of doubles, row-major.
class Plane {
 public:
  Plane() = default;
  Plane(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  PixelRect bounds() const { return {0, 0, width_, height_}; }

  double& operator()(int y, int x) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double operator()(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Plane& o) const { return height_ == o.height_ && width_ == o.width_; }
  bool operator==(const Plane&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Three-channel H x W image, interleaved RGB, row-major.
class Canvas {
 public:
  static constexpr int kChannels = 3;

  Canvas() = default;
  Canvas(int height, int width, Rgb fill = {});

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  PixelRect bounds() const { return {0, 0, width_, height_}; }

  double& at(int y, int x, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  double at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  Rgb pixel(int y, int x) const { return {at(y, x, 0), at(y, x, 1), at(y, x, 2)}; }
  void set_pixel(int y, int x, Rgb v) {
    at(y, x, 0) = v.r;
    at(y, x, 1) = v.g;
    at(y, x, 2) = v.b;
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Canvas& o) const { return height_ == o.height_ && width_ == o.width_; }
  bool same_shape(const Plane& o) const { return height_ == o.height() && width_ == o.width(); }
  bool operator==(const Canvas&) const = default;

  Canvas crop(const PixelRect& rect) const;
  void paste(const Canvas& patch, int x0, int y0);

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

using AlphaMap = Plane;
/// Premultiplied: channel c holds alpha * color_c.
using ColorMap = Canvas;
using SaliencyMap = Plane;

/// Area-averaging (down) / bilinear (up) resampling.
Canvas resample(const Canvas& image, int height, int width);
Plane resample(const Plane& image, int height, int width);

/// 2x2 box downsampling (odd trailing row/column dropped).
Canvas box_downsample(const Canvas& image);
Plane box_downsample(const Plane& image);

/// Separable Gaussian blur with border renormalization, so constant input stays constant.
Plane gaussian_blur(const Plane& image, double sigma);

}  // namespace stroke_painter
