#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stroke_painter/geometry.hpp"
#include "stroke_painter/image.hpp"
#include "stroke_painter/metrics.hpp"
#include "stroke_painter/sequence.hpp"

namespace stroke_painter {

inline constexpr int kStrokeFileVersion = 1;

struct StrokeFileHeader {
  int version = kStrokeFileVersion;
  /// Reference render resolution.
  int width = 256;
  int height = 256;
  int layers = 1;
  int episode_length = 0;
  std::uint64_t seed = 0;
  std::string config_digest = "0000000000000000";
  Rgb background{1.0, 1.0, 1.0};

  bool operator==(const StrokeFileHeader&) const = default;
};

struct StrokeFile {
  StrokeFileHeader header;
  StrokeSequence sequence;

  bool operator==(const StrokeFile&) const = default;
};

/// Text format, one record per line:
///   layer timestep x0 y0 x1 y1 x2 y2 z0 z2 w0 w2 r g b beta wx wy ww wh
/// Reals are written with 9 significant digits.
std::string write_stroke_file(const StrokeFile& file);
StrokeFile parse_stroke_file(std::string_view text);
void save_stroke_file(const std::filesystem::path& path, const StrokeFile& file);
StrokeFile load_stroke_file(const std::filesystem::path& path);

/// Rounds every real in the sequence to what the text format stores.
StrokeSequence quantize(const StrokeSequence& sequence);

struct BoxRecord {
  std::string label;
  Window box;
  double confidence = 1.0;

  bool operator==(const BoxRecord&) const = default;
};

/// "label x y w h confidence" per line; '#' starts a comment.
std::vector<BoxRecord> parse_box_file(std::string_view text);
std::string write_box_file(const std::vector<BoxRecord>& boxes);
std::vector<BoxRecord> load_box_file(const std::filesystem::path& path);

/// PNG (any 8-bit color type) or binary PPM/PGM. Gray inputs are replicated to RGB.
Canvas load_image(const std::filesystem::path& path);
/// Single-channel 8-bit image mapped to [0, 1]. Throws kInvalidInput for color images.
Plane load_mask(const std::filesystem::path& path);
/// 8-bit RGB PNG.
void save_png(const std::filesystem::path& path, const Canvas& canvas);
void save_png(const std::filesystem::path& path, const Plane& plane);

/// Fixed key order: l_pixel, l_ms, stroke_count_total, stroke_count_active,
/// spatial_penalty_sum, color_penalty_sum, layer_l2 (comma separated).
std::string format_report(const SequenceReport& report);
std::vector<std::string> report_keys();

/// FNV-1a 64 of the text, as 16 hex digits.
std::string digest(std::string_view text);

}  // namespace stroke_painter
