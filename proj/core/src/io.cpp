#include "stroke_painter/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stroke_painter/error.hpp"

namespace stroke_painter {

namespace {

constexpr std::string_view kMagic = "stroke_painter_strokes";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

[[noreturn]] void malformed(const std::string& what, std::size_t line) {
  throw Error(ErrorCode::kInvalidInput, "line " + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v)) {
    malformed("bad number '" + tok + "'", line);
  }
  return v;
}

long long parse_int(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size()) malformed("bad integer '" + tok + "'", line);
  return v;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kUnreadableInput, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kUnreadableInput, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kUnreadableInput, "write failed for " + path.string());
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;
};

bool is_png(const std::string& data) {
  return data.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(data.data()), 0, 8) == 0;
}

Raster read_png(const std::string& data, bool gray) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, data.data(), data.size())) {
    throw Error(ErrorCode::kUnreadableInput, std::string("bad PNG: ") + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  Raster r{static_cast<int>(img.width), static_cast<int>(img.height), gray ? 1 : 3, {}};
  if (gray && color) {
    png_image_free(&img);
    throw Error(ErrorCode::kInvalidInput, "mask must be a single-channel image");
  }
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  r.bytes.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, r.bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::kUnreadableInput, std::string("bad PNG: ") + img.message);
  }
  return r;
}

// Binary P5 / P6 with maxval <= 255.
Raster read_pnm(const std::string& data) {
  std::size_t pos = 2;
  auto next_int = [&]() {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    long v = 0;
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
      v = v * 10 + (data[pos++] - '0');
      if (v > 1 << 20) break;
    }
    if (pos == start) throw Error(ErrorCode::kUnreadableInput, "bad PNM header");
    return v;
  };
  Raster r;
  r.channels = data[1] == '6' ? 3 : 1;
  r.width = static_cast<int>(next_int());
  r.height = static_cast<int>(next_int());
  const long maxval = next_int();
  if (r.width < 1 || r.height < 1 || maxval < 1 || maxval > 255) {
    throw Error(ErrorCode::kUnreadableInput, "unsupported PNM header");
  }
  ++pos;
  const std::size_t need = static_cast<std::size_t>(r.width) * r.height * r.channels;
  if (data.size() < pos + need) throw Error(ErrorCode::kUnreadableInput, "truncated PNM data");
  r.bytes.assign(data.begin() + pos, data.begin() + pos + need);
  if (maxval != 255) {
    for (auto& b : r.bytes) b = static_cast<std::uint8_t>(std::min<long>(255, b * 255 / maxval));
  }
  return r;
}

Raster read_raster(const std::filesystem::path& path, bool gray) {
  const std::string data = read_file(path);
  if (is_png(data)) return read_png(data, gray);
  if (data.size() > 2 && data[0] == 'P' && (data[1] == '5' || data[1] == '6')) {
    Raster r = read_pnm(data);
    if (gray && r.channels != 1) throw Error(ErrorCode::kInvalidInput, "mask must be a single-channel image");
    return r;
  }
  throw Error(ErrorCode::kUnreadableInput, "unrecognized image format: " + path.string());
}

void write_png(const std::filesystem::path& path, int width, int height, bool gray,
               const std::vector<std::uint8_t>& bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::kUnreadableInput, "cannot write PNG " + path.string() + ": " + img.message);
  }
}

}  // namespace

std::string write_stroke_file(const StrokeFile& file) {
  const auto& h = file.header;
  std::ostringstream out;
  out << kMagic << ' ' << h.version << '\n'
      << "width " << h.width << '\n'
      << "height " << h.height << '\n'
      << "layers " << h.layers << '\n'
      << "episode_length " << h.episode_length << '\n'
      << "seed " << h.seed << '\n'
      << "config_digest " << h.config_digest << '\n'
      << "background " << fmt(h.background.r) << ' ' << fmt(h.background.g) << ' '
      << fmt(h.background.b) << '\n'
      << "records " << file.sequence.size() << '\n';
  for (const auto& e : file.sequence.entries) {
    out << e.layer << ' ' << e.timestep;
    for (double v : e.stroke.to_array()) out << ' ' << fmt(v);
    out << ' ' << fmt(e.importance) << ' ' << fmt(e.window.x) << ' ' << fmt(e.window.y) << ' '
        << fmt(e.window.w) << ' ' << fmt(e.window.h) << '\n';
  }
  return out.str();
}

StrokeFile parse_stroke_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](std::string_view key, std::size_t count) {
    if (!std::getline(in, line)) malformed("missing '" + std::string(key) + "'", lineno + 1);
    ++lineno;
    auto t = tokens(line);
    if (t.size() != count + 1 || t[0] != key) malformed("expected '" + std::string(key) + "'", lineno);
    t.erase(t.begin());
    return t;
  };

  StrokeFile f;
  auto& h = f.header;
  h.version = static_cast<int>(parse_int(next(kMagic, 1)[0], lineno));
  if (h.version != kStrokeFileVersion) malformed("unsupported version", lineno);
  h.width = static_cast<int>(parse_int(next("width", 1)[0], lineno));
  h.height = static_cast<int>(parse_int(next("height", 1)[0], lineno));
  if (h.width < 1 || h.height < 1) malformed("resolution must be positive", lineno);
  h.layers = static_cast<int>(parse_int(next("layers", 1)[0], lineno));
  if (h.layers < 1) malformed("layer count must be positive", lineno);
  h.episode_length = static_cast<int>(parse_int(next("episode_length", 1)[0], lineno));
  {
    const auto t = next("seed", 1);
    char* end = nullptr;
    h.seed = std::strtoull(t[0].c_str(), &end, 10);
    if (end != t[0].c_str() + t[0].size() || t[0][0] == '-') malformed("bad seed", lineno);
  }
  h.config_digest = next("config_digest", 1)[0];
  {
    const auto t = next("background", 3);
    h.background = {parse_real(t[0], lineno), parse_real(t[1], lineno), parse_real(t[2], lineno)};
    if (!in_unit(h.background.r) || !in_unit(h.background.g) || !in_unit(h.background.b)) {
      malformed("background outside [0, 1]", lineno);
    }
  }
  const long long records = parse_int(next("records", 1)[0], lineno);
  if (records < 0) malformed("negative record count", lineno);

  constexpr std::size_t kFields = 2 + Stroke::kParamCount + 1 + 4;
  for (long long i = 0; i < records; ++i) {
    if (!std::getline(in, line)) malformed("missing stroke record", lineno + 1);
    ++lineno;
    const auto t = tokens(line);
    if (t.size() != kFields) malformed("expected " + std::to_string(kFields) + " fields", lineno);
    SequenceEntry e;
    e.layer = static_cast<int>(parse_int(t[0], lineno));
    e.timestep = static_cast<int>(parse_int(t[1], lineno));
    if (e.layer < 0 || e.layer >= h.layers) malformed("layer index out of range", lineno);
    std::array<double, Stroke::kParamCount> p{};
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = parse_real(t[2 + k], lineno);
      if (!in_unit(p[k])) malformed("stroke field outside [0, 1]", lineno);
    }
    e.stroke = Stroke::from_array(p);
    std::size_t k = 2 + Stroke::kParamCount;
    e.importance = parse_real(t[k++], lineno);
    if (!in_unit(e.importance)) malformed("importance outside [0, 1]", lineno);
    e.window = {parse_real(t[k], lineno), parse_real(t[k + 1], lineno), parse_real(t[k + 2], lineno),
                parse_real(t[k + 3], lineno)};
    if (!e.window.valid()) malformed("window outside the unit canvas", lineno);
    f.sequence.entries.push_back(e);
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!tokens(line).empty()) malformed("trailing content", lineno);
  }
  if (!f.sequence.is_sorted()) throw Error(ErrorCode::kInvalidInput, "records not sorted by (layer, timestep)");
  return f;
}

void save_stroke_file(const std::filesystem::path& path, const StrokeFile& file) {
  write_file(path, write_stroke_file(file));
}

StrokeFile load_stroke_file(const std::filesystem::path& path) { return parse_stroke_file(read_file(path)); }

StrokeSequence quantize(const StrokeSequence& sequence) {
  StrokeFile f;
  f.header.layers = std::max(1, sequence.layer_count());
  f.sequence = sequence;
  return parse_stroke_file(write_stroke_file(f)).sequence;
}

std::vector<BoxRecord> parse_box_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<BoxRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t.size() != 6) malformed("expected 'label x y w h confidence'", lineno);
    BoxRecord b;
    b.label = t[0];
    b.box = {parse_real(t[1], lineno), parse_real(t[2], lineno), parse_real(t[3], lineno),
             parse_real(t[4], lineno)};
    b.confidence = parse_real(t[5], lineno);
    if (!b.box.valid()) malformed("box outside the unit canvas", lineno);
    if (!in_unit(b.confidence)) malformed("confidence outside [0, 1]", lineno);
    out.push_back(std::move(b));
  }
  return out;
}

std::string write_box_file(const std::vector<BoxRecord>& boxes) {
  std::ostringstream out;
  for (const auto& b : boxes) {
    out << b.label << ' ' << fmt(b.box.x) << ' ' << fmt(b.box.y) << ' ' << fmt(b.box.w) << ' '
        << fmt(b.box.h) << ' ' << fmt(b.confidence) << '\n';
  }
  return out.str();
}

std::vector<BoxRecord> load_box_file(const std::filesystem::path& path) {
  return parse_box_file(read_file(path));
}

Canvas load_image(const std::filesystem::path& path) {
  const Raster r = read_raster(path, false);
  Canvas c(r.height, r.width);
  auto v = c.values();
  for (std::size_t p = 0; p < c.pixel_count(); ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      const std::uint8_t b = r.channels == 3 ? r.bytes[p * 3 + ch] : r.bytes[p];
      v[p * 3 + ch] = b / 255.0;
    }
  }
  return c;
}

Plane load_mask(const std::filesystem::path& path) {
  const Raster r = read_raster(path, true);
  Plane m(r.height, r.width);
  auto v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = r.bytes[i] / 255.0;
  return m;
}

void save_png(const std::filesystem::path& path, const Canvas& canvas) {
  std::vector<std::uint8_t> bytes(canvas.values().size());
  std::transform(canvas.values().begin(), canvas.values().end(), bytes.begin(), to_byte);
  write_png(path, canvas.width(), canvas.height(), false, bytes);
}

void save_png(const std::filesystem::path& path, const Plane& plane) {
  std::vector<std::uint8_t> bytes(plane.size());
  std::transform(plane.values().begin(), plane.values().end(), bytes.begin(), to_byte);
  write_png(path, plane.width(), plane.height(), true, bytes);
}

std::vector<std::string> report_keys() {
  return {"l_pixel",         "l_ms",          "stroke_count_total", "stroke_count_active",
          "spatial_penalty_sum", "color_penalty_sum", "layer_l2"};
}

std::string format_report(const SequenceReport& r) {
  std::ostringstream out;
  out << "l_pixel=" << fmt(r.l_pixel) << '\n'
      << "l_ms=" << fmt(r.l_ms) << '\n'
      << "stroke_count_total=" << r.stroke_count_total << '\n'
      << "stroke_count_active=" << r.stroke_count_active << '\n'
      << "spatial_penalty_sum=" << fmt(r.spatial_penalty_sum) << '\n'
      << "color_penalty_sum=" << fmt(r.color_penalty_sum) << '\n'
      << "layer_l2=";
  for (std::size_t i = 0; i < r.layer_l2.size(); ++i) out << (i ? "," : "") << fmt(r.layer_l2[i]);
  out << '\n';
  return out.str();
}

std::string digest(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace stroke_painter
