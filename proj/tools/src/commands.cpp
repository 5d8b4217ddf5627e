#include "stroke_painter_cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "stroke_painter/error.hpp"
#include "stroke_painter/io.hpp"
#include "stroke_painter/layering.hpp"
#include "stroke_painter/metrics.hpp"
#include "stroke_painter/planner.hpp"
#include "stroke_painter/regularizer.hpp"
#include "stroke_painter/renderer.hpp"

namespace stroke_painter::cli {

namespace fs = std::filesystem;

namespace {

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kUnreadableInput:
      return kExitUnreadable;
    case ErrorCode::kInvalidInput:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kLayerOutOfRange:
      return kExitInvalidInput;
    case ErrorCode::kNonFiniteGradient:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// Longer side becomes `size`; the aspect ratio is kept.
std::pair<int, int> render_shape(int height, int width, int size) {
  if (size < 1) throw Error(ErrorCode::kInvalidArgument, "--size must be positive");
  const double scale = static_cast<double>(size) / std::max(height, width);
  return {std::max(1, static_cast<int>(std::lround(height * scale))),
          std::max(1, static_cast<int>(std::lround(width * scale)))};
}

Plane load_saliency(const fs::path& path, int height, int width) {
  const Plane mask = load_mask(path);
  const double want = static_cast<double>(width) / height;
  const double got = static_cast<double>(mask.width()) / mask.height();
  if (std::abs(got - want) > 0.02 * want) {
    throw Error(ErrorCode::kInvalidInput, "mask aspect ratio differs from the target");
  }
  if (mask.height() == height && mask.width() == width) return mask;
  Plane out = resample(mask, height, width);
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

void ensure_parent(const fs::path& out) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
}

Canvas init_canvas(const StrokeFileHeader& h) { return blank_canvas(h.height, h.width, h.background); }

std::string frame_name(const fs::path& out, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04zu", index);
  return (out.parent_path() / (out.stem().string() + buf + ".png")).string();
}

}  // namespace

std::string config_text(const PaintOptions& o) {
  std::ostringstream s;
  s << "layers=" << o.layers << '\n'
    << "strokes=" << o.strokes << '\n'
    << "strokes_per_window=" << o.strokes_per_window << '\n'
    << "gamma=" << o.gamma << '\n'
    << "reg_iters=" << o.reg_iters << '\n'
    << "strokereg=" << (o.no_strokereg ? 0 : 1) << '\n'
    << "size=" << o.size << '\n'
    << "drop_pruned=" << (o.drop_pruned ? 1 : 0) << '\n'
    << "background=" << (o.black_background ? "black" : "white") << '\n'
    << "saliency=" << (o.saliency.empty() ? "heuristic" : "file") << '\n'
    << "boxes=" << (o.boxes.empty() ? "saliency" : "file") << '\n';
  return s.str();
}

int run_paint(const PaintOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Canvas source = load_image(o.target);
    const auto [height, width] = render_shape(source.height(), source.width(), o.size);
    PaintingTask task;
    task.target = source.height() == height && source.width() == width ? source
                                                                        : resample(source, height, width);
    task.saliency.saliency = o.saliency.empty() ? heuristic_saliency(task.target)
                                                : load_saliency(o.saliency, height, width);
    if (!o.boxes.empty()) {
      for (const auto& rec : load_box_file(o.boxes)) task.saliency.boxes.push_back(rec.box);
    } else if (auto box = saliency_box(task.saliency.saliency)) {
      task.saliency.boxes.push_back(*box);
    }

    PlannerConfig& cfg = task.config;
    cfg.num_layers = o.layers;
    cfg.total_strokes = o.strokes;
    cfg.strokes_per_window = o.strokes_per_window;
    cfg.seed = o.seed;
    cfg.background = o.black_background ? Rgb{0.0, 0.0, 0.0} : Rgb{1.0, 1.0, 1.0};
    const PlanResult planned = plan(task);
    const Canvas init = blank_canvas(height, width, cfg.background);

    StrokeSequence sequence = planned.sequence;
    if (!o.no_strokereg && !sequence.empty()) {
      RegConfig rc;
      rc.gamma = o.gamma;
      rc.iterations = o.reg_iters;
      rc.seed = o.seed;
      sequence = stroke_reg(sequence, task.target, init, rc).sequence;
    }
    if (o.drop_pruned) sequence = sequence.without_pruned();

    StrokeFile file;
    file.header.width = width;
    file.header.height = height;
    file.header.layers = o.layers;
    file.header.episode_length = o.strokes;
    file.header.seed = o.seed;
    file.header.config_digest = digest(config_text(o));
    file.header.background = cfg.background;
    file.sequence = quantize(sequence);

    fs::create_directories(o.out_dir);
    save_stroke_file(o.out_dir / "strokes.txt", file);
    const RenderResult rendered = render_sequence(file.sequence, init, o.layers);
    save_png(o.out_dir / "final.png", rendered.canvas);
    for (std::size_t l = 0; l < rendered.layers.size(); ++l) {
      save_png(o.out_dir / ("layer_" + std::to_string(l) + ".png"), rendered.layers[l]);
    }
    const std::string report = format_report(stroke_painter::report(file.sequence, task.target, init, o.layers));
    {
      std::ofstream f(o.out_dir / "metrics.txt", std::ios::binary);
      f << report;
      if (!f) throw Error(ErrorCode::kUnreadableInput, "cannot write metrics.txt");
    }
    out << report;
    return static_cast<int>(kExitOk);
  });
}

int run_render(const RenderOptions& o, std::ostream& err) {
  return guarded(err, [&] {
    const StrokeFile file = load_stroke_file(o.stroke_file);
    const Canvas init = init_canvas(file.header);
    const std::size_t total = file.sequence.active_count();
    ensure_parent(o.out);
    if (o.frames > 0) {
      std::size_t index = 1;
      for (std::size_t k = o.frames; k <= total; k += o.frames) {
        save_png(frame_name(o.out, index++), render_prefix(file.sequence, init, k));
      }
    }
    const std::size_t at = o.at ? std::min(*o.at, total) : total;
    save_png(o.out, at == total ? render_sequence(file.sequence, init, file.header.layers).canvas
                                : render_prefix(file.sequence, init, at));
    return static_cast<int>(kExitOk);
  });
}

int run_background(const fs::path& stroke_file, const fs::path& out, std::ostream& err) {
  return guarded(err, [&] {
    const StrokeFile file = load_stroke_file(stroke_file);
    if (file.header.layers < 2) {
      throw Error(ErrorCode::kInvalidInput, "background export needs a file with at least two layers");
    }
    const RenderResult r = render_sequence(file.sequence, init_canvas(file.header), file.header.layers);
    ensure_parent(out);
    save_png(out, r.layers.front());
    return static_cast<int>(kExitOk);
  });
}

int run_metrics(const fs::path& stroke_file, const fs::path& target, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const StrokeFile file = load_stroke_file(stroke_file);
    Canvas image = load_image(target);
    if (image.height() != file.header.height || image.width() != file.header.width) {
      image = resample(image, file.header.height, file.header.width);
    }
    out << format_report(report(file.sequence, image, init_canvas(file.header), file.header.layers));
    return static_cast<int>(kExitOk);
  });
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stroke-based painting: plan, regularize and replay brushstroke sequences"};
  app.name(args.empty() ? "stroke_painter" : args.front());
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option defaults (flags win)");

  PaintOptions paint;
  auto* p = app.add_subcommand("paint", "Paint a target image and write strokes, canvases and metrics");
  p->add_option("target", paint.target, "Target image (PNG or PPM)")->required();
  p->add_option("--out", paint.out_dir, "Output directory")->capture_default_str();
  p->add_option("--saliency", paint.saliency, "Single-channel saliency mask");
  p->add_option("--boxes", paint.boxes, "Box file: label x y w h confidence per line");
  p->add_option("--layers", paint.layers, "Layer count L")->capture_default_str()->check(CLI::PositiveNumber);
  p->add_option("--strokes", paint.strokes, "Stroke budget T")->capture_default_str()->check(CLI::PositiveNumber);
  p->add_option("--strokes-per-window", paint.strokes_per_window, "Strokes per local window K")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  p->add_option("--gamma", paint.gamma, "Stroke-count weight; negative calibrates per image")
      ->capture_default_str();
  p->add_option("--reg-iters", paint.reg_iters, "Regularizer iterations")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  p->add_flag("--no-strokereg", paint.no_strokereg, "Skip stroke regularization");
  p->add_option("--seed", paint.seed, "Random seed")->capture_default_str();
  p->add_option("--size", paint.size, "Render resolution (longer side)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  p->add_flag("--drop-pruned", paint.drop_pruned, "Omit pruned strokes from the stroke file");
  p->add_flag("--black", paint.black_background, "Start from a black canvas instead of white");

  RenderOptions render;
  auto* r = app.add_subcommand("render", "Replay a stroke file");
  r->add_option("strokes", render.stroke_file, "Stroke file")->required();
  r->add_option("--out", render.out, "Output PNG")->capture_default_str();
  r->add_option("--at", render.at, "Render after this many active strokes");
  r->add_option("--frames", render.frames, "Also write a frame every N active strokes");

  fs::path bg_file, bg_out = "background.png";
  auto* b = app.add_subcommand("background", "Export the layer-0 (background) canvas");
  b->add_option("strokes", bg_file, "Stroke file")->required();
  b->add_option("--out", bg_out, "Output PNG")->capture_default_str();

  fs::path m_file, m_target;
  auto* m = app.add_subcommand("metrics", "Print the sequence report as key=value lines");
  m->add_option("strokes", m_file, "Stroke file")->required();
  m->add_option("target", m_target, "Target image")->required();

  std::vector<std::string> rest(args.rbegin(), args.rend());
  if (!rest.empty()) rest.pop_back();
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  if (p->parsed()) return run_paint(paint, out, err);
  if (r->parsed()) return run_render(render, err);
  if (b->parsed()) return run_background(bg_file, bg_out, err);
  return run_metrics(m_file, m_target, out, err);
}

}  // namespace stroke_painter::cli
