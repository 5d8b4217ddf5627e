#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stroke_painter::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitUnreadable = 2,
  kExitInvalidInput = 3,
  kExitNumerical = 4,
};

struct PaintOptions {
  std::filesystem::path target;
  std::filesystem::path saliency;
  std::filesystem::path boxes;
  std::filesystem::path out_dir = ".";
  int layers = 2;
  int strokes = 300;
  int strokes_per_window = 4;
  double gamma = -1.0;
  int reg_iters = 300;
  bool no_strokereg = false;
  std::uint64_t seed = 0;
  int size = 256;
  bool drop_pruned = false;
  bool black_background = false;
};

struct RenderOptions {
  std::filesystem::path stroke_file;
  std::filesystem::path out = "render.png";
  std::optional<std::size_t> at;
  std::size_t frames = 0;
};

/// Canonical text of every setting that shapes a paint run; its digest goes in the header.
std::string config_text(const PaintOptions& options);

int run_paint(const PaintOptions& options, std::ostream& out, std::ostream& err);
int run_render(const RenderOptions& options, std::ostream& err);
int run_background(const std::filesystem::path& stroke_file, const std::filesystem::path& out,
                   std::ostream& err);
int run_metrics(const std::filesystem::path& stroke_file, const std::filesystem::path& target,
                std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a command.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stroke_painter::cli
