#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "stroke_painter/layering.hpp"
#include "stroke_painter/planner.hpp"
#include "stroke_painter/regularizer.hpp"
#include "stroke_painter/renderer.hpp"

using namespace stroke_painter;

namespace {

double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Stroke random_stroke(std::mt19937_64& rng, double max_width) {
  Stroke s;
  s.x0 = uniform(rng), s.y0 = uniform(rng);
  s.x1 = uniform(rng), s.y1 = uniform(rng);
  s.x2 = uniform(rng), s.y2 = uniform(rng);
  s.w0 = uniform(rng, 0.0, max_width), s.w2 = uniform(rng, 0.0, max_width);
  s.z0 = uniform(rng, 0.3, 1.0), s.z2 = uniform(rng, 0.3, 1.0);
  s.r = uniform(rng), s.g = uniform(rng), s.b = uniform(rng);
  return s;
}

Canvas textured(int n) {
  Canvas c(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = static_cast<double>(x) / n, v = static_cast<double>(y) / n;
      c.set_pixel(y, x, {0.5 + 0.4 * std::sin(9.0 * u), 0.3 + 0.3 * v, 0.5 + 0.4 * std::cos(7.0 * u * v)});
    }
  }
  return c;
}

StrokeSequence random_sequence(int count, double max_width) {
  std::mt19937_64 rng(3);
  StrokeSequence seq;
  for (int i = 0; i < count; ++i) seq.entries.push_back({0, i, random_stroke(rng, max_width), 1.0, Window::full()});
  return seq;
}

}  // namespace

static void BM_Rasterize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::vector<Stroke> strokes;
  for (int i = 0; i < 64; ++i) strokes.push_back(random_stroke(rng, 0.1));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(strokes[i++ % strokes.size()], n, n));
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_RasterizeWithGrad(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  const Stroke s = random_stroke(rng, 0.1);
  const Plane ga(n, n, 0.1);
  const Canvas gc(n, n, {0.05, -0.02, 0.01});
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_with_grad(s, ga, gc));
}
BENCHMARK(BM_RasterizeWithGrad)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_RenderSequence(benchmark::State& state) {
  const StrokeSequence seq = random_sequence(static_cast<int>(state.range(0)), 0.08);
  const Canvas init(256, 256, {1, 1, 1});
  for (auto _ : state) benchmark::DoNotOptimize(render_sequence(seq, init));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RenderSequence)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_GatedL2Gradient(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  const StrokeSequence seq = random_sequence(count, 0.08);
  std::vector<Stroke> strokes;
  for (const auto& e : seq.entries) strokes.push_back(e.stroke);
  const std::vector<double> gates(count, 1.0);
  const Canvas init(256, 256, {1, 1, 1});
  const Canvas target = textured(256);
  const PixelRect all{0, 0, 256, 256};
  for (auto _ : state) benchmark::DoNotOptimize(gated_l2_gradient(strokes, gates, init, target, nullptr, all));
}
BENCHMARK(BM_GatedL2Gradient)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_HeuristicSaliency(benchmark::State& state) {
  const Canvas image = textured(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(heuristic_saliency(image));
}
BENCHMARK(BM_HeuristicSaliency)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_OptimizeWindow(benchmark::State& state) {
  const int n = 256;
  const Canvas target = textured(n);
  const Canvas canvas(n, n, {1, 1, 1});
  const Plane mask(n, n, 1.0);
  const Window window{0.3, 0.3, 0.25, 0.25};
  for (auto _ : state) {
    std::mt19937_64 rng(4);
    benchmark::DoNotOptimize(optimize_window_strokes(canvas, target, mask, window, 4, DescentConfig{}, rng));
  }
}
BENCHMARK(BM_OptimizeWindow)->Unit(benchmark::kMillisecond);

static void BM_StrokeRegIteration(benchmark::State& state) {
  const StrokeSequence seq = random_sequence(100, 0.08);
  const Canvas init(128, 128, {1, 1, 1});
  const Canvas target = textured(128);
  RegConfig config;
  config.gamma = 1e-4;
  config.iterations = 5;
  for (auto _ : state) benchmark::DoNotOptimize(stroke_reg(seq, target, init, config));
}
BENCHMARK(BM_StrokeRegIteration)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
