#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "stroke_painter/image.hpp"
#include "stroke_painter/optim.hpp"
#include "stroke_painter/parallel.hpp"

using namespace stroke_painter;
namespace t = stroke_painter::testing;

TEST_CASE("crop and paste") {
  std::mt19937_64 rng(1);
  const Canvas c = t::random_canvas(rng, 8, 9);
  const Canvas patch = c.crop({2, 3, 6, 7});
  CHECK(patch.height() == 4);
  CHECK(patch.width() == 4);
  CHECK(patch.pixel(0, 0) == c.pixel(3, 2));
  Canvas blank(8, 9);
  blank.paste(patch, 2, 3);
  CHECK(blank.pixel(6, 5) == c.pixel(6, 5));
  CHECK(blank.pixel(0, 0) == Rgb{});
}

TEST_CASE("resampling preserves constants and means") {
  const Canvas flat(10, 14, {0.2, 0.4, 0.6});
  const Canvas down = resample(flat, 5, 7);
  for (int y = 0; y < down.height(); ++y) {
    for (int x = 0; x < down.width(); ++x) {
      CHECK(down.at(y, x, 0) == doctest::Approx(0.2));
      CHECK(down.at(y, x, 1) == doctest::Approx(0.4));
    }
  }
  CHECK(resample(flat, 23, 31).pixel(22, 30).b == doctest::Approx(0.6));

  std::mt19937_64 rng(2);
  const Plane p = t::random_plane(rng, 16, 16);
  const Plane half = resample(p, 8, 8);
  double a = 0.0, b = 0.0;
  for (double v : p.values()) a += v;
  for (double v : half.values()) b += v;
  CHECK(b / 64.0 == doctest::Approx(a / 256.0));
  CHECK(resample(p, 16, 16) == p);
}

TEST_CASE("box_downsample") {
  Plane p(3, 5, 0.0);
  p(0, 0) = 1.0;
  p(1, 1) = 1.0;
  const Plane d = box_downsample(p);
  CHECK(d.height() == 1);
  CHECK(d.width() == 2);
  CHECK(d(0, 0) == 0.5);
  CHECK(d(0, 1) == 0.0);
}

TEST_CASE("gaussian_blur keeps constants and mass") {
  const Plane flat(9, 12, 0.7);
  const Plane b = gaussian_blur(flat, 2.0);
  for (double v : b.values()) CHECK(v == doctest::Approx(0.7));
  Plane spike(31, 31, 0.0);
  spike(15, 15) = 1.0;
  const Plane s = gaussian_blur(spike, 2.0);
  double mass = 0.0;
  for (double v : s.values()) mass += v;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s(15, 14) == doctest::Approx(s(14, 15)));
  CHECK(gaussian_blur(spike, 0.0) == spike);
}

TEST_CASE("Adam minimizes a quadratic") {
  std::vector<double> x{3.0, -2.0};
  Adam adam(2);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> g{2.0 * (x[0] - 1.0), 2.0 * (x[1] + 0.5)};
    adam.step(x, g, 0.01);
  }
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(x[1] == doctest::Approx(-0.5).epsilon(1e-3));
}

TEST_CASE("first Adam step moves every coordinate by the learning rate") {
  std::vector<double> x{0.0, 0.0, 0.0};
  Adam adam(3);
  adam.step(x, std::vector<double>{5.0, -0.001, 0.0}, 0.1);
  CHECK(x[0] == doctest::Approx(-0.1));
  CHECK(x[1] == doctest::Approx(0.1));
  CHECK(x[2] == 0.0);
}

TEST_CASE("gradient clipping and the cosine schedule") {
  std::vector<double> g{3.0, 4.0};
  CHECK(clip_grad_norm(g, 1.0) == 5.0);
  CHECK(g[0] == doctest::Approx(0.6));
  CHECK(g[1] == doctest::Approx(0.8));
  std::vector<double> small{0.1};
  clip_grad_norm(small, 1.0);
  CHECK(small[0] == 0.1);

  CHECK(cosine_lr(0.02, 0, 40) == 0.02);
  CHECK(cosine_lr(0.02, 20, 40) == doctest::Approx(0.01));
  CHECK(cosine_lr(0.02, 40, 40) == doctest::Approx(0.0));
  CHECK(cosine_lr(0.02, 3, 0) == 0.02);
}

TEST_CASE("parallel_for visits every index once and forwards errors") {
  ::setenv("STROKE_PAINTER_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  ::setenv("STROKE_PAINTER_THREADS", "zero", 1);
  CHECK(worker_count() >= 1);
  ::unsetenv("STROKE_PAINTER_THREADS");
}
