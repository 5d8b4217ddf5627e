#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "stroke_painter/error.hpp"
#include "stroke_painter/layering.hpp"

using namespace stroke_painter;
namespace t = stroke_painter::testing;

namespace {

bool all_equal(const Plane& p, double v) {
  for (double x : p.values()) {
    if (x != v) return false;
  }
  return true;
}

Plane quarter(int n, int qx, int qy) {
  Plane p(n, n);
  for (int y = qy * n / 2; y < (qy + 1) * n / 2; ++y) {
    for (int x = qx * n / 2; x < (qx + 1) * n / 2; ++x) p(y, x) = 1.0;
  }
  return p;
}

}  // namespace

TEST_CASE("layered_mask examples") {
  std::mt19937_64 rng(1);
  const Plane s = t::random_plane(rng, 9, 11);
  CHECK(all_equal(layered_mask(s, 1).values, 1.0));
  CHECK(all_equal(layered_mask(Plane(5, 5, 1.0), 0).values, 0.0));
  Plane p(2, 2, 0.0);
  p(1, 0) = 0.7;
  CHECK(layered_mask(p, 0).values(1, 0) == doctest::Approx(0.3));
  CHECK(layered_mask(p, 0).values(0, 0) == 1.0);
}

TEST_CASE("layered_mask errors") {
  const Plane s(3, 3, 0.5);
  CHECK_THROWS_AS(layered_mask(s, 2), Error);
  try {
    layered_mask(s, -1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLayerOutOfRange);
  }
}

TEST_CASE("ranked mask examples") {
  const int n = 4;
  RankedSaliency r{{quarter(n, 0, 0), quarter(n, 1, 0), quarter(n, 0, 1)}};
  const Plane m0 = layered_mask_ranked(r, 0, 3).values;
  const Plane m1 = layered_mask_ranked(r, 1, 3).values;
  const Plane m2 = layered_mask_ranked(r, 2, 3).values;
  double sum0 = 0, sum1 = 0, sum2 = 0;
  for (std::size_t i = 0; i < m0.size(); ++i) {
    sum0 += m0.values()[i];
    sum1 += m1.values()[i];
    sum2 += m2.values()[i];
  }
  CHECK(sum0 == 4.0);   // three quarters excluded
  CHECK(sum1 == 8.0);   // half the canvas masked out
  CHECK(sum2 == 12.0);  // only S[1] excluded
  CHECK(m2(0, 0) == 0.0);
  CHECK(m2(0, 3) == 1.0);
}

TEST_CASE("ranked mask errors") {
  RankedSaliency r{{Plane(3, 3), Plane(3, 3)}};
  try {
    layered_mask_ranked(r, 0, 3);
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLengthMismatch);
  }
  try {
    layered_mask_ranked(r, 2, 2);
    FAIL("expected LayerOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLayerOutOfRange);
  }
}

TEST_CASE("two-layer ranked form agrees with the direct form on binary masks") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Plane s = t::random_binary(rng, 12, 15, t::uniform(rng));
    const RankedSaliency r{{Plane(12, 15, 0.0), s}};
    for (int l = 0; l < 2; ++l) CHECK(layered_mask_ranked(r, l, 2).values == layered_mask(s, l).values);
  }
}

TEST_CASE("masks are monotone in the layer index") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Plane s = t::random_plane(rng, 8, 8);
    const Plane a = layered_mask(s, 0).values;
    const Plane b = layered_mask(s, 1).values;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b.values()[i] >= a.values()[i]);

    const int L = 4;
    RankedSaliency r;
    for (int k = 0; k < L; ++k) r.maps.push_back(t::random_binary(rng, 8, 8, 0.3));
    for (int l = 1; l < L; ++l) {
      const Plane lo = layered_mask_ranked(r, l - 1, L).values;
      const Plane hi = layered_mask_ranked(r, l, L).values;
      for (std::size_t i = 0; i < lo.size(); ++i) CHECK(hi.values()[i] >= lo.values()[i]);
    }
  }
}

TEST_CASE("masked_distance examples") {
  std::mt19937_64 rng(4);
  const Canvas a = t::random_canvas(rng, 7, 9);
  const Canvas b = t::random_canvas(rng, 7, 9);
  double mse = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    mse += (a.values()[i] - b.values()[i]) * (a.values()[i] - b.values()[i]);
  }
  mse /= a.values().size();
  CHECK(masked_distance(a, b, Plane(7, 9, 1.0)) == doctest::Approx(mse).epsilon(1e-14));
  CHECK(masked_distance(a, b, Plane(7, 9, 0.0)) == 0.0);

  Plane half(4, 4, 0.0);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 4; ++x) half(y, x) = 1.0;
  }
  CHECK(masked_distance(Canvas(4, 4, {1, 1, 1}), Canvas(4, 4), half) == 0.5);
  CHECK_THROWS_AS(masked_distance(a, Canvas(7, 8), Plane(7, 9)), Error);
}

TEST_CASE("masked_distance is symmetric and zero iff masked pixels agree") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Canvas a = t::random_canvas(rng, 6, 6);
    Canvas b = t::random_canvas(rng, 6, 6);
    const Plane m = t::random_binary(rng, 6, 6);
    CHECK(masked_distance(a, b, m) == masked_distance(b, a, m));
    for (int y = 0; y < 6; ++y) {
      for (int x = 0; x < 6; ++x) {
        if (m(y, x) > 0.0) b.set_pixel(y, x, a.pixel(y, x));
      }
    }
    CHECK(masked_distance(a, b, m) == 0.0);
  }
}

TEST_CASE("layer_reward examples and telescoping") {
  std::mt19937_64 rng(6);
  const Canvas image = t::random_canvas(rng, 8, 8);
  const Canvas blank(8, 8, {1, 1, 1});
  const Plane mask = t::random_binary(rng, 8, 8);
  CHECK(layer_reward(image, blank, blank, mask) == 0.0);
  CHECK(layer_reward(image, blank, image, mask) == doctest::Approx(masked_distance(image, blank, mask)));

  Canvas outside = blank;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      if (mask(y, x) == 0.0) outside.set_pixel(y, x, {0.1, 0.2, 0.3});
    }
  }
  CHECK(layer_reward(image, blank, outside, mask) == 0.0);

  std::vector<Canvas> steps{blank};
  for (int k = 0; k < 6; ++k) steps.push_back(t::random_canvas(rng, 8, 8));
  double sum = 0.0;
  for (std::size_t k = 1; k < steps.size(); ++k) sum += layer_reward(image, steps[k - 1], steps[k], mask);
  CHECK(sum == doctest::Approx(masked_distance(image, steps.front(), mask) -
                               masked_distance(image, steps.back(), mask)));
}

TEST_CASE("layer_reward takes a pluggable distance") {
  const Canvas image(2, 2, {1, 1, 1});
  const Canvas before(2, 2);
  const Canvas after(2, 2, {0.5, 0.5, 0.5});
  const MaskedDistance l1 = [](const Canvas& a, const Canvas& b, const Plane& m) {
    double acc = 0.0;
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        for (int c = 0; c < 3; ++c) acc += m(y, x) * std::abs(a.at(y, x, c) - b.at(y, x, c));
      }
    }
    return acc;
  };
  CHECK(layer_reward(image, before, after, Plane(2, 2, 1.0), l1) == doctest::Approx(6.0));
}

TEST_CASE("heuristic saliency on a constant image is all zeros") {
  const Plane s = heuristic_saliency(Canvas(20, 30, {0.4, 0.4, 0.4}));
  CHECK(s.height() == 20);
  CHECK(s.width() == 30);
  CHECK(all_equal(s, 0.0));
}

TEST_CASE("heuristic saliency concentrates on a bright square") {
  struct Layout {
    int n, x0, y0, side;
  };
  for (const Layout& l : {Layout{96, 54, 20, 16}, Layout{128, 30, 60, 24}, Layout{200, 60, 90, 40},
                          Layout{160, 100, 30, 20}}) {
    CAPTURE(l.n);
    Canvas img(l.n, l.n, {0.1, 0.1, 0.1});
    for (int y = l.y0; y < l.y0 + l.side; ++y) {
      for (int x = l.x0; x < l.x0 + l.side; ++x) img.set_pixel(y, x, {0.95, 0.95, 0.95});
    }
    const Plane s = heuristic_saliency(img);
    const int d = l.side / 2;
    double total = 0.0;
    double inside = 0.0;
    for (int y = 0; y < l.n; ++y) {
      for (int x = 0; x < l.n; ++x) {
        total += s(y, x);
        if (x >= l.x0 - d && x < l.x0 + l.side + d && y >= l.y0 - d && y < l.y0 + l.side + d) inside += s(y, x);
      }
    }
    CHECK(inside / total >= 0.7);
  }
}

TEST_CASE("heuristic saliency stays in [0, 1] on noise") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Plane s = heuristic_saliency(t::random_canvas(rng, 40 + trial * 7, 50));
    for (double v : s.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("mean saliency and boxes") {
  Plane s(10, 10, 0.0);
  for (int y = 2; y < 5; ++y) {
    for (int x = 6; x < 9; ++x) s(y, x) = 1.0;
  }
  const auto box = saliency_box(s);
  REQUIRE(box.has_value());
  CHECK(box->x == doctest::Approx(0.6));
  CHECK(box->y == doctest::Approx(0.2));
  CHECK(box->w == doctest::Approx(0.3));
  CHECK(box->h == doctest::Approx(0.3));
  CHECK(mean_saliency(s, *box) == doctest::Approx(1.0));
  CHECK(mean_saliency(s, Window::full()) == doctest::Approx(0.09));
  CHECK_FALSE(saliency_box(Plane(4, 4, 0.2)).has_value());
  CHECK(binarize(Plane(1, 1, 0.5))(0, 0) == 0.0);
  CHECK(binarize(Plane(1, 1, 0.51))(0, 0) == 1.0);
}

TEST_CASE("rank_boxes orders by saliency, then area, then index") {
  Plane s(20, 20, 0.0);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) s(y, x) = 0.9;
  }
  for (int y = 10; y < 20; ++y) {
    for (int x = 10; x < 20; ++x) s(y, x) = 0.4;
  }
  const std::vector<Window> boxes{{0.5, 0.5, 0.5, 0.5}, {0.0, 0.0, 0.5, 0.5}};
  CHECK(rank_boxes(s, boxes) == std::vector<std::size_t>{1, 0});

  const Plane flat(20, 20, 0.5);
  const std::vector<Window> tied{{0, 0, 0.5, 0.2}, {0, 0, 0.5, 0.4}, {0.5, 0, 0.5, 0.4}};
  CHECK(rank_boxes(flat, tied) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("ranked saliency construction") {
  Plane s(20, 20, 0.0);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) s(y, x) = 0.9;
  }
  for (int y = 12; y < 18; ++y) {
    for (int x = 12; x < 18; ++x) s(y, x) = 0.7;
  }
  const std::vector<Window> boxes{{0.6, 0.6, 0.3, 0.3}, {0.0, 0.0, 0.3, 0.3}};

  SUBCASE("two layers reduce to the binarized map") {
    const RankedSaliency r = build_ranked_saliency(s, boxes, 2);
    REQUIRE(r.maps.size() == 2);
    CHECK(all_equal(r.maps[0], 0.0));
    CHECK(r.maps[1] == binarize(s));
  }
  SUBCASE("three layers put the most salient object last") {
    const RankedSaliency r = build_ranked_saliency(s, boxes, 3);
    CHECK(all_equal(r.maps[0], 0.0));
    CHECK(r.maps[2](2, 2) == 1.0);
    CHECK(r.maps[2](14, 14) == 0.0);
    CHECK(r.maps[1](14, 14) == 1.0);
    CHECK(objects_for_layer(s, boxes, 1, 3) == std::vector<std::size_t>{1});
    CHECK(objects_for_layer(s, boxes, 2, 3) == std::vector<std::size_t>{0});
    CHECK(objects_for_layer(s, boxes, 0, 3).empty());
    // layer 1 reveals the first object only
    const Plane m1 = layered_mask_ranked(r, 1, 3).values;
    CHECK(m1(2, 2) == 1.0);
    CHECK(m1(14, 14) == 0.0);
    CHECK(all_equal(layered_mask_ranked(r, 2, 3).values, 1.0));
  }
}
