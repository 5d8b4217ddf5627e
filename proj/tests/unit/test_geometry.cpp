#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "stroke_painter/error.hpp"
#include "stroke_painter/geometry.hpp"

using namespace stroke_painter;
using stroke_painter::testing::random_window;
using stroke_painter::testing::uniform;

namespace {

void check_window(const Window& got, const Window& want, double eps = 1e-12) {
  CHECK(got.x == doctest::Approx(want.x).epsilon(eps));
  CHECK(got.y == doctest::Approx(want.y).epsilon(eps));
  CHECK(got.w == doctest::Approx(want.w).epsilon(eps));
  CHECK(got.h == doctest::Approx(want.h).epsilon(eps));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("object_select one-hot picks the box") {
  const std::vector<Window> boxes{Window::full(), {0.1, 0.2, 0.3, 0.4}, {0.5, 0.5, 0.2, 0.1}};
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    std::vector<double> a(boxes.size(), 0.0);
    a[i] = 1.0;
    CHECK(object_select(a, boxes) == boxes[i]);
  }
}

TEST_CASE("object_select arithmetic") {
  const std::vector<Window> three{Window::full(), {0, 0, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}};
  check_window(object_select(std::vector{0.0, 0.5, 0.5}, three), {0.25, 0.25, 0.5, 0.5});
  const std::vector<Window> two{Window::full(), {0.5, 0.5, 0.25, 0.25}};
  check_window(object_select(std::vector{0.2, 0.8}, two), {0.4, 0.4, 0.4, 0.4});
}

TEST_CASE("object_select rejects bad coefficients") {
  const std::vector<Window> two{Window::full(), {0.5, 0.5, 0.25, 0.25}};
  CHECK(code_of([&] { object_select(std::vector{0.5, 0.6}, two); }) == ErrorCode::kNonConvexCoefficients);
  CHECK(code_of([&] { object_select(std::vector{1.5, -0.5}, two); }) == ErrorCode::kNonConvexCoefficients);
  CHECK(code_of([&] { object_select(std::vector{1.0}, two); }) == ErrorCode::kLengthMismatch);
  // within tolerance is fine
  CHECK_NOTHROW(object_select(std::vector{0.5, 0.5 + 5e-7}, two));
}

TEST_CASE("object_select is permutation invariant and stays in the hull") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    std::vector<Window> boxes{Window::full()};
    for (int i = 1; i < n; ++i) boxes.push_back(random_window(rng));
    std::vector<double> a(n);
    for (double& v : a) v = uniform(rng);
    double sum = 0.0;
    for (double v : a) sum += v;
    for (double& v : a) v /= sum;

    const Window w = object_select(a, boxes);
    std::vector<std::size_t> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pa;
    std::vector<Window> pb;
    for (std::size_t i : perm) {
      pa.push_back(a[i]);
      pb.push_back(boxes[i]);
    }
    CHECK(object_select(pa, pb) == w);

    auto within = [&](auto field, double v) {
      double lo = 1e9, hi = -1e9;
      for (const auto& b : boxes) {
        lo = std::min(lo, b.*field);
        hi = std::max(hi, b.*field);
      }
      return v >= lo - 1e-12 && v <= hi + 1e-12;
    };
    CHECK(within(&Window::x, w.x));
    CHECK(within(&Window::y, w.y));
    CHECK(within(&Window::w, w.w));
    CHECK(within(&Window::h, w.h));
  }
}

TEST_CASE("markov_update examples") {
  check_window(markov_update(Window::full(), {0, 0, 1, 1}, {}, 0.0), Window::full());
  const Window end = markov_update(Window::full(), {0, 0, 1, 1}, {}, 1.0);
  CHECK(end.w == doctest::Approx(0.2));
  CHECK(end.h == doctest::Approx(0.2));

  const Window coarse{0.2, 0.3, 0.4, 0.5};
  const Window w = markov_update(coarse, {0.5, 0.0, 0.2, 0.2}, {0.1, 0.0, 0.0, 0.0}, 1.0);
  CHECK(w.x == doctest::Approx(0.44));
}

TEST_CASE("markov_update errors") {
  CHECK(code_of([] { markov_update({0.1, 0.1, 0.0, 0.5}, {}, {}, 0.5); }) == ErrorCode::kDegenerateWindow);
  CHECK(code_of([] { markov_update(Window::full(), {}, {}, 1.5); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { markov_update(Window::full(), {}, {}, 0.5, 0.0, 0.2); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("markov_update shrinks monotonically to the minimum and stays inside the coarse window") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Window coarse = random_window(rng);
    const Window prev{uniform(rng), uniform(rng), 0.2, 0.2};
    double last_w = 2.0, last_h = 2.0;
    for (int k = 0; k <= 20; ++k) {
      const double t = k / 20.0;
      const Window w = markov_update(coarse, prev, {}, t);
      CHECK(w.w <= last_w + 1e-15);
      CHECK(w.h <= last_h + 1e-15);
      CHECK(w.w >= 0.2 * coarse.w - 1e-12);
      CHECK(w.h >= 0.2 * coarse.h - 1e-12);
      CHECK(coarse.contains(w, 1e-12));
      last_w = w.w;
      last_h = w.h;
    }
    CHECK(last_w == doctest::Approx(0.2 * coarse.w));
    CHECK(last_h == doctest::Approx(0.2 * coarse.h));
  }
}

TEST_CASE("delta = 0 under a static coarse window keeps the local position") {
  const Window coarse{0.1, 0.2, 0.6, 0.5};
  const Window local{0.25, 0.3, 0.3, 0.3};
  const Window unit = to_frame(local, coarse);
  const Window next = markov_update(coarse, unit, {}, 0.7);
  CHECK(next.x == doctest::Approx(local.x));
  CHECK(next.y == doctest::Approx(local.y));
}

TEST_CASE("clamp_window never produces negative extent") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    Window w{uniform(rng, -1, 2), uniform(rng, -1, 2), uniform(rng, -0.5, 2), uniform(rng, -0.5, 2)};
    const Window c = clamp_window(w, Window::full());
    CHECK(c.w >= 0.0);
    CHECK(c.h >= 0.0);
    CHECK(Window::full().contains(c, 1e-12));
  }
}

TEST_CASE("clamp_window translates before shrinking") {
  check_window(clamp_window({0.9, 0.0, 0.3, 0.5}, Window::full()), {0.7, 0.0, 0.3, 0.5});
  check_window(clamp_window({-0.5, 0.2, 1.5, 0.5}, Window::full()), {0.0, 0.2, 1.0, 0.5});
}

TEST_CASE("frames round trip") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Window frame = random_window(rng);
    const Window w = random_window(rng);
    const Window back = from_frame(to_frame(w, frame), frame);
    check_window(back, w, 1e-9);
  }
}

TEST_CASE("param_adjust examples") {
  Stroke s;
  s.x0 = 0.3;
  s.y2 = 0.8;
  s.w0 = 0.1;
  CHECK(param_adjust(s, Window::full()) == s);

  Stroke c;
  c.x0 = 0.5;
  CHECK(param_adjust(c, {0.25, 0.25, 0.5, 0.5}).x0 == doctest::Approx(0.5));

  Stroke w;
  w.w0 = 0.1;
  CHECK(param_adjust(w, {0.1, 0.1, 0.4, 0.6}).w0 == doctest::Approx(0.05));
}

TEST_CASE("param_adjust maps the middle control point and both y coordinates") {
  Stroke s;
  s.x1 = 0.5;
  s.y1 = 0.5;
  s.y2 = 1.0;
  const Stroke a = param_adjust(s, {0.2, 0.4, 0.2, 0.4});
  CHECK(a.x1 == doctest::Approx(0.3));
  CHECK(a.y1 == doctest::Approx(0.6));
  CHECK(a.y2 == doctest::Approx(0.8));
}

TEST_CASE("param_adjust composes with the identity window and stays in range") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const Stroke s = stroke_painter::testing::random_stroke(rng);
    const Window w = random_window(rng);
    const Stroke a = param_adjust(s, w);
    CHECK(param_adjust(a, Window::full()) == a);
    CHECK(a.valid());
    CHECK(a.r == s.r);
    CHECK(a.z2 == s.z2);
  }
}

TEST_CASE("param_unadjust inverts param_adjust") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Stroke s = stroke_painter::testing::random_stroke(rng);
    const Window w = random_window(rng, 0.2);
    const Stroke back = param_unadjust(param_adjust(s, w), w);
    const auto a = back.to_array();
    const auto b = s.to_array();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
  }
}

TEST_CASE("stroke array layout") {
  Stroke s{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.15, 0.25, 0.35, 0.45};
  const auto a = s.to_array();
  CHECK(a[kX0] == 0.1);
  CHECK(a[kY2] == 0.6);
  CHECK(a[kZ2] == 0.8);
  CHECK(a[kW2] == 0.15);
  CHECK(a[kB] == 0.45);
  CHECK(Stroke::from_array(a) == s);
  CHECK(s.valid());
  Stroke bad = s;
  bad.g = 1.5;
  CHECK_FALSE(bad.valid());
  CHECK(bad.clamped().g == 1.0);
}
