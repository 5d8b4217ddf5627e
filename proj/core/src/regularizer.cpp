#include "stroke_painter/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "stroke_painter/error.hpp"
#include "stroke_painter/optim.hpp"
#include "stroke_painter/parallel.hpp"

namespace stroke_painter {

namespace {

void check_inputs(const StrokeSequence& seq, const Canvas& target, const Canvas& init) {
  if (!target.same_shape(init)) throw Error(ErrorCode::kDimensionMismatch, "target and init differ in size");
  if (!seq.is_sorted()) throw Error(ErrorCode::kInvalidArgument, "sequence is not sorted by (layer, timestep)");
}

std::vector<Stroke> strokes_of(const StrokeSequence& seq) {
  std::vector<Stroke> out;
  out.reserve(seq.size());
  for (const auto& e : seq.entries) out.push_back(e.stroke);
  return out;
}

double l2(const Canvas& a, const Canvas& b) {
  double acc = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) acc += (va[i] - vb[i]) * (va[i] - vb[i]);
  return va.empty() ? 0.0 : acc / static_cast<double>(va.size());
}

}  // namespace

std::vector<double> GateState::gates() const {
  std::vector<double> out(logits.size());
  std::transform(logits.begin(), logits.end(), out.begin(), [](double x) { return x > 0.0 ? 1.0 : 0.0; });
  return out;
}

std::size_t GateState::open_count() const {
  return static_cast<std::size_t>(std::count_if(logits.begin(), logits.end(), [](double x) { return x > 0.0; }));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double surrogate_gate_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

GateState init_gates(std::size_t count, GateInit mode, std::uint64_t seed) {
  GateState g;
  const double sd = std::sqrt(kGateInitVariance);
  if (mode == GateInit::kAllActive) {
    g.logits.assign(count, 3.0 * sd);
    return g;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sd);
  g.logits.resize(count);
  for (double& x : g.logits) x = normal(rng);
  return g;
}

double total_loss(const StrokeSequence& sequence, const GateState& gates, const Canvas& target,
                  const Canvas& init, double gamma, const RasterOptions& options) {
  check_inputs(sequence, target, init);
  if (gates.logits.size() != sequence.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one gate per stroke required");
  }
  const auto strokes = strokes_of(sequence);
  const auto beta = gates.gates();
  return gated_l2_loss(strokes, beta, init, target, nullptr, init.bounds(), options) +
         gamma * static_cast<double>(gates.open_count());
}

double calibrate_gamma(const StrokeSequence& sequence, const Canvas& target, const Canvas& init,
                       double fraction, std::uint64_t seed, const RasterOptions& options) {
  check_inputs(sequence, target, init);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (sequence.entries[i].active()) active.push_back(i);
  }
  if (active.empty()) return 0.0;

  const int height = init.height();
  const int width = init.width();
  std::vector<Footprint> fps(sequence.size());
  parallel_for(active.size(), [&](std::size_t j) {
    fps[active[j]] = rasterize_footprint(sequence.entries[active[j]].stroke, height, width,
                                         init.bounds(), options);
  });
  auto render_without = [&](std::size_t skip) {
    Canvas c = init;
    for (std::size_t i : active) {
      if (i == skip) continue;
      const auto& e = sequence.entries[i];
      composite_footprint(c, fps[i], {e.stroke.r, e.stroke.g, e.stroke.b}, e.importance);
    }
    return c;
  };

  const double full = l2(target, render_without(sequence.size()));
  std::vector<std::size_t> sample = active;
  std::mt19937_64 rng(seed);
  std::shuffle(sample.begin(), sample.end(), rng);
  const auto m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(active.size())));
  sample.resize(std::clamp<std::size_t>(m, 1, active.size()));

  std::vector<double> deltas(sample.size());
  parallel_for(sample.size(), [&](std::size_t j) {
    deltas[j] = std::max(0.0, l2(target, render_without(sample[j])) - full);
  });
  const double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) / deltas.size();
  if (mean > 0.0) return 0.5 * mean;

  const double blank = l2(target, init);
  return std::max(0.0, 0.5 * (blank - full) / static_cast<double>(active.size()));
}

RegResult stroke_reg(const StrokeSequence& sequence, const Canvas& target, const Canvas& init,
                     const RegConfig& config) {
  check_inputs(sequence, target, init);
  if (config.iterations < 0) throw Error(ErrorCode::kInvalidArgument, "negative iteration count");
  if (!std::isfinite(config.gamma)) throw Error(ErrorCode::kInvalidArgument, "gamma must be finite");

  constexpr std::size_t P = Stroke::kParamCount;
  const std::size_t n = sequence.size();
  RegResult out;
  out.gamma = config.gamma >= 0.0 ? config.gamma
                                  : calibrate_gamma(sequence, target, init, config.calibration_fraction,
                                                    config.seed, config.raster);
  out.gates = init_gates(n, config.gate_init, config.seed);
  std::vector<bool> frozen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!sequence.entries[i].active()) {
      frozen[i] = true;
      out.gates.logits[i] = 0.0;
    }
  }
  {
    std::vector<double> given(n);
    for (std::size_t i = 0; i < n; ++i) given[i] = sequence.entries[i].importance;
    out.initial_l2 = gated_l2_loss(strokes_of(sequence), given, init, target, nullptr, init.bounds(),
                                   config.raster);
  }

  const int height = init.height();
  const int width = init.width();
  std::vector<double> params(n * P);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = sequence.entries[i].stroke.to_array();
    std::copy(a.begin(), a.end(), params.begin() + P * i);
  }
  auto stroke_at = [&](const std::vector<double>& p, std::size_t i) {
    return Stroke::from_array(std::span<const double, P>(p.data() + P * i, P));
  };

  Adam adam(n * (P + 1));
  std::vector<double> state(n * (P + 1));
  std::vector<double> grad(n * (P + 1));
  std::vector<Stroke> strokes(n);
  std::vector<double> best_params = params;
  std::vector<double> best_logits = out.gates.logits;
  double best_total = std::numeric_limits<double>::infinity();
  double best_l2 = out.initial_l2;

  for (int it = 0; it <= config.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) strokes[i] = stroke_at(params, i);
    const auto beta = out.gates.gates();
    const bool last = it == config.iterations;
    GatedL2Result r;
    if (last) {
      r.loss = gated_l2_loss(strokes, beta, init, target, nullptr, init.bounds(), config.raster);
    } else {
      r = gated_l2_gradient(strokes, beta, init, target, nullptr, init.bounds(), config.raster);
    }
    const double total = r.loss + out.gamma * static_cast<double>(out.gates.open_count());
    if (!std::isfinite(total)) throw Error(ErrorCode::kNonFiniteGradient, "loss is not finite");
    if (total < best_total) {
      best_total = total;
      best_l2 = r.loss;
      best_params = params;
      best_logits = out.gates.logits;
      out.best_iteration = it;
    }
    if (last) break;

    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(params.begin() + P * i, P, state.begin() + (P + 1) * i);
      state[(P + 1) * i + P] = out.gates.logits[i];
      if (frozen[i]) {
        std::fill_n(grad.begin() + (P + 1) * i, P + 1, 0.0);
        continue;
      }
      for (std::size_t p = 0; p < P; ++p) grad[(P + 1) * i + p] = r.stroke_grads[i][p];
      const double x = out.gates.logits[i];
      grad[(P + 1) * i + P] = (r.gate_grads[i] + out.gamma) * surrogate_gate_grad(x);
    }
    adam.step(state, grad, config.step_size);
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i]) continue;
      Stroke s = Stroke::from_array(std::span<const double, P>(state.data() + (P + 1) * i, P)).clamped();
      const Window& win = sequence.entries[i].window;
      if (config.respect_windows && win != Window::full() && win.w > 0.0 && win.h > 0.0) {
        s = shrink_to_window(s, win, height, width, config.raster);
      }
      const auto a = s.to_array();
      std::copy(a.begin(), a.end(), params.begin() + P * i);
      out.gates.logits[i] = state[(P + 1) * i + P];
    }
  }

  out.gates.logits = best_logits;
  out.final_l2 = best_l2;
  out.final_total = best_total;
  out.sequence = sequence;
  const auto beta = out.gates.gates();
  for (std::size_t i = 0; i < n; ++i) {
    out.sequence.entries[i].stroke = stroke_at(best_params, i);
    out.sequence.entries[i].importance = beta[i];
  }
  return out;
}

}  // namespace stroke_painter
