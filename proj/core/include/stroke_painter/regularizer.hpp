#pragma once

#include <cstdint>
#include <vector>

#include "stroke_painter/image.hpp"
#include "stroke_painter/renderer.hpp"
#include "stroke_painter/sequence.hpp"

namespace stroke_painter {

enum class GateInit {
  /// Logits start at +3 standard deviations: every stroke begins active.
  kAllActive,
  /// Logits drawn from N(0, 1e-3): about half the gates start closed.
  kSmallNoise,
};

inline constexpr double kGateInitVariance = 1e-3;

/// Importance gates beta = step(x) with x > 0 open; x == 0 is closed.
struct GateState {
  std::vector<double> logits;

  std::vector<double> gates() const;
  std::size_t open_count() const;
};

double sigmoid(double x);

/// sigma(x) * (1 - sigma(x)), the stand-in for d(step)/dx.
double surrogate_gate_grad(double x);

GateState init_gates(std::size_t count, GateInit mode, std::uint64_t seed);

struct RegConfig {
  /// Negative selects the calibrated default (see calibrate_gamma).
  double gamma = -1.0;
  int iterations = 300;
  double step_size = 0.01;
  GateInit gate_init = GateInit::kAllActive;
  std::uint64_t seed = 0;
  double calibration_fraction = 0.1;
  /// Keep strokes inside their recorded windows while refining.
  bool respect_windows = false;
  RasterOptions raster;
};

/// L2(target, gated render) + gamma * open gate count.
double total_loss(const StrokeSequence& sequence, const GateState& gates, const Canvas& target,
                  const Canvas& init, double gamma, const RasterOptions& options = {});

/// 0.5 * mean leave-one-out L2 increase over a seeded sample of ceil(fraction * n) strokes.
double calibrate_gamma(const StrokeSequence& sequence, const Canvas& target, const Canvas& init,
                       double fraction, std::uint64_t seed, const RasterOptions& options = {});

struct RegResult {
  /// Refined strokes; pruned entries carry importance 0.
  StrokeSequence sequence;
  GateState gates;
  double gamma = 0.0;
  double initial_l2 = 0.0;
  double final_l2 = 0.0;
  double final_total = 0.0;
  int best_iteration = 0;
};

RegResult stroke_reg(const StrokeSequence& sequence, const Canvas& target, const Canvas& init,
                     const RegConfig& config);

}  // namespace stroke_painter
