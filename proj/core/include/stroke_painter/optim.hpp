#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stroke_painter {

class Adam {
 public:
  explicit Adam(std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad, double learning_rate);

 private:
  double beta1_;
  double beta2_;
  double eps_;
  long step_count_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Scales grad in place so its L2 norm is at most max_norm; returns the original norm.
double clip_grad_norm(std::span<double> grad, double max_norm);

/// lr * 0.5 * (1 + cos(pi * step / total)).
double cosine_lr(double base, int step, int total);

}  // namespace stroke_painter
