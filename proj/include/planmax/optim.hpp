#pragma once

#include "planmax/linalg.hpp"

namespace planmax {

struct AdamState {
  Vec m;
  Vec v;
  long step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(std::size_t dim, double lr);
};

// Bias-corrected Adam descent update, in place. Pass the negated gradient
// to ascend.
void adam_step(Vec& theta, const Vec& grad, AdamState& state);

}  // namespace planmax
