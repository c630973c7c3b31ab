#pragma once

#include <cstdint>
#include <vector>

#include "planmax/features.hpp"
#include "planmax/linalg.hpp"
#include "planmax/maxent.hpp"

namespace planmax {

// -log(1 + exp(-x)), computed without overflow; strictly negative for
// finite x.
double log_sigmoid(double x);
double sigmoid(double x);

// MLP applied independently at every cell (the 1x1-convolution idiom):
// out = W2 * relu(W1 * f + b1) + b2.
//
// Flattening order (fixed so optimizer state is reproducible):
// w1 row-major, b1, w2 row-major, b2.
struct CellMlp {
  Mat w1;  // hidden x in
  Vec b1;  // hidden
  Mat w2;  // out x hidden
  Vec b2;  // out

  int in_dim() const { return static_cast<int>(w1.cols); }
  int hidden_dim() const { return static_cast<int>(w1.rows); }
  int out_dim() const { return static_cast<int>(w2.rows); }
  std::size_t num_params() const;

  static CellMlp zeros(int in, int hidden, int out);
  // Glorot-uniform weights, zero biases.
  static CellMlp glorot(int in, int hidden, int out, std::uint64_t seed);

  Vec forward(const Vec& x) const;
  // Accumulates parameter gradients (same flattening as flatten()) into
  // grad and returns nothing extra; upstream is dL/d(out).
  void backward(const Vec& x, const Vec& upstream, std::span<double> grad) const;

  void flatten_into(std::span<double> out) const;
  void unflatten_from(std::span<const double> in);
};

// Path and goal reward heads over per-cell features. Parameter vector is
// the path head followed by the goal head.
struct RewardParams {
  CellMlp path_head;
  CellMlp goal_head;

  static RewardParams init(int feature_dim, int hidden, std::uint64_t seed);
  static RewardParams zeros(int feature_dim, int hidden);

  std::size_t num_params() const { return path_head.num_params() + goal_head.num_params(); }
  Vec flatten() const;
  void unflatten(const Vec& theta);
};

// r = logsigmoid(head(features)) per cell per head; outputs in (-inf, 0).
RewardGrids forward_rewards(const FeatureGrid& features, const RewardParams& params);

// Exact gradient of sum_cells (upstream_path * r_path + upstream_goal *
// r_goal) with respect to the flattened parameters.
Vec backward_rewards(const FeatureGrid& features, const RewardParams& params,
                     const std::vector<double>& upstream_path,
                     const std::vector<double>& upstream_goal);

}  // namespace planmax
