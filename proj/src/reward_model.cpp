#include "planmax/reward_model.hpp"

#include <cmath>
#include <stdexcept>

#include "planmax/rng.hpp"

namespace planmax {

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t CellMlp::num_params() const {
  return w1.data.size() + b1.size() + w2.data.size() + b2.size();
}

CellMlp CellMlp::zeros(int in, int hidden, int out) {
  CellMlp m;
  m.w1 = Mat(hidden, in);
  m.b1 = Vec(hidden, 0.0);
  m.w2 = Mat(out, hidden);
  m.b2 = Vec(out, 0.0);
  return m;
}

CellMlp CellMlp::glorot(int in, int hidden, int out, std::uint64_t seed) {
  CellMlp m = zeros(in, hidden, out);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Mat& w, int fan_in, int fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> unif(-a, a);
    for (double& v : w.data) v = unif(rng);
  };
  fill(m.w1, in, hidden);
  fill(m.w2, hidden, out);
  return m;
}

Vec CellMlp::forward(const Vec& x) const {
  Vec h = matvec(w1, x);
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] += b1[i];
    if (h[i] < 0.0) h[i] = 0.0;
  }
  Vec o = matvec(w2, h);
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += b2[i];
  return o;
}

void CellMlp::backward(const Vec& x, const Vec& upstream, std::span<double> grad) const {
  check_size(upstream, w2.rows, "CellMlp::backward upstream");
  if (grad.size() != num_params()) throw std::invalid_argument("CellMlp::backward: grad size");
  // Recompute the forward intermediates; cells are tiny.
  Vec pre = matvec(w1, x);
  Vec h(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    pre[i] += b1[i];
    h[i] = pre[i] > 0.0 ? pre[i] : 0.0;
  }
  // Layer 2 grads.
  const std::size_t n_w1 = w1.data.size(), n_b1 = b1.size(), n_w2 = w2.data.size();
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + n_w1;
  double* g_w2 = g_b1 + n_b1;
  double* g_b2 = g_w2 + n_w2;
  for (std::size_t r = 0; r < w2.rows; ++r) {
    const double u = upstream[r];
    if (u == 0.0) continue;
    for (std::size_t c = 0; c < w2.cols; ++c) g_w2[r * w2.cols + c] += u * h[c];
    g_b2[r] += u;
  }
  // Through relu into layer 1.
  Vec dh = matvec_t(w2, upstream);
  for (std::size_t i = 0; i < dh.size(); ++i) {
    if (pre[i] <= 0.0) dh[i] = 0.0;
    if (dh[i] == 0.0) continue;
    for (std::size_t c = 0; c < w1.cols; ++c) g_w1[i * w1.cols + c] += dh[i] * x[c];
    g_b1[i] += dh[i];
  }
}

void CellMlp::flatten_into(std::span<double> out) const {
  if (out.size() != num_params()) throw std::invalid_argument("CellMlp::flatten_into: size");
  double* p = out.data();
  for (double v : w1.data) *p++ = v;
  for (double v : b1) *p++ = v;
  for (double v : w2.data) *p++ = v;
  for (double v : b2) *p++ = v;
}

void CellMlp::unflatten_from(std::span<const double> in) {
  if (in.size() != num_params()) throw std::invalid_argument("CellMlp::unflatten_from: size");
  const double* p = in.data();
  for (double& v : w1.data) v = *p++;
  for (double& v : b1) v = *p++;
  for (double& v : w2.data) v = *p++;
  for (double& v : b2) v = *p++;
}

RewardParams RewardParams::init(int feature_dim, int hidden, std::uint64_t seed) {
  RewardParams p;
  p.path_head = CellMlp::glorot(feature_dim, hidden, 1, derive_seed(seed, 1));
  p.goal_head = CellMlp::glorot(feature_dim, hidden, 1, derive_seed(seed, 2));
  return p;
}

RewardParams RewardParams::zeros(int feature_dim, int hidden) {
  RewardParams p;
  p.path_head = CellMlp::zeros(feature_dim, hidden, 1);
  p.goal_head = CellMlp::zeros(feature_dim, hidden, 1);
  return p;
}

Vec RewardParams::flatten() const {
  Vec theta(num_params());
  path_head.flatten_into(std::span(theta).first(path_head.num_params()));
  goal_head.flatten_into(std::span(theta).subspan(path_head.num_params()));
  return theta;
}

void RewardParams::unflatten(const Vec& theta) {
  if (theta.size() != num_params()) throw std::invalid_argument("RewardParams::unflatten: size");
  path_head.unflatten_from(std::span(theta).first(path_head.num_params()));
  goal_head.unflatten_from(std::span(theta).subspan(path_head.num_params()));
}

RewardGrids forward_rewards(const FeatureGrid& features, const RewardParams& params) {
  if (features.feature_dim != params.path_head.in_dim() ||
      features.feature_dim != params.goal_head.in_dim())
    throw std::invalid_argument("forward_rewards: feature dimension mismatch");
  RewardGrids r;
  r.height = features.height;
  r.width = features.width;
  const std::size_t cells = static_cast<std::size_t>(r.height) * r.width;
  r.r_path.resize(cells);
  r.r_goal.resize(cells);
  for (int row = 0; row < features.height; ++row) {
    for (int col = 0; col < features.width; ++col) {
      const Vec x = features.cell_features(row, col);
      const std::size_t s = static_cast<std::size_t>(row) * features.width + col;
      r.r_path[s] = log_sigmoid(params.path_head.forward(x)[0]);
      r.r_goal[s] = log_sigmoid(params.goal_head.forward(x)[0]);
    }
  }
  return r;
}

Vec backward_rewards(const FeatureGrid& features, const RewardParams& params,
                     const std::vector<double>& upstream_path,
                     const std::vector<double>& upstream_goal) {
  const std::size_t cells = static_cast<std::size_t>(features.height) * features.width;
  if (upstream_path.size() != cells || upstream_goal.size() != cells)
    throw std::invalid_argument("backward_rewards: upstream size mismatch");
  Vec grad(params.num_params(), 0.0);
  auto path_span = std::span(grad).first(params.path_head.num_params());
  auto goal_span = std::span(grad).subspan(params.path_head.num_params());
  for (int row = 0; row < features.height; ++row) {
    for (int col = 0; col < features.width; ++col) {
      const std::size_t s = static_cast<std::size_t>(row) * features.width + col;
      if (upstream_path[s] == 0.0 && upstream_goal[s] == 0.0) continue;
      const Vec x = features.cell_features(row, col);
      // d logsigmoid(o) / d o = sigmoid(-o)
      if (upstream_path[s] != 0.0) {
        const double o = params.path_head.forward(x)[0];
        params.path_head.backward(x, {upstream_path[s] * sigmoid(-o)}, path_span);
      }
      if (upstream_goal[s] != 0.0) {
        const double o = params.goal_head.forward(x)[0];
        params.goal_head.backward(x, {upstream_goal[s] * sigmoid(-o)}, goal_span);
      }
    }
  }
  return grad;
}

}  // namespace planmax
