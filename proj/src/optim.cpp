#include "planmax/optim.hpp"

#include <cmath>

namespace planmax {

AdamState AdamState::init(std::size_t dim, double lr) {
  AdamState s;
  s.m.assign(dim, 0.0);
  s.v.assign(dim, 0.0);
  s.lr = lr;
  return s;
}

void adam_step(Vec& theta, const Vec& grad, AdamState& state) {
  check_size(grad, theta.size(), "adam_step grad");
  check_size(state.m, theta.size(), "adam_step state");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    theta[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

}  // namespace planmax
