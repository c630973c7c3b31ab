#include "planmax/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "planmax/rng.hpp"

namespace planmax {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::pair<int, int> action_delta(Action a) {
  switch (a) {
    case Action::Up: return {-1, 0};
    case Action::Down: return {1, 0};
    case Action::Left: return {0, -1};
    case Action::Right: return {0, 1};
    case Action::End: break;
  }
  throw std::invalid_argument("action_delta: End has no move delta");
}

void RewardGrids::validate() const {
  if (height < 1 || width < 1) throw std::invalid_argument("RewardGrids: empty grid");
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (r_path.size() != n || r_goal.size() != n)
    throw std::invalid_argument("RewardGrids: size mismatch");
  for (const auto* grid : {&r_path, &r_goal})
    for (double v : *grid)
      if (std::isnan(v) || v > 0.0)
        throw std::invalid_argument("RewardGrids: rewards must be in (-inf, 0]");
}

double logsumexp(std::span<const double> xs) {
  double mx = kNegInf;
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return kNegInf;
  double sum = 0.0;
  for (double x : xs)
    if (x != kNegInf) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

namespace {

// logsumexp over one Q row with a fixed summation tree
// ((up+down)+(left+right))+end, so mirror-symmetric instances produce
// bit-identical policies.
double logsumexp_actions(const double* q, int n) {
  double mx = kNegInf;
  for (int a = 0; a < n; ++a) mx = std::max(mx, q[a]);
  if (!std::isfinite(mx)) return kNegInf;
  auto e = [&](int a) { return q[a] == kNegInf ? 0.0 : std::exp(q[a] - mx); };
  double sum = (e(0) + e(1)) + (e(2) + e(3));
  if (n == kNumActions) sum += e(4);
  return mx + std::log(sum);
}

}  // namespace

double Policy::plan_log_prob(const Plan& plan) const {
  if (plan.states.size() < 2) throw std::invalid_argument("plan_log_prob: degenerate plan");
  if (static_cast<int>(plan.num_actions()) > horizon) return kNegInf;
  double logp = 0.0;
  for (std::size_t t = 0; t + 1 < plan.states.size(); ++t) {
    const GridState& cur = plan.states[t];
    const GridState& nxt = plan.states[t + 1];
    Action a;
    if (nxt.kind == StateKind::Goal) {
      a = Action::End;
    } else if (nxt.row == cur.row - 1 && nxt.col == cur.col) {
      a = Action::Up;
    } else if (nxt.row == cur.row + 1 && nxt.col == cur.col) {
      a = Action::Down;
    } else if (nxt.col == cur.col - 1 && nxt.row == cur.row) {
      a = Action::Left;
    } else if (nxt.col == cur.col + 1 && nxt.row == cur.row) {
      a = Action::Right;
    } else {
      throw std::invalid_argument("plan_log_prob: non-adjacent transition");
    }
    const double p = pi_at(static_cast<int>(t), cur.row, cur.col, a);
    if (p <= 0.0) return kNegInf;
    logp += std::log(p);
  }
  return logp;
}

double Svf::goal_mass() const {
  double acc = 0.0;
  for (double v : goal_total) acc += v;
  return acc;
}

double Svf::path_step_mass(std::size_t n) const {
  double acc = 0.0;
  for (double v : path_step[n]) acc += v;
  return acc;
}

Policy solve_inferred(const RewardGrids& rewards, int horizon) {
  rewards.validate();
  if (horizon < 1) throw std::invalid_argument("solve_inferred: horizon must be >= 1");
  const int h = rewards.height, w = rewards.width;
  const std::size_t cells = static_cast<std::size_t>(h) * w;

  Policy p;
  p.kind = PolicyKind::InferredGoals;
  p.height = h;
  p.width = w;
  p.horizon = horizon;
  p.num_actions = kNumActions;
  p.v.assign(horizon + 1, std::vector<double>(cells, kNegInf));
  p.q.assign(horizon, std::vector<double>(cells * kNumActions, kNegInf));
  p.pi.assign(horizon, std::vector<double>(cells * kNumActions, 0.0));

  // Backward induction: iteration n of the paper fills temporal step n-1.
  for (int n = horizon; n >= 1; --n) {
    const std::vector<double>& v_next = p.v[n];
    std::vector<double>& v_cur = p.v[n - 1];
    std::vector<double>& q = p.q[n - 1];
    std::vector<double>& pi = p.pi[n - 1];
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t s = static_cast<std::size_t>(r) * w + c;
        double* qrow = &q[s * kNumActions];
        for (int a = 0; a < kNumMoveActions; ++a) {
          const auto [dr, dc] = action_delta(static_cast<Action>(a));
          const int nr = r + dr, nc = c + dc;
          if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;  // invalid, stays -inf
          qrow[a] = rewards.r_path[s] + v_next[static_cast<std::size_t>(nr) * w + nc];
        }
        // Goal states are terminal with V held at r_goal every step.
        qrow[static_cast<int>(Action::End)] = rewards.r_path[s] + rewards.r_goal[s];
        const double vs = logsumexp_actions(qrow, kNumActions);
        v_cur[s] = vs;
        if (vs != kNegInf) {
          double* pirow = &pi[s * kNumActions];
          for (int a = 0; a < kNumActions; ++a)
            pirow[a] = qrow[a] == kNegInf ? 0.0 : std::exp(qrow[a] - vs);
        }
      }
    }
  }
  return p;
}

Policy solve_goal_conditioned(const RewardGrids& rewards, GridState s_goal, int horizon) {
  rewards.validate();
  if (horizon < 1) throw std::invalid_argument("solve_goal_conditioned: horizon must be >= 1");
  const int h = rewards.height, w = rewards.width;
  if (s_goal.row < 0 || s_goal.row >= h || s_goal.col < 0 || s_goal.col >= w)
    throw std::invalid_argument("solve_goal_conditioned: goal outside grid");
  const std::size_t cells = static_cast<std::size_t>(h) * w;
  const std::size_t goal_idx = static_cast<std::size_t>(s_goal.row) * w + s_goal.col;

  Policy p;
  p.kind = PolicyKind::GoalConditioned;
  p.height = h;
  p.width = w;
  p.horizon = horizon;
  p.num_actions = kNumMoveActions;
  p.goal = s_goal;
  p.v.assign(horizon + 1, std::vector<double>(cells, kNegInf));
  p.q.assign(horizon, std::vector<double>(cells * kNumMoveActions, kNegInf));
  p.pi.assign(horizon, std::vector<double>(cells * kNumMoveActions, 0.0));

  p.v[horizon][goal_idx] = 0.0;
  for (int n = horizon; n >= 1; --n) {
    const std::vector<double>& v_next = p.v[n];
    std::vector<double>& v_cur = p.v[n - 1];
    std::vector<double>& q = p.q[n - 1];
    std::vector<double>& pi = p.pi[n - 1];
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t s = static_cast<std::size_t>(r) * w + c;
        double* qrow = &q[s * kNumMoveActions];
        for (int a = 0; a < kNumMoveActions; ++a) {
          const auto [dr, dc] = action_delta(static_cast<Action>(a));
          const int nr = r + dr, nc = c + dc;
          if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
          qrow[a] = rewards.r_path[s] + v_next[static_cast<std::size_t>(nr) * w + nc];
        }
        const double vs = logsumexp_actions(qrow, kNumMoveActions);
        v_cur[s] = vs;
        if (s != goal_idx && vs != kNegInf) {
          double* pirow = &pi[s * kNumMoveActions];
          for (int a = 0; a < kNumMoveActions; ++a)
            pirow[a] = qrow[a] == kNegInf ? 0.0 : std::exp(qrow[a] - vs);
        }
      }
    }
    v_cur[goal_idx] = 0.0;  // absorbing goal, value pinned
  }
  return p;
}

namespace {

void check_init_state(const Policy& policy, GridState s_init) {
  if (s_init.kind != StateKind::Path)
    throw std::invalid_argument("propagation must start from a path state");
  if (s_init.row < 0 || s_init.row >= policy.height || s_init.col < 0 ||
      s_init.col >= policy.width)
    throw std::invalid_argument("initial state outside grid");
}

}  // namespace

Svf propagate_inferred(const Policy& policy, GridState s_init) {
  if (policy.kind != PolicyKind::InferredGoals)
    throw std::invalid_argument("propagate_inferred: wrong policy kind");
  check_init_state(policy, s_init);
  const int h = policy.height, w = policy.width;
  const std::size_t cells = static_cast<std::size_t>(h) * w;

  Svf d;
  d.height = h;
  d.width = w;
  d.path_step.assign(policy.horizon + 1, std::vector<double>(cells, 0.0));
  d.goal_step.assign(policy.horizon + 1, std::vector<double>(cells, 0.0));
  d.path_step[0][policy.index(s_init.row, s_init.col)] = 1.0;

  for (int t = 0; t < policy.horizon; ++t) {
    const std::vector<double>& cur = d.path_step[t];
    std::vector<double>& nxt_path = d.path_step[t + 1];
    std::vector<double>& nxt_goal = d.goal_step[t + 1];
    const std::vector<double>& pi = policy.pi[t];
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t s = static_cast<std::size_t>(r) * w + c;
        const double mass = cur[s];
        if (mass == 0.0) continue;
        const double* pirow = &pi[s * kNumActions];
        for (int a = 0; a < kNumMoveActions; ++a) {
          if (pirow[a] == 0.0) continue;
          const auto [dr, dc] = action_delta(static_cast<Action>(a));
          nxt_path[static_cast<std::size_t>(r + dr) * w + (c + dc)] += mass * pirow[a];
        }
        nxt_goal[s] += mass * pirow[static_cast<int>(Action::End)];
      }
    }
  }

  d.path_total.assign(cells, 0.0);
  d.goal_total.assign(cells, 0.0);
  for (const auto& step : d.path_step)
    for (std::size_t s = 0; s < cells; ++s) d.path_total[s] += step[s];
  for (const auto& step : d.goal_step)
    for (std::size_t s = 0; s < cells; ++s) d.goal_total[s] += step[s];
  return d;
}

Svf propagate_goal_conditioned(const Policy& policy, GridState s_init, GridState s_goal) {
  if (policy.kind != PolicyKind::GoalConditioned)
    throw std::invalid_argument("propagate_goal_conditioned: wrong policy kind");
  if (s_goal.row != policy.goal.row || s_goal.col != policy.goal.col)
    throw std::invalid_argument("propagate_goal_conditioned: goal differs from policy goal");
  check_init_state(policy, s_init);
  const int h = policy.height, w = policy.width;
  const std::size_t cells = static_cast<std::size_t>(h) * w;
  const std::size_t goal_idx = static_cast<std::size_t>(s_goal.row) * w + s_goal.col;

  Svf d;
  d.height = h;
  d.width = w;
  d.path_step.assign(policy.horizon + 1, std::vector<double>(cells, 0.0));
  d.goal_step.assign(policy.horizon + 1, std::vector<double>(cells, 0.0));
  d.path_step[0][policy.index(s_init.row, s_init.col)] = 1.0;
  d.path_step[0][goal_idx] = 0.0;  // absorbed immediately if init == goal

  for (int t = 0; t < policy.horizon; ++t) {
    const std::vector<double>& cur = d.path_step[t];
    std::vector<double>& nxt = d.path_step[t + 1];
    const std::vector<double>& pi = policy.pi[t];
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t s = static_cast<std::size_t>(r) * w + c;
        const double mass = cur[s];
        if (mass == 0.0) continue;
        const double* pirow = &pi[s * kNumMoveActions];
        for (int a = 0; a < kNumMoveActions; ++a) {
          if (pirow[a] == 0.0) continue;
          const auto [dr, dc] = action_delta(static_cast<Action>(a));
          nxt[static_cast<std::size_t>(r + dr) * w + (c + dc)] += mass * pirow[a];
        }
      }
    }
    nxt[goal_idx] = 0.0;  // SVF at the goal is zeroed every step
  }

  d.path_total.assign(cells, 0.0);
  d.goal_total.assign(cells, 0.0);
  for (const auto& step : d.path_step)
    for (std::size_t s = 0; s < cells; ++s) d.path_total[s] += step[s];
  return d;
}

std::vector<Plan> sample_plans(const Policy& policy, GridState s_init, int count,
                               std::uint64_t seed) {
  if (policy.kind != PolicyKind::InferredGoals)
    throw std::invalid_argument("sample_plans: policy must be inferred-goals");
  check_init_state(policy, s_init);
  std::vector<Plan> plans;
  plans.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Plan plan;
    int r = s_init.row, c = s_init.col;
    plan.states.push_back(path_state(r, c));
    for (int t = 0; t < policy.horizon; ++t) {
      const double* pirow = &policy.pi[t][(static_cast<std::size_t>(r) * policy.width + c) *
                                          kNumActions];
      double total = 0.0;
      for (int a = 0; a < kNumActions; ++a) total += pirow[a];
      if (total <= 0.0)
        throw std::runtime_error("sample_plans: reached a state with no valid action");
      const double u = unif(rng) * total;
      double cum = 0.0;
      int chosen = kNumActions - 1;
      for (int a = 0; a < kNumActions; ++a) {
        cum += pirow[a];
        if (u < cum) {
          chosen = a;
          break;
        }
      }
      if (static_cast<Action>(chosen) == Action::End) {
        plan.states.push_back(goal_state(r, c));
        break;
      }
      const auto [dr, dc] = action_delta(static_cast<Action>(chosen));
      r += dr;
      c += dc;
      plan.states.push_back(path_state(r, c));
    }
    if (plan.states.back().kind != StateKind::Goal)
      throw std::runtime_error("sample_plans: plan did not terminate within horizon");
    plans.push_back(std::move(plan));
  }
  return plans;
}

namespace {

void enumerate_rec(const RewardGrids& rewards, int horizon, Plan& partial, double reward_sum,
                   std::map<Plan, double>& out) {
  const GridState cur = partial.states.back();
  const std::size_t s = static_cast<std::size_t>(cur.row) * rewards.width + cur.col;
  if (static_cast<int>(partial.num_actions()) >= horizon) return;
  // End action: close the plan at this cell.
  const double total = reward_sum + rewards.r_goal[s];
  if (total != kNegInf) {
    Plan done = partial;
    done.states.push_back(goal_state(cur.row, cur.col));
    out[done] = std::exp(total);
  }
  for (int a = 0; a < kNumMoveActions; ++a) {
    const auto [dr, dc] = action_delta(static_cast<Action>(a));
    const int nr = cur.row + dr, nc = cur.col + dc;
    if (nr < 0 || nr >= rewards.height || nc < 0 || nc >= rewards.width) continue;
    const double next_reward = rewards.r_path[static_cast<std::size_t>(nr) * rewards.width + nc];
    partial.states.push_back(path_state(nr, nc));
    enumerate_rec(rewards, horizon, partial, reward_sum + next_reward, out);
    partial.states.pop_back();
  }
}

}  // namespace

std::map<Plan, double> enumerate_distribution(const RewardGrids& rewards, int horizon,
                                              GridState s_init) {
  rewards.validate();
  if (rewards.height > 4 || rewards.width > 4 || horizon > 8 || horizon < 1)
    throw std::invalid_argument("enumerate_distribution: instance too large (max 4x4, N<=8)");
  if (s_init.row < 0 || s_init.row >= rewards.height || s_init.col < 0 ||
      s_init.col >= rewards.width)
    throw std::invalid_argument("enumerate_distribution: s_init outside grid");

  std::map<Plan, double> weights;
  Plan partial;
  partial.states.push_back(path_state(s_init.row, s_init.col));
  const double r0 = rewards.r_path[rewards.index(s_init.row, s_init.col)];
  enumerate_rec(rewards, horizon, partial, r0, weights);

  double z = 0.0;
  for (const auto& [plan, wgt] : weights) z += wgt;
  if (z <= 0.0) throw std::runtime_error("enumerate_distribution: no feasible plan");
  for (auto& [plan, wgt] : weights) wgt /= z;
  return weights;
}

}  // namespace planmax
