#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "planmax/geometry.hpp"

namespace planmax {

// Grid MDP actions. Move actions connect a cell's path state to the
// adjacent cell's path state; End transitions to the goal state at the same
// cell, terminating the episode.
enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3, End = 4 };
inline constexpr int kNumActions = 5;      // inferred-goals MDP
inline constexpr int kNumMoveActions = 4;  // goal-conditioned MDP

// Row/col delta of a move action.
std::pair<int, int> action_delta(Action a);

// Per-cell path and goal rewards, each in (-inf, 0]; -inf marks a state the
// policy must never use.
struct RewardGrids {
  int height = 0;
  int width = 0;
  std::vector<double> r_path;
  std::vector<double> r_goal;

  int index(int r, int c) const { return r * width + c; }
  void validate() const;
};

enum class PolicyKind : std::uint8_t { InferredGoals, GoalConditioned };

// Non-stationary MaxEnt policy over N steps together with its soft value
// tables.
//
// Indexing: step t in [0, N) is temporal. pi[t] is the distribution of the
// (t+1)-th action, i.e. the policy the propagation applies to D at step t.
// Backward induction fills t = N-1 first (the forced-termination step) and
// t = 0 last (the full-horizon step). v[k] holds the state log-partition
// with k actions already taken: v[N] is the -inf initialization and
// v[0](s_init) = log Z, the log-partition over all plans from s_init.
//
// Rows of pi sum to 1 where the state has a finite value at that step and
// are all-zero where it does not (unreachable or dead states). In the
// goal-conditioned variant the goal state is absorbing: its value is held
// at 0 and its pi row is all-zero.
struct Policy {
  PolicyKind kind = PolicyKind::InferredGoals;
  int height = 0;
  int width = 0;
  int horizon = 0;      // N
  int num_actions = 0;  // 5 (inferred) or 4 (goal conditioned)
  GridState goal;       // goal-conditioned only

  std::vector<std::vector<double>> v;   // (N+1) x (H*W), path states
  std::vector<std::vector<double>> q;   // N x (H*W*num_actions)
  std::vector<std::vector<double>> pi;  // N x (H*W*num_actions)

  int index(int r, int c) const { return r * width + c; }
  double pi_at(int step, int r, int c, Action a) const {
    return pi[step][(r * width + c) * num_actions + static_cast<int>(a)];
  }

  // log prod_t pi^(t)(a_t | s_t) along the plan; -inf if any step has zero
  // probability. The plan must start where propagation starts.
  double plan_log_prob(const Plan& plan) const;
};

// State visitation frequencies. per-step index n holds the paper's D^(n+1)
// (so index 0 is the initial distribution); accumulated tables sum the
// steps. Goal-state mass is the probability of terminating at that cell.
struct Svf {
  int height = 0;
  int width = 0;
  std::vector<std::vector<double>> path_step;
  std::vector<std::vector<double>> goal_step;
  std::vector<double> path_total;
  std::vector<double> goal_total;

  int index(int r, int c) const { return r * width + c; }
  double goal_mass() const;
  double path_step_mass(std::size_t n) const;
};

// Soft value iteration with jointly inferred goals. Move actions leading
// off the grid are invalid: excluded from the logsumexp and given zero
// probability.
Policy solve_inferred(const RewardGrids& rewards, int horizon);

// Goal-conditioned soft value iteration over the 4 move actions; uses only
// rewards.r_path. V(s_goal) is held at 0 throughout.
Policy solve_goal_conditioned(const RewardGrids& rewards, GridState s_goal, int horizon);

// Policy propagation with inferred goals: goal mass accumulates and is
// never propagated.
Svf propagate_inferred(const Policy& policy, GridState s_init);

// Goal-conditioned policy propagation: the goal state's SVF is zeroed at
// every step (absorbed mass is not counted as a visit).
Svf propagate_goal_conditioned(const Policy& policy, GridState s_init, GridState s_goal);

// Ancestral sampling of M plans from an inferred-goals policy. Plan i is
// drawn from an engine seeded by derive_seed(seed, i), so output is
// reproducible and independent of evaluation order.
std::vector<Plan> sample_plans(const Policy& policy, GridState s_init, int count,
                               std::uint64_t seed);

// Brute-force plan distribution: every plan from s_init reaching a goal
// within the horizon, with probability exp(sum of path rewards + goal
// reward) / Z. Refuses instances larger than 4x4 cells or horizon 8.
std::map<Plan, double> enumerate_distribution(const RewardGrids& rewards, int horizon,
                                              GridState s_init);

// logsumexp with max subtraction; -inf for an all-(-inf) or empty range.
double logsumexp(std::span<const double> xs);

}  // namespace planmax
