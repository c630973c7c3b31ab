#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "planmax/features.hpp"
#include "planmax/geometry.hpp"
#include "planmax/linalg.hpp"
#include "planmax/maxent.hpp"
#include "planmax/optim.hpp"
#include "planmax/reward_model.hpp"

namespace planmax {

// One training example: a rasterized future plan with the features and
// track history observed at the prediction instant.
struct Demonstration {
  Plan plan;
  FeatureGrid features;
  TrackHistory track;
};

// Demonstration SVF: each visit counts, the terminal goal once.
Svf demo_svf(const Plan& plan, int height, int width);

// Total plan reward sum r_path over path states + r_goal at the goal.
double plan_reward(const RewardGrids& rewards, const Plan& plan);

// Exact log-likelihood of a plan under the policy solved for `rewards`:
// plan_reward - V^(0)(s_init), since V^(0)(s_init) is the log partition.
double plan_log_likelihood(const RewardGrids& rewards, const Policy& policy, const Plan& plan);

// Ascent gradient of the demonstration log-likelihood with respect to the
// flattened reward parameters: backward_rewards of (D_tau - D_theta).
Vec irl_gradient(const Demonstration& demo, const RewardParams& params, int horizon);

struct IrlTrainConfig {
  int horizon = 50;
  double lr = 1e-4;
  int batch = 8;
  int epochs = 10;
  std::uint64_t seed = 0;
  int hidden = 32;
  bool shuffle = true;
  int threads = 1;
  // Holdout likelihood at micro scale is computed by brute-force
  // enumeration; larger instances use the exact log-partition identity.
  bool log_holdout = true;
};

struct EpochLog {
  int epoch = 0;  // 0 is the pre-training evaluation row
  double train_nll = 0.0;
  std::optional<double> holdout_nll;
};

struct IrlTrainResult {
  RewardParams params;
  AdamState adam;
  std::vector<EpochLog> log;
  int discarded = 0;  // demos longer than the horizon, dropped at ingest
};

IrlTrainResult train_irl(const std::vector<Demonstration>& dataset, const IrlTrainConfig& config,
                         const std::vector<Demonstration>& holdout = {},
                         const RewardParams* resume_params = nullptr,
                         const AdamState* resume_adam = nullptr);

}  // namespace planmax
