#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "planmax/features.hpp"
#include "planmax/geometry.hpp"
#include "planmax/irl.hpp"
#include "planmax/kmeans.hpp"
#include "planmax/maxent.hpp"
#include "planmax/reward_model.hpp"
#include "planmax/trajgen.hpp"

namespace planmax {

enum class Variant : std::uint8_t { P2tIrl, P2tCs, P2tBc, ConstantVelocity };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// K representative trajectories with cluster member counts summing to the
// number of drawn samples.
struct ForecastSet {
  Variant variant = Variant::P2tIrl;
  std::vector<Trajectory> trajectories;
  std::vector<int> members;

  int k() const { return static_cast<int>(trajectories.size()); }
  int total_members() const;
  void validate(int t_f) const;
};

struct ForecastConfig {
  int k = 10;
  int m = 1000;  // plans sampled at inference
  int horizon = 50;
  int t_f = 12;
  double dt = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Decoded trajectory samples before clustering; clusterable at any K
// without re-running the generator.
struct SampleSet {
  Variant variant = Variant::P2tIrl;
  std::vector<Trajectory> trajectories;
};

ForecastSet cluster_forecasts(const SampleSet& samples, int k, std::uint64_t seed);

// Full pipeline: features -> rewards -> policy -> sampled plans -> decoded
// trajectories.
SampleSet sample_forecasts_irl(const SceneGrid& scene, const TrackHistory& track,
                               const RewardParams& reward_params,
                               const TrajGenParams& trajgen_params, const ForecastConfig& config);

ForecastSet forecast(const SceneGrid& scene, const TrackHistory& track,
                     const RewardParams& reward_params, const TrajGenParams& trajgen_params,
                     const ForecastConfig& config);

// Constant-speed ablation: the learned decoder is replaced by a spline
// rollout at the agent's current speed.
SampleSet sample_forecasts_cs(const SceneGrid& scene, const TrackHistory& track,
                              const RewardParams& reward_params, const ForecastConfig& config);

ForecastSet forecast_cs(const SceneGrid& scene, const TrackHistory& track,
                        const RewardParams& reward_params, const ForecastConfig& config);

// Straight-line constant-velocity baseline (single mode).
ForecastSet forecast_constant_velocity(const TrackHistory& track, const ForecastConfig& config);

// Behavior cloning ablation: a per-cell MLP maps features directly to
// probabilities over the five actions (softmax over the actions valid at
// the cell), used as a stationary policy.
struct BcParams {
  CellMlp net;

  static BcParams init(int feature_dim, int hidden, std::uint64_t seed);
  // Action distribution at a cell; invalid moves get probability zero.
  Vec action_probs(const FeatureGrid& features, int row, int col) const;
};

struct BcTrainConfig {
  double lr = 1e-3;
  int batch = 8;
  int epochs = 10;
  int hidden = 32;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

struct BcTrainResult {
  BcParams params;
  std::vector<double> loss_log;  // mean cross-entropy per epoch
};

BcTrainResult train_bc(const std::vector<Demonstration>& dataset, const BcTrainConfig& config);

// Roll out the stationary BC policy; End is forced at the horizon so every
// plan terminates.
std::vector<Plan> sample_bc_plans(const BcParams& params, const FeatureGrid& features,
                                  GridState s_init, int horizon, int count, std::uint64_t seed);

SampleSet sample_forecasts_bc(const SceneGrid& scene, const TrackHistory& track,
                              const BcParams& bc_params, const TrajGenParams& trajgen_params,
                              const ForecastConfig& config);

ForecastSet forecast_bc(const SceneGrid& scene, const TrackHistory& track,
                        const BcParams& bc_params, const TrajGenParams& trajgen_params,
                        const ForecastConfig& config);

}  // namespace planmax
