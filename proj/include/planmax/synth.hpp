#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "planmax/forecast.hpp"
#include "planmax/geometry.hpp"
#include "planmax/irl.hpp"
#include "planmax/maxent.hpp"
#include "planmax/metrics.hpp"
#include "planmax/trajgen.hpp"

namespace planmax {

enum class TemplateKind : std::uint8_t { Corridor, TJunction, FourWay, Ring, ObstacleField };

std::string template_name(TemplateKind k);
TemplateKind template_from_name(const std::string& name);

// Scene channels emitted by every template: 0 drivable, 1 obstacle,
// 2 exit (drivable cell on the grid boundary).
struct SceneTemplate {
  TemplateKind kind = TemplateKind::Corridor;
  int height = 25;
  int width = 25;
  double cell_size = 2.0;
  int arm_halfwidth = 0;           // arm width = 2*halfwidth + 1 cells
  double obstacle_fraction = 0.1;  // obstacle-field only
};

// Deterministic per (template, seed); junction/ring geometry is jittered by
// the seed so different seeds give different scenes.
SceneGrid generate_scene(const SceneTemplate& tmpl, std::uint64_t seed);

// Hand-specified ground-truth rewards: drivable cells are cheap, blocked
// cells expensive; goal reward concentrates at exits ahead of the agent
// (cell center x >= 0).
struct TrueRewardSpec {
  double path_drivable = -0.15;
  double path_blocked = -6.0;
  double goal_exit = -0.2;
  double goal_other = -7.0;
};
RewardGrids true_rewards(const SceneGrid& scene, const TrueRewardSpec& spec = {});

struct TrackGenConfig {
  int horizon = 50;
  int t_f = 12;
  double dt = 0.5;
  int t_h = 4;
  double speed_min = 0.8;
  double speed_max = 3.0;
  double accel_max = 0.35;          // |tangential accel|, clamped so speed stays positive
  double noise_sigma_cells = 0.05;  // positional noise, fraction of cell size
};

// One generated agent: world-frame history, world-frame future positions
// and the plan it was rolled out from.
struct SynthAgent {
  WorldTrack track;
  std::vector<Vec2> future_world;
  Plan sampled_plan;
  double speed0 = 0.0;
  double accel = 0.0;
};

// Agents follow plans sampled from the MaxEnt policy of `rewards`,
// converted to continuous motion along the plan spline with a per-agent
// speed/acceleration profile plus seeded positional noise.
std::vector<SynthAgent> generate_tracks(const SceneGrid& scene, const RewardGrids& rewards,
                                        int n_agents, const TrackGenConfig& config,
                                        std::uint64_t seed);

// A fully prepared case: agent frame built from the track, features
// assembled, future projected to the agent frame and rasterized.
struct SynthCase {
  int scene_index = 0;
  TrackHistory history;
  FeatureGrid features;
  Trajectory future;  // agent frame
  Plan gt_plan;       // rasterized future
  Plan sampled_plan;  // the generating plan (diagnostics)
};

SynthCase prepare_case(const SceneGrid& scene, const SynthAgent& agent, int scene_index,
                       const TrackGenConfig& config);

struct BenchmarkConfig {
  std::vector<TemplateKind> templates = {TemplateKind::Corridor, TemplateKind::TJunction,
                                         TemplateKind::FourWay};
  int arm_halfwidth = 1;
  int train_scenes_per_template = 2;
  int test_scenes_per_template = 2;
  int train_agents_per_scene = 40;
  int test_agents_per_scene = 10;
  TrackGenConfig tracks;
  TrueRewardSpec reward_spec;
  // training
  int irl_epochs = 8;
  double irl_lr = 2e-3;
  int irl_batch = 8;
  int trajgen_pretrain_steps = 1500;
  int trajgen_finetune_steps = 0;
  double trajgen_lr = 2e-3;
  int bc_epochs = 8;
  double bc_lr = 2e-3;
  // evaluation
  int m_eval = 200;
  int k_small = 5;
  int k_large = 10;
  std::uint64_t seed = 7;
};

struct BenchmarkArtifacts {
  RewardParams reward_params;
  TrajGenParams trajgen_params;
  BcParams bc_params;
  std::vector<MetricRow> report;
};

// Full closed loop: generate train/test splits on disjoint seed ranges,
// train the reward model, trajectory generator and BC baseline, then
// evaluate all variants on unseen scenes.
BenchmarkArtifacts run_benchmark(const BenchmarkConfig& config, std::ostream* log = nullptr);

}  // namespace planmax
