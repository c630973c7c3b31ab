#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planmax/forecast.hpp"
#include "planmax/geometry.hpp"
#include "planmax/irl.hpp"
#include "planmax/metrics.hpp"
#include "planmax/synth.hpp"
#include "planmax/trajgen.hpp"

namespace planmax::io {

namespace fs = std::filesystem;

// Scene file: one-line JSON header (dimensions, cell size, origin, channel
// names), then whitespace-separated row-major grids: each channel, the 0/1
// drivable mask, and the lane direction grid (nan where undefined) when
// present.
void save_scene(const fs::path& path, const SceneGrid& scene);
SceneGrid load_scene(const fs::path& path);

// Track file: JSON lines, one record per agent snapshot
// {track_id, t, x, y, vx, vy, ax, ay, yaw_rate}, world frame.
struct TrackRecord {
  int track_id = 0;
  WorldSample sample;
};
void save_tracks(const fs::path& path, const std::vector<TrackRecord>& records);

struct LoadedTrack {
  WorldTrack history;              // records with t <= 0
  std::vector<Vec2> future_world;  // records with t > 0, chronological
};
std::map<int, LoadedTrack> load_tracks(const fs::path& path);

// Dataset directory: manifest.json + scenes/ + tracks/.
struct DatasetParams {
  int t_h = 4;
  int t_f = 12;
  double dt = 0.5;
  int horizon = 50;
};

struct LoadedDataset {
  DatasetParams params;
  std::vector<SceneGrid> scenes;
  std::vector<SynthCase> cases;
};

void save_dataset(const fs::path& dir, const std::vector<SceneGrid>& scenes,
                  const std::vector<std::vector<SynthAgent>>& agents_per_scene,
                  const DatasetParams& params);
LoadedDataset load_dataset(const fs::path& dir);

// Checkpoints: JSON architecture descriptor + flat parameter array (+ Adam
// state for resumable training); doubles round-trip bit exactly.
void save_reward_checkpoint(const fs::path& path, const RewardParams& params,
                            const AdamState& adam);
struct RewardCheckpoint {
  RewardParams params;
  AdamState adam;
};
RewardCheckpoint load_reward_checkpoint(const fs::path& path);

void save_trajgen_checkpoint(const fs::path& path, const TrajGenParams& params, long step);
struct TrajGenCheckpoint {
  TrajGenParams params;
  long step = 0;
};
TrajGenCheckpoint load_trajgen_checkpoint(const fs::path& path);

void save_bc_checkpoint(const fs::path& path, const BcParams& params);
BcParams load_bc_checkpoint(const fs::path& path);

// Forecast export: JSON lines, one record per centroid
// {variant, case_id, k_set, k_index, members, points}.
struct ForecastRecord {
  std::string variant;
  int case_id = 0;
  int k_set = 0;
  int k_index = 0;
  int members = 0;
  std::vector<Vec2> points;
};
void save_forecasts(const fs::path& path, const std::vector<ForecastRecord>& records);
std::vector<ForecastRecord> load_forecasts(const fs::path& path);
std::vector<ForecastRecord> forecast_to_records(const ForecastSet& set, int case_id, int k_set);

// Metric report CSV: one row per variant.
void save_metrics_csv(const fs::path& path, const std::vector<MetricRow>& rows);

// Training loss CSV: epoch, train_nll_proxy, oracle_nll (blank when not
// computed).
void save_loss_csv(const fs::path& path, const std::vector<EpochLog>& log);

// Step-major JSON exports for debugging; -inf encodes as null.
void save_svf_json(const fs::path& path, const Svf& svf);
Svf load_svf_json(const fs::path& path);
void save_policy_json(const fs::path& path, const Policy& policy);
void save_rewards_json(const fs::path& path, const RewardGrids& rewards);
RewardGrids load_rewards_json(const fs::path& path);

// Binary (P5) PGM with the values linearly normalized to [0, 255];
// a constant grid renders as all zeros.
void save_pgm(const fs::path& path, const std::vector<double>& values, int height, int width);

// Drivable mask background with forecast polylines rasterized at 255.
void render_forecast_pgm(const fs::path& path, const SceneGrid& scene,
                         const std::vector<ForecastRecord>& records);

// Attention weights, one row per (sample, output step).
void save_attention_csv(const fs::path& path,
                        const std::vector<std::vector<Vec>>& per_sample_weights);

}  // namespace planmax::io
