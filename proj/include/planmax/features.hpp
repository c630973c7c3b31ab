#pragma once

#include <vector>

#include "planmax/geometry.hpp"
#include "planmax/linalg.hpp"

namespace planmax {

// Per-cell feature tensor consumed by the reward heads, the behavior-cloning
// policy and the plan encoder. Layout per cell:
//   [0, C)      raw semantic channels
//   [C, 2C)     3x3 neighborhood mean of each channel, zero padded
//   [2C]        agent speed at t=0, replicated
//   [2C+1, 2C+2] agent-frame x, y of the cell center
// The first 2C entries are the scene block the plan encoder embeds.
struct FeatureGrid {
  int height = 0;
  int width = 0;
  int feature_dim = 0;
  int scene_dim = 0;
  std::vector<double> data;  // (r*width + c) * feature_dim

  // Surrounding-agent channels (speed, accel, yaw rate at each cell);
  // all-zero unless populated from neighbor tracks.
  std::vector<double> occupancy;  // (r*width + c) * 3

  const double* at(int r, int c) const { return &data[(r * width + c) * feature_dim]; }
  double* at(int r, int c) { return &data[(r * width + c) * feature_dim]; }
  const double* occupancy_at(int r, int c) const { return &occupancy[(r * width + c) * 3]; }

  Vec cell_features(int r, int c) const {
    return Vec(at(r, c), at(r, c) + feature_dim);
  }
};

FeatureGrid assemble_features(const SceneGrid& grid, const TrackHistory& track);

// Stamp a neighbor agent's state into the occupancy channels of the cell
// containing it (agent-frame position at t=0). Out-of-grid neighbors are
// ignored.
void add_agent_occupancy(FeatureGrid& features, const SceneGrid& grid, Vec2 pos_agent_frame,
                         double speed, double accel, double yaw_rate);

}  // namespace planmax
