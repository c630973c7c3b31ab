#include "planmax/features.hpp"

namespace planmax {

FeatureGrid assemble_features(const SceneGrid& grid, const TrackHistory& track) {
  grid.validate();
  track.validate();
  const int num_ch = static_cast<int>(grid.channels.size());
  FeatureGrid f;
  f.height = grid.height;
  f.width = grid.width;
  f.scene_dim = 2 * num_ch;
  f.feature_dim = 2 * num_ch + 3;
  f.data.assign(static_cast<std::size_t>(f.height) * f.width * f.feature_dim, 0.0);
  f.occupancy.assign(static_cast<std::size_t>(f.height) * f.width * 3, 0.0);

  const double speed = track.current().speed;
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      double* out = f.at(r, c);
      for (int ch = 0; ch < num_ch; ++ch) out[ch] = grid.channels[ch][grid.index(r, c)];
      for (int ch = 0; ch < num_ch; ++ch) {
        double sum = 0.0;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc)
            if (grid.in_bounds(r + dr, c + dc)) sum += grid.channels[ch][grid.index(r + dr, c + dc)];
        out[num_ch + ch] = sum / 9.0;
      }
      out[2 * num_ch] = speed;
      const Vec2 center = grid.cell_center(r, c);
      out[2 * num_ch + 1] = center.x;
      out[2 * num_ch + 2] = center.y;
    }
  }
  return f;
}

void add_agent_occupancy(FeatureGrid& features, const SceneGrid& grid, Vec2 pos_agent_frame,
                         double speed, double accel, double yaw_rate) {
  const auto [r, c] = grid.cell_of(pos_agent_frame);
  if (!grid.in_bounds(r, c)) return;
  double* occ = &features.occupancy[(static_cast<std::size_t>(r) * grid.width + c) * 3];
  occ[0] = speed;
  occ[1] = accel;
  occ[2] = yaw_rate;
}

}  // namespace planmax
