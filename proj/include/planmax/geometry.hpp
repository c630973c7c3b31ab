#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace planmax {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  double norm() const { return std::hypot(x, y); }
  auto operator<=>(const Vec2&) const = default;
};

// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

// Agent-centric frame: origin at the agent position at the prediction
// instant, x-axis along its direction of motion.
struct AgentFrame {
  Vec2 origin;
  double heading = 0.0;

  Vec2 to_agent(Vec2 world) const {
    const double c = std::cos(heading), s = std::sin(heading);
    const Vec2 d = world - origin;
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
  }
  Vec2 to_world(Vec2 agent) const {
    const double c = std::cos(heading), s = std::sin(heading);
    return {origin.x + c * agent.x - s * agent.y, origin.y + s * agent.x + c * agent.y};
  }
  double heading_to_agent(double world_heading) const { return wrap_angle(world_heading - heading); }
};

// Rasterized scene in the agent frame. Rows index the forward (x) axis,
// columns the lateral (y) axis; cell (r, c) covers
//   x in [x_min + r*cell_size, x_min + (r+1)*cell_size)
//   y in [y_min + c*cell_size, y_min + (c+1)*cell_size)
// Boundary points belong to the cell of their floor index.
struct SceneGrid {
  int height = 0;  // rows
  int width = 0;   // cols
  double cell_size = 1.0;
  double x_min = 0.0;
  double y_min = 0.0;
  std::vector<std::string> channel_names;
  // channels[ch][r*width + c], values in [0, 1]
  std::vector<std::vector<double>> channels;
  std::vector<std::uint8_t> drivable;  // r*width + c, 0/1
  // lane direction of travel in radians, NaN where undefined
  std::vector<double> lane_dir;
  bool has_lane_dir = false;

  static SceneGrid centered(int height, int width, double cell_size, int num_channels);
  // 50m x 50m layout used for vehicles: 40m ahead, 10m behind, +/-25m lateral.
  static SceneGrid forward_shifted(int height, int width, double cell_size, int num_channels);

  int index(int r, int c) const { return r * width + c; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
  Vec2 cell_center(int r, int c) const {
    return {x_min + (r + 0.5) * cell_size, y_min + (c + 0.5) * cell_size};
  }
  // Containing cell of an agent-frame point; may be out of bounds.
  std::pair<int, int> cell_of(Vec2 p) const {
    return {static_cast<int>(std::floor((p.x - x_min) / cell_size)),
            static_cast<int>(std::floor((p.y - y_min) / cell_size))};
  }
  // Cell containing the agent-frame origin (the initial state of the MDP).
  std::pair<int, int> agent_cell() const { return cell_of({0.0, 0.0}); }

  void validate() const;
};

// One raw world-frame observation of an agent.
struct WorldSample {
  double t = 0.0;
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;
  double ax = 0.0, ay = 0.0;
  double yaw_rate = 0.0;
};

// Chronological world-frame track snippet, last sample at the prediction
// instant t = 0.
struct WorldTrack {
  std::vector<WorldSample> samples;
};

struct TrackSample {
  double t = 0.0;
  Vec2 pos;          // agent frame, meters
  double speed = 0.0;      // |v|, m/s
  double accel = 0.0;      // signed tangential acceleration, m/s^2
  double yaw_rate = 0.0;   // rad/s
};

// Fixed-step history in the agent frame, t = -T_h .. 0.
struct TrackHistory {
  std::vector<TrackSample> samples;

  const TrackSample& current() const { return samples.back(); }
  void validate() const;
};

enum class StateKind : std::uint8_t { Path = 0, Goal = 1 };

struct GridState {
  StateKind kind = StateKind::Path;
  int row = 0;
  int col = 0;
  auto operator<=>(const GridState&) const = default;
};

inline GridState path_state(int r, int c) { return {StateKind::Path, r, c}; }
inline GridState goal_state(int r, int c) { return {StateKind::Goal, r, c}; }

// Grid-state sequence: path states connected by 4-adjacent moves, closed by
// the goal state at the final cell.
struct Plan {
  std::vector<GridState> states;

  std::size_t num_actions() const { return states.empty() ? 0 : states.size() - 1; }
  const GridState& goal() const { return states.back(); }
  void validate(const SceneGrid& grid) const;
  auto operator<=>(const Plan&) const = default;
};

// Heading from instantaneous velocity at t = 0; near-stationary agents
// (speed < 0.1 m/s) fall back to net displacement, then to heading 0.
AgentFrame build_agent_frame(const WorldTrack& track);

// Resample/transform a world track into the fixed-step agent-frame history
// the models consume. history_steps is T_h (samples at t = -T_h*dt .. 0).
TrackHistory make_track_history(const WorldTrack& track, const AgentFrame& frame,
                                int history_steps, double dt);

struct RasterizedPlan {
  Plan plan;
  bool truncated = false;  // some input points fell outside the grid
};

// Convert agent-frame future points to a demonstration plan. Consecutive
// distinct cells are joined by the shortest 4-connected interpolation, row
// moves before column moves; duplicates collapse; a goal state closes the
// plan. Points outside the grid truncate the demonstration.
RasterizedPlan rasterize_track_to_plan(const std::vector<Vec2>& points, const SceneGrid& grid);

}  // namespace planmax
