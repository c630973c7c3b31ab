#include "planmax/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace planmax {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

SceneGrid SceneGrid::centered(int height, int width, double cell_size, int num_channels) {
  SceneGrid g;
  g.height = height;
  g.width = width;
  g.cell_size = cell_size;
  g.x_min = -0.5 * height * cell_size;
  g.y_min = -0.5 * width * cell_size;
  g.channels.assign(num_channels, std::vector<double>(height * width, 0.0));
  for (int i = 0; i < num_channels; ++i) g.channel_names.push_back("ch" + std::to_string(i));
  g.drivable.assign(height * width, 1);
  g.lane_dir.assign(height * width, std::nan(""));
  return g;
}

SceneGrid SceneGrid::forward_shifted(int height, int width, double cell_size, int num_channels) {
  SceneGrid g = centered(height, width, cell_size, num_channels);
  // 80% of the forward extent ahead of the agent, 20% behind.
  g.x_min = -0.2 * height * cell_size;
  return g;
}

void SceneGrid::validate() const {
  if (height < 1 || width < 1) throw std::invalid_argument("SceneGrid: empty grid");
  if (cell_size <= 0.0) throw std::invalid_argument("SceneGrid: cell_size must be positive");
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (channels.size() != channel_names.size())
    throw std::invalid_argument("SceneGrid: channel/name count mismatch");
  for (const auto& ch : channels) {
    if (ch.size() != n) throw std::invalid_argument("SceneGrid: channel size mismatch");
    for (double v : ch)
      if (!std::isfinite(v)) throw std::invalid_argument("SceneGrid: non-finite channel value");
  }
  if (drivable.size() != n) throw std::invalid_argument("SceneGrid: drivable size mismatch");
  if (lane_dir.size() != n) throw std::invalid_argument("SceneGrid: lane_dir size mismatch");
  for (double a : lane_dir) {
    if (std::isnan(a)) continue;
    if (a <= -std::numbers::pi - 1e-12 || a > std::numbers::pi + 1e-12)
      throw std::invalid_argument("SceneGrid: lane_dir out of (-pi, pi]");
  }
}

void TrackHistory::validate() const {
  if (samples.empty()) throw std::invalid_argument("TrackHistory: empty");
  if (samples.back().t != 0.0) throw std::invalid_argument("TrackHistory: missing t=0 sample");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].speed < 0.0) throw std::invalid_argument("TrackHistory: negative speed");
    if (i > 0 && samples[i].t <= samples[i - 1].t)
      throw std::invalid_argument("TrackHistory: non-chronological samples");
  }
}

void Plan::validate(const SceneGrid& grid) const {
  if (states.size() < 2) throw std::invalid_argument("Plan: needs at least path+goal");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const GridState& s = states[i];
    if (!grid.in_bounds(s.row, s.col)) throw std::invalid_argument("Plan: state out of bounds");
    const bool last = (i + 1 == states.size());
    if (last != (s.kind == StateKind::Goal))
      throw std::invalid_argument("Plan: goal state must be exactly the final state");
  }
  const GridState& g = states.back();
  const GridState& p = states[states.size() - 2];
  if (g.row != p.row || g.col != p.col)
    throw std::invalid_argument("Plan: goal not at final path cell");
  for (std::size_t i = 0; i + 2 < states.size(); ++i) {
    const int dr = std::abs(states[i + 1].row - states[i].row);
    const int dc = std::abs(states[i + 1].col - states[i].col);
    if (dr + dc != 1) throw std::invalid_argument("Plan: path states not 4-adjacent");
  }
}

AgentFrame build_agent_frame(const WorldTrack& track) {
  if (track.samples.empty()) throw std::invalid_argument("build_agent_frame: empty track");
  const WorldSample& last = track.samples.back();
  AgentFrame frame;
  frame.origin = {last.x, last.y};
  const double speed = std::hypot(last.vx, last.vy);
  if (speed >= 0.1) {
    frame.heading = std::atan2(last.vy, last.vx);
    return frame;
  }
  const WorldSample& first = track.samples.front();
  const Vec2 disp{last.x - first.x, last.y - first.y};
  frame.heading = disp.norm() >= 0.1 ? std::atan2(disp.y, disp.x) : 0.0;
  return frame;
}

namespace {

WorldSample interpolate_at(const std::vector<WorldSample>& samples, double t) {
  if (t <= samples.front().t) return samples.front();
  if (t >= samples.back().t) return samples.back();
  auto hi = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const WorldSample& s, double v) { return s.t < v; });
  auto lo = hi - 1;
  const double span = hi->t - lo->t;
  const double w = span > 0.0 ? (t - lo->t) / span : 0.0;
  WorldSample out;
  out.t = t;
  out.x = lo->x + w * (hi->x - lo->x);
  out.y = lo->y + w * (hi->y - lo->y);
  out.vx = lo->vx + w * (hi->vx - lo->vx);
  out.vy = lo->vy + w * (hi->vy - lo->vy);
  out.ax = lo->ax + w * (hi->ax - lo->ax);
  out.ay = lo->ay + w * (hi->ay - lo->ay);
  out.yaw_rate = lo->yaw_rate + w * (hi->yaw_rate - lo->yaw_rate);
  return out;
}

}  // namespace

TrackHistory make_track_history(const WorldTrack& track, const AgentFrame& frame,
                                int history_steps, double dt) {
  if (track.samples.empty()) throw std::invalid_argument("make_track_history: empty track");
  if (history_steps < 0 || dt <= 0.0)
    throw std::invalid_argument("make_track_history: bad sampling parameters");
  TrackHistory hist;
  for (int k = history_steps; k >= 0; --k) {
    const double t = (k == 0) ? 0.0 : -k * dt;
    const WorldSample w = interpolate_at(track.samples, t);
    TrackSample s;
    s.t = t;
    s.pos = frame.to_agent({w.x, w.y});
    s.speed = std::hypot(w.vx, w.vy);
    // Tangential acceleration where the velocity direction is well defined.
    if (s.speed >= 0.1) {
      s.accel = (w.ax * w.vx + w.ay * w.vy) / s.speed;
    } else {
      s.accel = std::hypot(w.ax, w.ay);
    }
    s.yaw_rate = w.yaw_rate;
    hist.samples.push_back(s);
  }
  hist.validate();
  return hist;
}

RasterizedPlan rasterize_track_to_plan(const std::vector<Vec2>& points, const SceneGrid& grid) {
  if (points.empty()) throw std::invalid_argument("rasterize_track_to_plan: no points");
  const auto [ar, ac] = grid.agent_cell();
  const auto [r0, c0] = grid.cell_of(points.front());
  if (r0 != ar || c0 != ac)
    throw std::invalid_argument("rasterize_track_to_plan: track must start in the agent cell");

  RasterizedPlan out;
  std::vector<std::pair<int, int>> cells{{r0, c0}};
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto [r, c] = grid.cell_of(points[i]);
    if (!grid.in_bounds(r, c)) {
      out.truncated = true;
      break;
    }
    auto [pr, pc] = cells.back();
    if (r == pr && c == pc) continue;
    // Shortest 4-connected interpolation, row moves before column moves.
    while (pr != r) {
      pr += (r > pr) ? 1 : -1;
      cells.emplace_back(pr, pc);
    }
    while (pc != c) {
      pc += (c > pc) ? 1 : -1;
      cells.emplace_back(pr, pc);
    }
  }
  for (auto [r, c] : cells) out.plan.states.push_back(path_state(r, c));
  out.plan.states.push_back(goal_state(cells.back().first, cells.back().second));
  return out;
}

}  // namespace planmax
