#include <doctest.h>

#include <numbers>
#include <random>

#include "planmax/features.hpp"

using namespace planmax;

namespace {

TrackHistory history_with_speed(double speed) {
  TrackHistory h;
  for (int k = 4; k >= 0; --k) {
    TrackSample s;
    s.t = -0.5 * k;
    s.pos = {-speed * 0.5 * k, 0.0};
    s.speed = speed;
    h.samples.push_back(s);
  }
  return h;
}

}  // namespace

TEST_CASE("uniform channels, zero speed: means equal raw values away from borders") {
  SceneGrid g = SceneGrid::centered(9, 9, 1.0, 2);
  for (auto& ch : g.channels) ch.assign(81, 0.5);
  const FeatureGrid f = assemble_features(g, history_with_speed(0.0));
  CHECK(f.feature_dim == 7);
  CHECK(f.scene_dim == 4);
  const double* mid = f.at(4, 4);
  CHECK(mid[0] == doctest::Approx(0.5));
  CHECK(mid[2] == doctest::Approx(0.5));  // 3x3 mean, interior
  CHECK(mid[4] == 0.0);                   // speed plane
  const double* corner = f.at(0, 0);
  CHECK(corner[2] == doctest::Approx(0.5 * 4.0 / 9.0));  // zero padding at the corner
}

TEST_CASE("center cell coordinate features are (0, 0)") {
  SceneGrid g = SceneGrid::centered(25, 25, 2.0, 1);
  const FeatureGrid f = assemble_features(g, history_with_speed(1.0));
  const auto [r, c] = g.agent_cell();
  const double* v = f.at(r, c);
  CHECK(v[f.feature_dim - 2] == doctest::Approx(0.0));
  CHECK(v[f.feature_dim - 1] == doctest::Approx(0.0));
  CHECK(v[f.scene_dim] == doctest::Approx(1.0));  // replicated speed
}

TEST_CASE("single obstacle cell: 3x3 mean via direct window sum") {
  // Oracle: mean over the 3x3 window centered at (0,1) with zero padding.
  // Only (0,0) is nonzero, so the mean is value/9.
  SceneGrid g = SceneGrid::centered(25, 25, 2.0, 1);
  const double value = 0.8;
  g.channels[0][g.index(0, 0)] = value;
  double window_sum = 0.0;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      if (g.in_bounds(0 + dr, 1 + dc)) window_sum += g.channels[0][g.index(0 + dr, 1 + dc)];
  const double expected = window_sum / 9.0;
  CHECK(expected == doctest::Approx(value / 9.0));

  const FeatureGrid f = assemble_features(g, history_with_speed(0.0));
  CHECK(f.at(0, 1)[1] == doctest::Approx(expected));
}

TEST_CASE("features only depend on agent-frame quantities: rigid world motion is invisible") {
  SceneGrid g = SceneGrid::centered(11, 11, 2.0, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& ch : g.channels)
    for (auto& v : ch) v = u(rng);

  WorldTrack base;
  for (int k = 4; k >= 0; --k) {
    WorldSample s;
    s.t = -0.5 * k;
    s.x = -0.9 * k;
    s.y = 0.05 * k;
    s.vx = 1.8;
    s.vy = 0.1;
    s.ax = 0.2;
    s.ay = 0.0;
    s.yaw_rate = 0.01;
    base.samples.push_back(s);
  }
  const AgentFrame f0 = build_agent_frame(base);
  const FeatureGrid feats0 = assemble_features(g, make_track_history(base, f0, 4, 0.5));

  const double angle = 1.234;
  const Vec2 shift{17.0, -4.5};
  WorldTrack moved = base;
  for (WorldSample& s : moved.samples) {
    const double c = std::cos(angle), sn = std::sin(angle);
    const double x = s.x, y = s.y, vx = s.vx, vy = s.vy, ax = s.ax, ay = s.ay;
    s.x = c * x - sn * y + shift.x;
    s.y = sn * x + c * y + shift.y;
    s.vx = c * vx - sn * vy;
    s.vy = sn * vx + c * vy;
    s.ax = c * ax - sn * ay;
    s.ay = sn * ax + c * ay;
  }
  const AgentFrame f1 = build_agent_frame(moved);
  const FeatureGrid feats1 = assemble_features(g, make_track_history(moved, f1, 4, 0.5));

  REQUIRE(feats0.data.size() == feats1.data.size());
  for (std::size_t i = 0; i < feats0.data.size(); ++i)
    CHECK(feats0.data[i] == doctest::Approx(feats1.data[i]).epsilon(1e-12));
}

TEST_CASE("pure translation leaves the feature grid bit-for-bit unchanged") {
  SceneGrid g = SceneGrid::centered(11, 11, 2.0, 2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& ch : g.channels)
    for (auto& v : ch) v = u(rng);

  WorldTrack base;
  for (int k = 4; k >= 0; --k) {
    WorldSample s;
    s.t = -0.5 * k;
    s.x = -0.7 * k;
    s.y = 0.3 * k;
    s.vx = 1.4;
    s.vy = -0.6;
    base.samples.push_back(s);
  }
  WorldTrack moved = base;
  for (WorldSample& s : moved.samples) {
    s.x += 123.25;
    s.y += -41.75;
  }
  const FeatureGrid a =
      assemble_features(g, make_track_history(base, build_agent_frame(base), 4, 0.5));
  const FeatureGrid b =
      assemble_features(g, make_track_history(moved, build_agent_frame(moved), 4, 0.5));
  CHECK(a.data == b.data);
}

TEST_CASE("agent occupancy stamps the containing cell") {
  SceneGrid g = SceneGrid::centered(25, 25, 2.0, 1);
  FeatureGrid f = assemble_features(g, history_with_speed(1.0));
  add_agent_occupancy(f, g, {4.0, -6.0}, 2.5, 0.3, -0.1);
  const auto [r, c] = g.cell_of({4.0, -6.0});
  const double* occ = f.occupancy_at(r, c);
  CHECK(occ[0] == 2.5);
  CHECK(occ[1] == 0.3);
  CHECK(occ[2] == -0.1);
  add_agent_occupancy(f, g, {500.0, 0.0}, 1.0, 0.0, 0.0);  // silently ignored
}
