#include "planmax/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "planmax/rng.hpp"

namespace planmax {

std::string template_name(TemplateKind k) {
  switch (k) {
    case TemplateKind::Corridor: return "corridor";
    case TemplateKind::TJunction: return "t_junction";
    case TemplateKind::FourWay: return "four_way";
    case TemplateKind::Ring: return "ring";
    case TemplateKind::ObstacleField: return "obstacle_field";
  }
  throw std::invalid_argument("template_name: unknown kind");
}

TemplateKind template_from_name(const std::string& name) {
  if (name == "corridor") return TemplateKind::Corridor;
  if (name == "t_junction") return TemplateKind::TJunction;
  if (name == "four_way") return TemplateKind::FourWay;
  if (name == "ring") return TemplateKind::Ring;
  if (name == "obstacle_field") return TemplateKind::ObstacleField;
  throw std::invalid_argument("unknown template: " + name);
}

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

struct SceneBuilder {
  SceneGrid grid;
  std::vector<std::uint8_t> mask;

  SceneBuilder(const SceneTemplate& t)
      : grid(SceneGrid::centered(t.height, t.width, t.cell_size, 3)),
        mask(static_cast<std::size_t>(t.height) * t.width, 0) {
    grid.channel_names = {"drivable", "obstacle", "exit"};
  }

  void drive(int r, int c) {
    if (grid.in_bounds(r, c)) mask[grid.index(r, c)] = 1;
  }
  void block(int r, int c) {
    if (grid.in_bounds(r, c)) mask[grid.index(r, c)] = 0;
  }
  void lane(int r, int c, double dir) {
    if (grid.in_bounds(r, c) && mask[grid.index(r, c)]) grid.lane_dir[grid.index(r, c)] = dir;
  }

  bool center_connected_to_edge() const {
    const auto [cr, cc] = grid.agent_cell();
    if (!mask[grid.index(cr, cc)]) return false;
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::deque<std::pair<int, int>> queue{{cr, cc}};
    seen[grid.index(cr, cc)] = 1;
    while (!queue.empty()) {
      const auto [r, c] = queue.front();
      queue.pop_front();
      if (r == 0 || r == grid.height - 1 || c == 0 || c == grid.width - 1) return true;
      const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int nr = r + dr[k], nc = c + dc[k];
        if (!grid.in_bounds(nr, nc)) continue;
        if (seen[grid.index(nr, nc)] || !mask[grid.index(nr, nc)]) continue;
        seen[grid.index(nr, nc)] = 1;
        queue.emplace_back(nr, nc);
      }
    }
    return false;
  }

  SceneGrid finish(bool with_lanes) {
    for (int r = 0; r < grid.height; ++r) {
      for (int c = 0; c < grid.width; ++c) {
        const int i = grid.index(r, c);
        grid.drivable[i] = mask[i];
        grid.channels[0][i] = mask[i] ? 1.0 : 0.0;
        grid.channels[1][i] = mask[i] ? 0.0 : 1.0;
        const bool edge = r == 0 || r == grid.height - 1 || c == 0 || c == grid.width - 1;
        grid.channels[2][i] = (mask[i] && edge) ? 1.0 : 0.0;
      }
    }
    grid.has_lane_dir = with_lanes;
    if (!with_lanes) grid.lane_dir.assign(grid.lane_dir.size(), std::nan(""));
    grid.validate();
    if (!center_connected_to_edge())
      throw std::runtime_error("generate_scene: center not connected to any edge");
    return grid;
  }
};

void build_obstacle_field(SceneBuilder& b, const SceneTemplate& t, std::uint64_t seed) {
  const auto [cr, cc] = b.grid.agent_cell();
  for (int attempt = 0; attempt < 32; ++attempt) {
    std::fill(b.mask.begin(), b.mask.end(), 1);
    std::mt19937_64 rng(derive_seed(seed, 0x0b5 + attempt));
    std::uniform_int_distribution<int> rr(0, t.height - 1), rc(0, t.width - 1);
    const int blobs = std::max(1, static_cast<int>(t.obstacle_fraction * t.height * t.width / 5));
    for (int i = 0; i < blobs; ++i) {
      const int r = rr(rng), c = rc(rng);
      if (std::abs(r - cr) <= 2 && std::abs(c - cc) <= 2) continue;  // keep the center open
      b.block(r, c);
      b.block(r - 1, c);
      b.block(r + 1, c);
      b.block(r, c - 1);
      b.block(r, c + 1);
    }
    if (b.center_connected_to_edge()) return;
  }
  throw std::runtime_error("generate_scene: obstacle field stayed disconnected");
}

}  // namespace

SceneGrid generate_scene(const SceneTemplate& tmpl, std::uint64_t seed) {
  if (tmpl.height < 9 || tmpl.width < 9)
    throw std::invalid_argument("generate_scene: grid too small for templates");
  if (tmpl.arm_halfwidth < 0 || 2 * tmpl.arm_halfwidth + 1 > std::min(tmpl.height, tmpl.width) / 2)
    throw std::invalid_argument("generate_scene: bad arm width");
  SceneBuilder b(tmpl);
  const auto [cr, cc] = b.grid.agent_cell();
  const int hw = tmpl.arm_halfwidth;
  std::mt19937_64 rng(derive_seed(seed, 0x9e0));

  switch (tmpl.kind) {
    case TemplateKind::Corridor: {
      for (int r = 0; r < tmpl.height; ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.drive(r, c);
      for (int r = 0; r < tmpl.height; ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.lane(r, c, 0.0);
      return b.finish(true);
    }
    case TemplateKind::TJunction:
    case TemplateKind::FourWay: {
      const int bar = cr + 4 + static_cast<int>(rng() % 5);
      const int bar_lo = std::min(bar - hw, tmpl.height - 1 - 2 * hw);
      const int bar_hi = bar_lo + 2 * hw;
      const int stem_top = tmpl.kind == TemplateKind::FourWay ? tmpl.height - 1 : bar_hi;
      for (int r = 0; r <= stem_top; ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.drive(r, c);
      for (int r = bar_lo; r <= bar_hi; ++r)
        for (int c = 0; c < tmpl.width; ++c) b.drive(r, c);
      for (int r = bar_lo; r <= bar_hi; ++r) {
        for (int c = 0; c < tmpl.width; ++c) b.lane(r, c, c < cc ? -kHalfPi : kHalfPi);
      }
      for (int r = 0; r <= stem_top; ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.lane(r, c, 0.0);
      return b.finish(true);
    }
    case TemplateKind::Ring: {
      const double radius = 6.0 + static_cast<double>(rng() % 3);
      const double band = hw + 0.8;
      for (int r = 0; r < tmpl.height; ++r) {
        for (int c = 0; c < tmpl.width; ++c) {
          const double dr = r - cr, dc = c - cc;
          if (std::abs(std::hypot(dr, dc) - radius) <= band) b.drive(r, c);
        }
      }
      const int rad = static_cast<int>(radius);
      for (int r = cr; r <= std::min(tmpl.height - 1, cr + rad); ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.drive(r, c);  // stem to the ring
      for (int r = cr + rad; r < tmpl.height; ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.drive(r, c);  // spoke +x
      for (int r = 0; r <= cr - rad; ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.drive(r, c);  // spoke -x
      for (int c = cc + rad; c < tmpl.width; ++c)
        for (int r = cr - hw; r <= cr + hw; ++r) b.drive(r, c);  // spoke +y
      for (int c = 0; c <= cc - rad; ++c)
        for (int r = cr - hw; r <= cr + hw; ++r) b.drive(r, c);  // spoke -y
      // Tangential (counter-clockwise) lanes on the ring, outward on spokes.
      for (int r = 0; r < tmpl.height; ++r) {
        for (int c = 0; c < tmpl.width; ++c) {
          if (!b.mask[b.grid.index(r, c)]) continue;
          const Vec2 p = b.grid.cell_center(r, c);
          b.lane(r, c, wrap_angle(std::atan2(p.y, p.x) + kHalfPi));
        }
      }
      for (int r = cr; r < tmpl.height; ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.lane(r, c, 0.0);
      for (int r = 0; r <= cr - rad; ++r)
        for (int c = cc - hw; c <= cc + hw; ++c) b.lane(r, c, std::numbers::pi);
      for (int c = cc + rad; c < tmpl.width; ++c)
        for (int r = cr - hw; r <= cr + hw; ++r) b.lane(r, c, kHalfPi);
      for (int c = 0; c <= cc - rad; ++c)
        for (int r = cr - hw; r <= cr + hw; ++r) b.lane(r, c, -kHalfPi);
      return b.finish(true);
    }
    case TemplateKind::ObstacleField: {
      build_obstacle_field(b, tmpl, seed);
      return b.finish(false);
    }
  }
  throw std::invalid_argument("generate_scene: unknown template kind");
}

RewardGrids true_rewards(const SceneGrid& scene, const TrueRewardSpec& spec) {
  RewardGrids r;
  r.height = scene.height;
  r.width = scene.width;
  const std::size_t cells = static_cast<std::size_t>(scene.height) * scene.width;
  r.r_path.resize(cells);
  r.r_goal.resize(cells);
  for (int row = 0; row < scene.height; ++row) {
    for (int col = 0; col < scene.width; ++col) {
      const int i = scene.index(row, col);
      r.r_path[i] = scene.drivable[i] ? spec.path_drivable : spec.path_blocked;
      const bool exit_ahead = scene.channels[2][i] > 0.5 && scene.cell_center(row, col).x >= 0.0;
      r.r_goal[i] = exit_ahead ? spec.goal_exit : spec.goal_other;
    }
  }
  r.validate();
  return r;
}

namespace {

double arc_at(double t, double v0, double a) { return v0 * t + 0.5 * a * t * t; }

}  // namespace

std::vector<SynthAgent> generate_tracks(const SceneGrid& scene, const RewardGrids& rewards,
                                        int n_agents, const TrackGenConfig& config,
                                        std::uint64_t seed) {
  const Policy policy = solve_inferred(rewards, config.horizon);
  const auto [cr, cc] = scene.agent_cell();
  const double sigma = config.noise_sigma_cells * scene.cell_size;

  std::vector<SynthAgent> agents;
  agents.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    SynthAgent agent;
    agent.sampled_plan =
        sample_plans(policy, path_state(cr, cc), 1,
                     derive_seed(seed, 0xa0000ULL + static_cast<std::uint64_t>(i)))[0];

    std::mt19937_64 rng(derive_seed(seed, 0xb0000ULL + static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    agent.speed0 = config.speed_min + (config.speed_max - config.speed_min) * u01(rng);
    const double t_span = std::max(config.t_h * config.dt, config.t_f * config.dt);
    const double a_lim = std::min(config.accel_max, (agent.speed0 - 0.1) / t_span);
    agent.accel = -a_lim + 2.0 * a_lim * u01(rng);

    Vec arcs(config.t_f);
    for (int k = 1; k <= config.t_f; ++k) arcs[k - 1] = arc_at(k * config.dt, agent.speed0,
                                                               agent.accel);
    const Trajectory ideal = spline_rollout(agent.sampled_plan, scene, arcs);
    for (const Vec2& p : ideal.points)
      agent.future_world.push_back({p.x + sigma * gauss(rng), p.y + sigma * gauss(rng)});

    for (int j = config.t_h; j >= 0; --j) {
      const double t = -j * config.dt;
      WorldSample s;
      s.t = t;
      s.x = arc_at(t, agent.speed0, agent.accel) + sigma * gauss(rng);
      s.y = sigma * gauss(rng);
      const double v = agent.speed0 + agent.accel * t;
      s.vx = v;
      s.vy = 0.0;
      s.ax = agent.accel;
      s.ay = 0.0;
      s.yaw_rate = 0.0;
      agent.track.samples.push_back(s);
    }
    agents.push_back(std::move(agent));
  }
  return agents;
}

SynthCase prepare_case(const SceneGrid& scene, const SynthAgent& agent, int scene_index,
                       const TrackGenConfig& config) {
  SynthCase out;
  out.scene_index = scene_index;
  const AgentFrame frame = build_agent_frame(agent.track);
  out.history = make_track_history(agent.track, frame, config.t_h, config.dt);
  for (const Vec2& p : agent.future_world) out.future.points.push_back(frame.to_agent(p));
  std::vector<Vec2> raster_input{{0.0, 0.0}};
  raster_input.insert(raster_input.end(), out.future.points.begin(), out.future.points.end());
  out.gt_plan = rasterize_track_to_plan(raster_input, scene).plan;
  out.sampled_plan = agent.sampled_plan;
  out.features = assemble_features(scene, out.history);
  return out;
}

namespace {

struct Split {
  std::vector<SceneGrid> scenes;
  std::vector<SynthCase> cases;
};

Split make_split(const BenchmarkConfig& config, std::uint64_t base, int scenes_per_template,
                 int agents_per_scene) {
  Split split;
  for (std::size_t ti = 0; ti < config.templates.size(); ++ti) {
    for (int s = 0; s < scenes_per_template; ++s) {
      SceneTemplate tmpl;
      tmpl.kind = config.templates[ti];
      tmpl.arm_halfwidth = config.arm_halfwidth;
      split.scenes.push_back(
          generate_scene(tmpl, derive_seed(config.seed, base + ti * 97 + s)));
    }
  }
  for (std::size_t si = 0; si < split.scenes.size(); ++si) {
    const SceneGrid& scene = split.scenes[si];
    const RewardGrids gt = true_rewards(scene, config.reward_spec);
    const auto agents = generate_tracks(scene, gt, agents_per_scene, config.tracks,
                                        derive_seed(config.seed, base + 0x500 + si));
    for (const SynthAgent& a : agents)
      split.cases.push_back(prepare_case(scene, a, static_cast<int>(si), config.tracks));
  }
  return split;
}

}  // namespace

BenchmarkArtifacts run_benchmark(const BenchmarkConfig& config, std::ostream* log) {
  auto note = [log](const std::string& msg) {
    if (log) (*log) << msg << "\n";
  };

  // Disjoint seed ranges keep train and test scenes structurally distinct.
  const Split train = make_split(config, 0x7a000000ULL, config.train_scenes_per_template,
                                 config.train_agents_per_scene);
  const Split test = make_split(config, 0x7e000000ULL, config.test_scenes_per_template,
                                config.test_agents_per_scene);
  note("generated " + std::to_string(train.cases.size()) + " train / " +
       std::to_string(test.cases.size()) + " test cases");

  std::vector<Demonstration> demos;
  for (const SynthCase& c : train.cases) demos.push_back({c.gt_plan, c.features, c.history});

  IrlTrainConfig irl_cfg;
  irl_cfg.horizon = config.tracks.horizon;
  irl_cfg.lr = config.irl_lr;
  irl_cfg.batch = config.irl_batch;
  irl_cfg.epochs = config.irl_epochs;
  irl_cfg.seed = derive_seed(config.seed, 0x17a1);
  std::vector<Demonstration> holdout;
  for (std::size_t i = 0; i < std::min<std::size_t>(10, test.cases.size()); ++i)
    holdout.push_back({test.cases[i].gt_plan, test.cases[i].features, test.cases[i].history});
  const IrlTrainResult irl = train_irl(demos, irl_cfg, holdout);
  note("irl: train nll " + std::to_string(irl.log.front().train_nll) + " -> " +
       std::to_string(irl.log.back().train_nll));

  std::vector<TrajGenExample> examples;
  for (const SynthCase& c : train.cases)
    examples.push_back({c.history, c.features, c.gt_plan, c.future});
  std::vector<Policy> policies;
  if (config.trajgen_finetune_steps > 0) {
    for (const SynthCase& c : train.cases)
      policies.push_back(
          solve_inferred(forward_rewards(c.features, irl.params), config.tracks.horizon));
  }
  TrajGenTrainConfig tg_cfg;
  tg_cfg.t_f = config.tracks.t_f;
  tg_cfg.dt = config.tracks.dt;
  tg_cfg.pretrain_steps = config.trajgen_pretrain_steps;
  tg_cfg.finetune_steps = config.trajgen_finetune_steps;
  tg_cfg.k = config.k_large;
  tg_cfg.lr = config.trajgen_lr;
  tg_cfg.seed = derive_seed(config.seed, 0x26a2);
  const TrajGenTrainResult tg = train_trajgen(examples, policies, tg_cfg);
  note("trajgen: loss " + std::to_string(tg.loss_log.front()) + " -> " +
       std::to_string(tg.loss_log.back()));

  BcTrainConfig bc_cfg;
  bc_cfg.lr = config.bc_lr;
  bc_cfg.epochs = config.bc_epochs;
  bc_cfg.seed = derive_seed(config.seed, 0x35b3);
  const BcTrainResult bc = train_bc(demos, bc_cfg);
  note("bc: loss " + std::to_string(bc.loss_log.front()) + " -> " +
       std::to_string(bc.loss_log.back()));

  // Evaluation on unseen scenes.
  const std::array<Variant, 3> sampled_variants{Variant::P2tIrl, Variant::P2tCs, Variant::P2tBc};
  std::map<Variant, std::vector<EvalCase>> cases_k5, cases_k10;
  for (std::size_t i = 0; i < test.cases.size(); ++i) {
    const SynthCase& c = test.cases[i];
    const SceneGrid& scene = test.scenes[c.scene_index];
    ForecastConfig fc;
    fc.m = config.m_eval;
    fc.horizon = config.tracks.horizon;
    fc.t_f = config.tracks.t_f;
    fc.dt = config.tracks.dt;
    fc.seed = derive_seed(config.seed, 0x44c4 + i);

    std::map<Variant, SampleSet> samples;
    samples[Variant::P2tIrl] =
        sample_forecasts_irl(scene, c.history, irl.params, tg.params, fc);
    samples[Variant::P2tCs] = sample_forecasts_cs(scene, c.history, irl.params, fc);
    samples[Variant::P2tBc] = sample_forecasts_bc(scene, c.history, bc.params, tg.params, fc);

    for (Variant v : sampled_variants) {
      cases_k5[v].push_back(
          {cluster_forecasts(samples[v], config.k_small, fc.seed), c.future, &scene, 0.0});
      cases_k10[v].push_back(
          {cluster_forecasts(samples[v], config.k_large, fc.seed), c.future, &scene, 0.0});
    }
    const ForecastSet cv = forecast_constant_velocity(c.history, fc);
    cases_k5[Variant::ConstantVelocity].push_back({cv, c.future, &scene, 0.0});
    cases_k10[Variant::ConstantVelocity].push_back({cv, c.future, &scene, 0.0});
  }

  BenchmarkArtifacts out;
  out.reward_params = irl.params;
  out.trajgen_params = tg.params;
  out.bc_params = bc.params;
  for (Variant v : {Variant::P2tIrl, Variant::P2tCs, Variant::P2tBc,
                    Variant::ConstantVelocity}) {
    out.report.push_back(aggregate_metrics(v, cases_k5[v], cases_k10[v]));
    note(variant_name(v) + ": minade_5 " + std::to_string(out.report.back().minade_5) +
         ", offroad " + std::to_string(out.report.back().offroad));
  }
  return out;
}

}  // namespace planmax
