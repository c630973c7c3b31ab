// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "planmax/forecast.hpp"
#include "planmax/io.hpp"
#include "planmax/irl.hpp"
#include "planmax/metrics.hpp"
#include "planmax/synth.hpp"
#include "planmax/trajgen.hpp"

using namespace planmax;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.str().empty()) detail << "; ";
      detail << what;
    }
  }
};

RewardGrids random_rewards(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 0.0);
  RewardGrids r;
  r.height = h;
  r.width = w;
  for (int i = 0; i < h * w; ++i) {
    r.r_path.push_back(u(rng));
    r.r_goal.push_back(u(rng));
  }
  return r;
}

FeatureGrid features_for(const SceneGrid& g, double speed) {
  TrackHistory hist;
  TrackSample s;
  s.t = 0.0;
  s.speed = speed;
  hist.samples.push_back(s);
  return assemble_features(g, hist);
}

TrackHistory forward_history(double speed, int steps, double dt, double accel) {
  TrackHistory h;
  for (int k = steps; k >= 0; --k) {
    TrackSample s;
    s.t = -k * dt;
    s.pos = {-speed * k * dt, 0.0};
    s.speed = std::max(0.0, speed - accel * k * dt);
    s.accel = accel;
    h.samples.push_back(s);
  }
  return h;
}

double norm_rel_err(const Vec& a, const Vec& b) {
  double err2 = 0.0, ref2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err2 += (a[i] - b[i]) * (a[i] - b[i]);
    ref2 += std::max(a[i] * a[i], b[i] * b[i]);
  }
  return std::sqrt(err2) / std::max(1.0, std::sqrt(ref2));
}

// ---------------------------------------------------------------------------
// criterion 1: policy/enumeration equivalence on >= 50 random instances
bool criterion_maxent_correctness(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 4), hor(1, 8);
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    const int h = dim(rng), w = dim(rng), n = hor(rng);
    const RewardGrids r = random_rewards(h, w, rng);
    const GridState s0 = path_state(static_cast<int>(rng() % h), static_cast<int>(rng() % w));
    const Policy p = solve_inferred(r, n);
    double total = 0.0;
    for (const auto& [plan, prob] : enumerate_distribution(r, n, s0)) {
      worst = std::max(worst, std::abs(std::exp(p.plan_log_prob(plan)) - prob));
      total += prob;
    }
    c.expect(std::abs(total - 1.0) < 1e-9, "enumeration mass != 1");
  }
  c.expect(worst < 1e-9, "max per-plan deviation " + std::to_string(worst));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 10.0, "runtime " + std::to_string(secs) + "s");
  std::ostringstream os;
  os << "50 instances, max |analytic - enumerated| = " << worst << ", " << secs << " s";
  detail = c.ok ? os.str() : c.detail.str();
  return c.ok;
}

// criterion 2: SVF termination and per-step conservation at 25x25, N=50
bool criterion_svf_conservation(std::string& detail) {
  Check c;
  std::mt19937_64 rng(202);
  double worst_term = 0.0, worst_cons = 0.0;
  for (int instance = 0; instance < 5; ++instance) {
    const RewardGrids r = random_rewards(25, 25, rng);
    const Policy p = solve_inferred(r, 50);
    const Svf d = propagate_inferred(p, path_state(12, 12));
    worst_term = std::max(worst_term, std::abs(d.goal_mass() - 1.0));
    for (int t = 0; t < 50; ++t) {
      double path_next = 0.0, goal_next = 0.0;
      for (double v : d.path_step[t + 1]) path_next += v;
      for (double v : d.goal_step[t + 1]) goal_next += v;
      worst_cons =
          std::max(worst_cons, std::abs(path_next + goal_next - d.path_step_mass(t)));
    }
  }
  c.expect(worst_term < 1e-9, "termination residual " + std::to_string(worst_term));
  c.expect(worst_cons < 1e-12, "conservation residual " + std::to_string(worst_cons));
  std::ostringstream os;
  os << "termination residual " << worst_term << ", step conservation residual " << worst_cons;
  detail = c.ok ? os.str() : c.detail.str();
  return c.ok;
}

// criterion 3: Eq.(3) gradient vs finite differences of the enumerated
// log-likelihood, relative error < 1e-5, >= 25 instances
bool criterion_irl_gradient(std::string& detail) {
  Check c;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int instance = 0; instance < 25; ++instance) {
    SceneGrid g = SceneGrid::centered(3, 3, 1.0, 1);
    for (auto& v : g.channels[0]) v = u(rng);
    const int horizon = 4;
    Demonstration demo;
    demo.features = features_for(g, 0.5 + u(rng));
    const RewardGrids probe = forward_rewards(
        demo.features, RewardParams::init(demo.features.feature_dim, 32, rng()));
    demo.plan = sample_plans(solve_inferred(probe, horizon), path_state(1, 1), 1, rng())[0];
    RewardParams params = RewardParams::init(demo.features.feature_dim, 32, rng());

    const Vec analytic = irl_gradient(demo, params, horizon);
    auto log_lik = [&](const Vec& theta) {
      RewardParams q = params;
      q.unflatten(theta);
      const auto dist =
          enumerate_distribution(forward_rewards(demo.features, q), horizon,
                                 demo.plan.states.front());
      return std::log(dist.at(demo.plan));
    };
    const Vec theta = params.flatten();
    Vec fd(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      Vec plus = theta, minus = theta;
      plus[i] += 1e-5;
      minus[i] -= 1e-5;
      fd[i] = (log_lik(plus) - log_lik(minus)) / 2e-5;
    }
    worst = std::max(worst, norm_rel_err(analytic, fd));
  }
  c.expect(worst < 1e-5, "worst relative error " + std::to_string(worst));
  std::ostringstream os;
  os << "25 instances, worst relative error " << worst;
  detail = c.ok ? os.str() : c.detail.str();
  return c.ok;
}

// criterion 4: reward-head and full-BPTT gradients vs finite differences
bool criterion_backprop(std::string& detail) {
  Check c;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double worst_reward = 0.0;
  for (int instance = 0; instance < 10; ++instance) {
    SceneGrid g = SceneGrid::centered(3, 3, 1.0, 1);
    for (auto& v : g.channels[0]) v = 0.5 + 0.5 * u(rng);
    const FeatureGrid f = features_for(g, 1.0 + u(rng));
    RewardParams p = RewardParams::init(f.feature_dim, 32, rng());
    std::vector<double> up_path(9), up_goal(9);
    for (int i = 0; i < 9; ++i) {
      up_path[i] = u(rng);
      up_goal[i] = u(rng);
    }
    const Vec analytic = backward_rewards(f, p, up_path, up_goal);
    auto objective = [&](const Vec& theta) {
      RewardParams q = p;
      q.unflatten(theta);
      const RewardGrids r = forward_rewards(f, q);
      double acc = 0.0;
      for (int i = 0; i < 9; ++i) acc += up_path[i] * r.r_path[i] + up_goal[i] * r.r_goal[i];
      return acc;
    };
    const Vec theta = p.flatten();
    Vec fd(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      Vec plus = theta, minus = theta;
      plus[i] += 1e-5;
      minus[i] -= 1e-5;
      fd[i] = (objective(plus) - objective(minus)) / 2e-5;
    }
    worst_reward = std::max(worst_reward, norm_rel_err(analytic, fd));
  }
  c.expect(worst_reward < 1e-6, "reward-head relative error " + std::to_string(worst_reward));

  double worst_bptt = 0.0;
  for (int instance = 0; instance < 10; ++instance) {
    const SceneGrid g = SceneGrid::centered(7, 7, 1.0, 1);
    const FeatureGrid f = features_for(g, 1.0 + 0.5 * u(rng));
    TrajGenParams p = TrajGenParams::zeros(f.scene_dim);
    {
      std::mt19937_64 prng(rng());
      std::uniform_real_distribution<double> pu(-0.4, 0.4);
      Vec theta = p.flatten();
      for (double& v : theta) v = pu(prng);
      p.unflatten(theta);
    }
    const TrackHistory track = forward_history(1.0 + 0.4 * u(rng), 3, 0.5, 0.2 * u(rng));
    Plan plan;
    plan.states = {path_state(3, 3), path_state(4, 3), path_state(4, 4), path_state(5, 4),
                   goal_state(5, 4)};
    Trajectory gt;
    const int t_f = 3;
    for (int k = 1; k <= t_f; ++k) gt.points.push_back({0.5 * k + 0.2 * u(rng), 0.3 * u(rng)});

    const TrajGenRun run = run_generator(track, plan, f, p, t_f);
    TrajGenParams grads = TrajGenParams::zeros(f.scene_dim);
    backprop_generator(run, p, ade_gradient(run.out.trajectory, gt), grads);
    const Vec analytic = grads.flatten();
    auto loss = [&](const Vec& theta) {
      TrajGenParams q = p;
      q.unflatten(theta);
      return ade(run_generator(track, plan, f, q, t_f).out.trajectory, gt);
    };
    const Vec theta = p.flatten();
    Vec fd(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      Vec plus = theta, minus = theta;
      plus[i] += 1e-4;
      minus[i] -= 1e-4;
      fd[i] = (loss(plus) - loss(minus)) / 2e-4;
    }
    worst_bptt = std::max(worst_bptt, norm_rel_err(analytic, fd));
  }
  c.expect(worst_bptt < 1e-3, "BPTT relative error " + std::to_string(worst_bptt));
  std::ostringstream os;
  os << "reward-head err " << worst_reward << ", full-BPTT err " << worst_bptt
     << " (10 instances each)";
  detail = c.ok ? os.str() : c.detail.str();
  return c.ok;
}

// criterion 5: sampling matches analytic probabilities within 3-sigma
bool criterion_sampling_fidelity(std::string& detail) {
  Check c;
  std::mt19937_64 rng(505);
  const int samples = 100000;
  int checked = 0;
  for (int instance = 0; instance < 3; ++instance) {
    const int h = 2, w = 2 + instance % 2, n = 4;
    const RewardGrids r = random_rewards(h, w, rng);
    const GridState s0 = path_state(0, 0);
    const Policy p = solve_inferred(r, n);
    const auto dist = enumerate_distribution(r, n, s0);
    std::map<Plan, int> counts;
    for (const Plan& plan : sample_plans(p, s0, samples, 600 + instance)) counts[plan] += 1;
    for (const auto& [plan, prob] : dist) {
      if (prob < 1e-4) continue;  // 3-sigma bound is meaningless below ~1 count
      const double freq = counts.count(plan) ? counts.at(plan) / double(samples) : 0.0;
      const double sigma = std::sqrt(prob * (1.0 - prob) / samples);
      c.expect(std::abs(freq - prob) <= 3.0 * sigma,
               "plan freq " + std::to_string(freq) + " vs prob " + std::to_string(prob));
      ++checked;
    }
  }
  std::ostringstream os;
  os << checked << " plan frequencies within 3-sigma of Eq.(1) at M=100000";
  detail = c.ok ? os.str() : c.detail.str();
  return c.ok;
}

// Shared artifacts for criteria 6 and 7.
struct TJunctionStudy {
  std::vector<SceneGrid> scenes;          // train scenes
  SceneGrid eval_scene;                   // unseen seed
  std::vector<SynthCase> train_cases;
  std::vector<SynthCase> eval_cases;
  TrackGenConfig tracks;
  IrlTrainResult irl;
  TrajGenTrainResult trajgen;
  bool built = false;
};

TJunctionStudy& tjunction_study() {
  static TJunctionStudy study;
  if (study.built) return study;
  SceneTemplate tmpl;
  tmpl.kind = TemplateKind::TJunction;
  tmpl.arm_halfwidth = 1;
  study.tracks = TrackGenConfig{};

  for (std::uint64_t seed : {1001ULL, 1002ULL}) {
    study.scenes.push_back(generate_scene(tmpl, seed));
    const SceneGrid& scene = study.scenes.back();
    const auto agents = generate_tracks(scene, true_rewards(scene), 60, study.tracks, seed);
    for (const SynthAgent& a : agents)
      study.train_cases.push_back(
          prepare_case(scene, a, static_cast<int>(study.scenes.size()) - 1, study.tracks));
  }
  study.eval_scene = generate_scene(tmpl, 2001);
  for (const SynthAgent& a :
       generate_tracks(study.eval_scene, true_rewards(study.eval_scene), 20, study.tracks, 2001))
    study.eval_cases.push_back(prepare_case(study.eval_scene, a, 0, study.tracks));

  std::vector<Demonstration> demos, holdout;
  for (const SynthCase& c : study.train_cases) demos.push_back({c.gt_plan, c.features, c.history});
  for (const SynthCase& c : study.eval_cases) holdout.push_back({c.gt_plan, c.features, c.history});

  IrlTrainConfig irl_cfg;
  irl_cfg.horizon = study.tracks.horizon;
  irl_cfg.lr = 2e-3;
  irl_cfg.epochs = 12;
  irl_cfg.seed = 31;
  study.irl = train_irl(demos, irl_cfg, holdout);

  std::vector<TrajGenExample> examples;
  for (const SynthCase& c : study.train_cases)
    examples.push_back({c.history, c.features, c.gt_plan, c.future});
  TrajGenTrainConfig tg_cfg;
  tg_cfg.t_f = study.tracks.t_f;
  tg_cfg.dt = study.tracks.dt;
  tg_cfg.pretrain_steps = 1500;
  tg_cfg.lr = 2e-3;
  tg_cfg.seed = 32;
  study.trajgen = train_trajgen(examples, {}, tg_cfg);

  study.built = true;
  return study;
}

// criterion 6: reward recovery on the T-junction template
bool criterion_reward_recovery(std::string& detail) {
  Check c;
  TJunctionStudy& study = tjunction_study();
  const SceneGrid& scene = study.eval_scene;
  const auto [cr, cc] = scene.agent_cell();
  const FeatureGrid feats = study.eval_cases.front().features;

  const Svf d_true = propagate_inferred(
      solve_inferred(true_rewards(scene), study.tracks.horizon), path_state(cr, cc));
  auto goal_gap = [&](const RewardParams& params) {
    const Svf d = propagate_inferred(
        solve_inferred(forward_rewards(feats, params), study.tracks.horizon),
        path_state(cr, cc));
    double acc = 0.0;
    for (std::size_t i = 0; i < d.goal_total.size(); ++i)
      acc += std::abs(d.goal_total[i] - d_true.goal_total[i]);
    return acc;
  };

  const RewardParams init_params =
      RewardParams::init(feats.feature_dim, 32, 31);  // train_irl's seed
  const double gap_init = goal_gap(init_params);
  const double gap_final = goal_gap(study.irl.params);
  c.expect(gap_final * 5.0 <= gap_init,
           "goal-SVF L1 gap " + std::to_string(gap_init) + " -> " + std::to_string(gap_final));

  const auto& log = study.irl.log;
  c.expect(log.front().holdout_nll.has_value() && log.back().holdout_nll.has_value(),
           "missing holdout likelihood");
  if (log.front().holdout_nll && log.back().holdout_nll)
    c.expect(*log.back().holdout_nll < *log.front().holdout_nll,
             "holdout nll did not improve: " + std::to_string(*log.front().holdout_nll) +
                 " -> " + std::to_string(*log.back().holdout_nll));
  std::ostringstream os;
  os << "goal-SVF L1 gap " << gap_init << " -> " << gap_final << " ("
     << gap_init / std::max(gap_final, 1e-12) << "x), holdout nll "
     << *log.front().holdout_nll << " -> " << *log.back().holdout_nll;
  detail = c.ok ? os.str() : c.detail.str();
  return c.ok;
}

// criterion 7: K=2 forecasts split across the two branches in >= 95/100 runs
bool criterion_multimodality(std::string& detail) {
  Check c;
  TJunctionStudy& study = tjunction_study();
  const SceneGrid& scene = study.eval_scene;
  const auto [cr, cc] = scene.agent_cell();

  const TrackHistory track = forward_history(2.0, study.tracks.t_h, study.tracks.dt, 0.0);
  int split = 0;
  for (int run = 0; run < 100; ++run) {
    ForecastConfig cfg;
    cfg.k = 2;
    cfg.m = 200;
    cfg.horizon = study.tracks.horizon;
    cfg.t_f = study.tracks.t_f;
    cfg.dt = study.tracks.dt;
    cfg.seed = 7000 + run;
    const ForecastSet fc =
        forecast(scene, track, study.irl.params, study.trajgen.params, cfg);
    const auto cell0 = scene.cell_of(fc.trajectories[0].points.back());
    const auto cell1 = scene.cell_of(fc.trajectories[1].points.back());
    const bool left0 = cell0.second < cc, left1 = cell1.second < cc;
    if (left0 != left1) ++split;
  }
  c.expect(split >= 95, "split in only " + std::to_string(split) + "/100 runs");
  detail = c.ok ? "one centroid per branch in " + std::to_string(split) + "/100 seeded runs"
                : c.detail.str();
  return c.ok;
}

// criterion 8: qualitative ablation ordering on the synthetic benchmark
bool criterion_ablation_ordering(std::string& detail) {
  Check c;
  BenchmarkConfig cfg;  // defaults sized for the acceptance run
  std::ostringstream log;
  const BenchmarkArtifacts art = run_benchmark(cfg, &log);
  std::map<Variant, MetricRow> rows;
  for (const MetricRow& r : art.report) rows[r.variant] = r;
  const MetricRow& irl = rows.at(Variant::P2tIrl);
  const MetricRow& cs = rows.at(Variant::P2tCs);
  const MetricRow& cv = rows.at(Variant::ConstantVelocity);
  c.expect(irl.offroad <= cs.offroad + 0.01,
           "offroad irl " + std::to_string(irl.offroad) + " vs cs " +
               std::to_string(cs.offroad));
  c.expect(irl.minade_5 < cs.minade_5, "minade_5 irl " + std::to_string(irl.minade_5) +
                                           " vs cs " + std::to_string(cs.minade_5));
  c.expect(irl.minade_5 < cv.minade_5, "minade_5 irl " + std::to_string(irl.minade_5) +
                                           " vs const-vel " + std::to_string(cv.minade_5));
  std::ostringstream os;
  os << "minade_5: irl " << irl.minade_5 << " < cs " << cs.minade_5 << ", cv " << cv.minade_5
     << "; offroad: irl " << irl.offroad << " vs cs " << cs.offroad;
  detail = c.ok ? os.str() : c.detail.str();
  return c.ok;
}

// criterion 9: metric unit semantics, including the stated boundary cases
bool criterion_metric_units(std::string& detail) {
  Check c;
  Trajectory gt;
  for (int k = 1; k <= 4; ++k) gt.points.push_back({1.0 * k, 0.0});
  auto shifted = [&](double dy) {
    Trajectory t = gt;
    for (Vec2& p : t.points) p.y += dy;
    return t;
  };
  auto set_of = [](std::vector<Trajectory> ts) {
    ForecastSet fc;
    fc.trajectories = std::move(ts);
    fc.members.assign(fc.trajectories.size(), 1);
    return fc;
  };

  c.expect(min_ade(set_of({gt}), gt) == 0.0, "exact match ade != 0");
  c.expect(std::abs(min_ade(set_of({shifted(1.0)}), gt) - 1.0) < 1e-12, "unit offset ade");
  c.expect(std::abs(min_ade(set_of({shifted(2.5), shifted(0.7)}), gt) - 0.7) < 1e-12,
           "min over K");
  c.expect(min_fde(set_of({gt}), gt) == 0.0, "exact match fde != 0");
  c.expect(std::abs(min_fde(set_of({shifted(0.7)}), gt) - 0.7) < 1e-12, "fde offset");

  c.expect(!is_miss(set_of({gt}), gt, 2.0), "exact match counted as miss");
  c.expect(is_miss(set_of({shifted(3.0)}), gt, 2.0), "3 m offset not a miss");
  c.expect(!is_miss(set_of({shifted(2.0)}), gt, 2.0), "2.0 m should be within");
  Trajectory spike = gt;
  spike.points[2].y += 2.1;
  c.expect(is_miss(set_of({spike}), gt, 2.0), "single 2.1 m step must miss");

  SceneGrid lanes = SceneGrid::centered(5, 5, 1.0, 1);
  lanes.has_lane_dir = true;
  for (auto& v : lanes.lane_dir) v = 0.0;
  auto yaw_rate_at = [&](double deg) {
    const double a = deg * std::numbers::pi / 180.0;
    Trajectory t;
    for (int k = 1; k <= 4; ++k)
      t.points.push_back({0.5 * k * std::cos(a), 0.5 * k * std::sin(a)});
    std::vector<EvalCase> cases{{set_of({t}), gt, &lanes, a}};
    return *offyaw_rate(cases);
  };
  c.expect(yaw_rate_at(0.0) == 0.0, "aligned motion flagged off-yaw");
  c.expect(yaw_rate_at(90.0) == 1.0, "90-degree motion not flagged");
  c.expect(yaw_rate_at(44.0) == 0.0, "44 degrees must not count");
  c.expect(yaw_rate_at(46.0) == 1.0, "46 degrees must count");

  SceneGrid road = SceneGrid::centered(4, 4, 1.0, 1);
  for (int r = 0; r < 4; ++r)
    for (int col = 0; col < 4; ++col) road.drivable[road.index(r, col)] = col < 2 ? 1 : 0;
  Trajectory quarter;
  quarter.points = {{-1.5, -0.5}, {-0.5, -0.5}, {-0.5, -0.5}, {-0.5, 0.5}};
  Trajectory all_on;
  all_on.points = {{-1.5, -0.5}, {-0.5, -0.5}, {-0.5, -0.5}, {-0.5, -0.5}};
  Trajectory gt4 = gt;
  std::vector<EvalCase> road_cases{{set_of({all_on}), gt4, &road, 0.0}};
  c.expect(offroad_rate(road_cases) == 0.0, "on-road points flagged");
  road_cases[0].forecast = set_of({quarter});
  c.expect(offroad_rate(road_cases) == 0.25, "1 of 4 points should be off-road");

  detail = c.ok ? "all metric examples and boundary cases behave per definition"
                : c.detail.str();
  return c.ok;
}

// criterion 10: byte-identical artifacts across two seeded CLI runs
bool criterion_determinism(std::string& detail) {
  Check c;
  std::string cli = "./planmax";
  if (const char* env = std::getenv("PLANMAX_CLI")) cli = env;

  const fs::path tmp =
      fs::temp_directory_path() / ("planmax_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(tmp);
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  SceneTemplate tmpl;
  tmpl.kind = TemplateKind::TJunction;
  tmpl.arm_halfwidth = 1;
  const SceneGrid scene = generate_scene(tmpl, 77);
  TrackGenConfig tcfg;
  tcfg.horizon = 30;
  const auto agents = generate_tracks(scene, true_rewards(scene), 10, tcfg, 78);
  io::save_dataset(tmp / "ds", {scene}, {agents}, {tcfg.t_h, tcfg.t_f, tcfg.dt, tcfg.horizon});
  std::ofstream(tmp / "irl.json") << R"({"epochs": 2, "lr": 0.002, "seed": 3})";
  std::ofstream(tmp / "tg.json") << R"({"pretrain_steps": 40, "lr": 0.002, "seed": 4})";

  for (const std::string tag : {"r1", "r2"}) {
    const std::string dir = (tmp / tag).string();
    fs::create_directories(dir);
    c.expect(run("train-irl --dataset " + (tmp / "ds").string() + " --config " +
                 (tmp / "irl.json").string() + " --threads 1 --out " + dir +
                 "/reward.json") == 0,
             "train-irl failed");
    c.expect(run("train-trajgen --dataset " + (tmp / "ds").string() + " --config " +
                 (tmp / "tg.json").string() + " --threads 1 --out " + dir + "/gen.json") == 0,
             "train-trajgen failed");
    c.expect(run("forecast --scene " + (tmp / "ds/scenes/s0000.txt").string() + " --tracks " +
                 (tmp / "ds/tracks/s0000.jsonl").string() +
                 " --track-id 1 --m 50 --horizon 30 --seed 5 --threads 1 --reward " + dir +
                 "/reward.json --trajgen " + dir + "/gen.json --dump-svf " + dir +
                 "/svf.json --out " + dir + "/fc.jsonl") == 0,
             "forecast failed");
    c.expect(run("evaluate --forecasts " + dir + "/fc.jsonl --dataset " +
                 (tmp / "ds").string() + " --out " + dir + "/metrics.csv") == 0,
             "evaluate failed");
    c.expect(run("render --kind svf --in " + dir + "/svf.json --field goal --out " + dir +
                 "/svf.pgm") == 0,
             "render failed");
  }
  for (const std::string artifact :
       {"reward.json", "gen.json", "fc.jsonl", "metrics.csv", "svf.pgm"}) {
    const std::string a = slurp(tmp / "r1" / artifact), b = slurp(tmp / "r2" / artifact);
    c.expect(!a.empty() && a == b, artifact + " differs between runs");
  }
  fs::remove_all(tmp);
  detail = c.ok ? "checkpoints, forecasts, metric CSVs and PGM renders byte-identical"
                : c.detail.str();
  return c.ok;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Criterion> criteria{
      {1, "MaxEnt policy/enumeration equivalence", criterion_maxent_correctness},
      {2, "SVF conservation and termination", criterion_svf_conservation},
      {3, "IRL gradient vs enumerated likelihood", criterion_irl_gradient},
      {4, "reward and generator backprop vs finite differences", criterion_backprop},
      {5, "sampling fidelity", criterion_sampling_fidelity},
      {6, "reward recovery on the T-junction", criterion_reward_recovery},
      {7, "K=2 multimodality on the T-junction", criterion_multimodality},
      {8, "ablation ordering on the synthetic benchmark", criterion_ablation_ordering},
      {9, "metric unit semantics", criterion_metric_units},
      {10, "byte-level determinism of CLI artifacts", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& crit : criteria) {
    std::string detail;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      ok = crit.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << crit.id << ": " << crit.name
              << " — " << detail << " [" << static_cast<int>(secs * 1000) << " ms]\n";
    if (!ok) ++failures;
  }
  if (failures) std::cout << failures << " criterion(s) failed\n";
  return failures;
}
