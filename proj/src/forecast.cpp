#include "planmax/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "planmax/optim.hpp"
#include "planmax/rng.hpp"

namespace planmax {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::P2tIrl: return "p2t_irl";
    case Variant::P2tCs: return "p2t_cs";
    case Variant::P2tBc: return "p2t_bc";
    case Variant::ConstantVelocity: return "const_vel";
  }
  throw std::invalid_argument("variant_name: unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "p2t_irl" || name == "irl") return Variant::P2tIrl;
  if (name == "p2t_cs" || name == "cs") return Variant::P2tCs;
  if (name == "p2t_bc" || name == "bc") return Variant::P2tBc;
  if (name == "const_vel" || name == "cv") return Variant::ConstantVelocity;
  throw std::invalid_argument("unknown variant: " + name);
}

int ForecastSet::total_members() const {
  int acc = 0;
  for (int m : members) acc += m;
  return acc;
}

void ForecastSet::validate(int t_f) const {
  if (trajectories.empty()) throw std::invalid_argument("ForecastSet: empty");
  if (trajectories.size() != members.size())
    throw std::invalid_argument("ForecastSet: member count mismatch");
  for (const Trajectory& t : trajectories)
    if (static_cast<int>(t.points.size()) != t_f)
      throw std::invalid_argument("ForecastSet: trajectory horizon mismatch");
}

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (int th = 0; th < threads; ++th) {
    const std::size_t lo = th * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi]() {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

Vec flatten_traj(const Trajectory& t) {
  Vec flat;
  flat.reserve(2 * t.points.size());
  for (const Vec2& p : t.points) {
    flat.push_back(p.x);
    flat.push_back(p.y);
  }
  return flat;
}

Trajectory unflatten_traj(const Vec& flat) {
  Trajectory t;
  for (std::size_t i = 0; i + 1 < flat.size(); i += 2) t.points.push_back({flat[i], flat[i + 1]});
  return t;
}

}  // namespace

ForecastSet cluster_forecasts(const SampleSet& samples, int k, std::uint64_t seed) {
  if (static_cast<int>(samples.trajectories.size()) < k)
    throw std::invalid_argument("cluster_forecasts: fewer samples than clusters");
  std::vector<Vec> flat(samples.trajectories.size());
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = flatten_traj(samples.trajectories[i]);
  const KMeansResult res = kmeans_cluster(flat, k, derive_seed(seed, 0x6d3a));
  ForecastSet out;
  out.variant = samples.variant;
  for (int c = 0; c < k; ++c) {
    out.trajectories.push_back(unflatten_traj(res.centroids[c]));
    out.members.push_back(res.sizes[c]);
  }
  return out;
}

SampleSet sample_forecasts_irl(const SceneGrid& scene, const TrackHistory& track,
                               const RewardParams& reward_params,
                               const TrajGenParams& trajgen_params,
                               const ForecastConfig& config) {
  const FeatureGrid features = assemble_features(scene, track);
  const RewardGrids rewards = forward_rewards(features, reward_params);
  const Policy policy = solve_inferred(rewards, config.horizon);
  const auto [ar, ac] = scene.agent_cell();
  const std::vector<Plan> plans = sample_plans(policy, path_state(ar, ac), config.m, config.seed);

  SampleSet out;
  out.variant = Variant::P2tIrl;
  out.trajectories.resize(plans.size());
  const Vec h_m0 = encode_motion(track, trajgen_params);
  parallel_for(plans.size(), config.threads, [&](std::size_t i) {
    const std::vector<Vec> enc = encode_plan(plans[i], features, trajgen_params);
    out.trajectories[i] = decode_trajectory(h_m0, enc, trajgen_params, config.t_f).trajectory;
  });
  return out;
}

ForecastSet forecast(const SceneGrid& scene, const TrackHistory& track,
                     const RewardParams& reward_params, const TrajGenParams& trajgen_params,
                     const ForecastConfig& config) {
  return cluster_forecasts(
      sample_forecasts_irl(scene, track, reward_params, trajgen_params, config), config.k,
      config.seed);
}

SampleSet sample_forecasts_cs(const SceneGrid& scene, const TrackHistory& track,
                              const RewardParams& reward_params, const ForecastConfig& config) {
  const FeatureGrid features = assemble_features(scene, track);
  const RewardGrids rewards = forward_rewards(features, reward_params);
  const Policy policy = solve_inferred(rewards, config.horizon);
  const auto [ar, ac] = scene.agent_cell();
  const std::vector<Plan> plans = sample_plans(policy, path_state(ar, ac), config.m, config.seed);

  SampleSet out;
  out.variant = Variant::P2tCs;
  out.trajectories.resize(plans.size());
  const double speed = track.current().speed;
  parallel_for(plans.size(), config.threads, [&](std::size_t i) {
    out.trajectories[i] = constant_speed_rollout(plans[i], scene, speed, config.t_f, config.dt);
  });
  return out;
}

ForecastSet forecast_cs(const SceneGrid& scene, const TrackHistory& track,
                        const RewardParams& reward_params, const ForecastConfig& config) {
  return cluster_forecasts(sample_forecasts_cs(scene, track, reward_params, config), config.k,
                           config.seed);
}

ForecastSet forecast_constant_velocity(const TrackHistory& track, const ForecastConfig& config) {
  const TrackSample& cur = track.current();
  Trajectory t;
  for (int k = 1; k <= config.t_f; ++k)
    t.points.push_back({cur.pos.x + cur.speed * k * config.dt, cur.pos.y});
  ForecastSet out;
  out.variant = Variant::ConstantVelocity;
  out.trajectories.push_back(std::move(t));
  out.members.push_back(config.m);
  return out;
}

BcParams BcParams::init(int feature_dim, int hidden, std::uint64_t seed) {
  BcParams p;
  p.net = CellMlp::glorot(feature_dim, hidden, kNumActions, derive_seed(seed, 0xbc));
  return p;
}

namespace {

// Softmax over the actions valid at (row, col); End is always valid.
Vec bc_probs_from_logits(const Vec& logits, int height, int width, int row, int col) {
  Vec probs(kNumActions, 0.0);
  double mx = logits[static_cast<int>(Action::End)];
  auto valid = [&](int a) {
    if (static_cast<Action>(a) == Action::End) return true;
    const auto [dr, dc] = action_delta(static_cast<Action>(a));
    const int nr = row + dr, nc = col + dc;
    return nr >= 0 && nr < height && nc >= 0 && nc < width;
  };
  for (int a = 0; a < kNumActions; ++a)
    if (valid(a)) mx = std::max(mx, logits[a]);
  double total = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    if (!valid(a)) continue;
    probs[a] = std::exp(logits[a] - mx);
    total += probs[a];
  }
  for (double& p : probs) p /= total;
  return probs;
}

}  // namespace

Vec BcParams::action_probs(const FeatureGrid& features, int row, int col) const {
  const Vec logits = net.forward(features.cell_features(row, col));
  return bc_probs_from_logits(logits, features.height, features.width, row, col);
}

BcTrainResult train_bc(const std::vector<Demonstration>& dataset, const BcTrainConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("train_bc: empty dataset");
  struct Sample {
    const FeatureGrid* features;
    int row, col;
    int action;
  };
  std::vector<Sample> samples;
  for (const Demonstration& d : dataset) {
    for (std::size_t t = 0; t + 1 < d.plan.states.size(); ++t) {
      const GridState& cur = d.plan.states[t];
      const GridState& nxt = d.plan.states[t + 1];
      int action;
      if (nxt.kind == StateKind::Goal) {
        action = static_cast<int>(Action::End);
      } else if (nxt.row == cur.row - 1) {
        action = static_cast<int>(Action::Up);
      } else if (nxt.row == cur.row + 1) {
        action = static_cast<int>(Action::Down);
      } else if (nxt.col == cur.col - 1) {
        action = static_cast<int>(Action::Left);
      } else {
        action = static_cast<int>(Action::Right);
      }
      samples.push_back({&d.features, cur.row, cur.col, action});
    }
  }

  BcTrainResult result;
  const int feature_dim = dataset.front().features.feature_dim;
  result.params = BcParams::init(feature_dim, config.hidden, config.seed);
  Vec theta(result.params.net.num_params());
  result.params.net.flatten_into(theta);
  AdamState adam = AdamState::init(theta.size(), config.lr);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle) {
      std::mt19937_64 rng(derive_seed(config.seed, 0xbc00 + epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t stop = std::min(order.size(), start + config.batch);
      Vec grad(theta.size(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const Sample& s = samples[order[i]];
        const Vec x = s.features->cell_features(s.row, s.col);
        const Vec logits = result.params.net.forward(x);
        const Vec probs = bc_probs_from_logits(logits, s.features->height, s.features->width,
                                               s.row, s.col);
        epoch_loss += -std::log(std::max(probs[s.action], 1e-300));
        Vec upstream(kNumActions, 0.0);
        for (int a = 0; a < kNumActions; ++a) upstream[a] = probs[a];
        upstream[s.action] -= 1.0;
        result.params.net.backward(x, upstream, grad);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (double& g : grad) {
        g *= scale;
        if (!std::isfinite(g)) throw std::runtime_error("train_bc: non-finite gradient");
      }
      adam_step(theta, grad, adam);
      result.params.net.unflatten_from(theta);
    }
    result.loss_log.push_back(epoch_loss / static_cast<double>(samples.size()));
  }
  return result;
}

std::vector<Plan> sample_bc_plans(const BcParams& params, const FeatureGrid& features,
                                  GridState s_init, int horizon, int count, std::uint64_t seed) {
  // Cache the per-cell distributions; the policy is stationary.
  const std::size_t cells = static_cast<std::size_t>(features.height) * features.width;
  std::vector<Vec> probs(cells);
  for (int r = 0; r < features.height; ++r)
    for (int c = 0; c < features.width; ++c)
      probs[static_cast<std::size_t>(r) * features.width + c] = params.action_probs(features, r, c);

  std::vector<Plan> plans;
  plans.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Plan plan;
    int r = s_init.row, c = s_init.col;
    plan.states.push_back(path_state(r, c));
    for (int t = 0; t < horizon; ++t) {
      int chosen;
      if (t == horizon - 1) {
        chosen = static_cast<int>(Action::End);  // forced termination
      } else {
        const Vec& row = probs[static_cast<std::size_t>(r) * features.width + c];
        const double u = unif(rng);
        double cum = 0.0;
        chosen = static_cast<int>(Action::End);
        for (int a = 0; a < kNumActions; ++a) {
          cum += row[a];
          if (u < cum) {
            chosen = a;
            break;
          }
        }
      }
      if (static_cast<Action>(chosen) == Action::End) {
        plan.states.push_back(goal_state(r, c));
        break;
      }
      const auto [dr, dc] = action_delta(static_cast<Action>(chosen));
      r += dr;
      c += dc;
      plan.states.push_back(path_state(r, c));
    }
    if (plan.states.back().kind != StateKind::Goal)
      plan.states.push_back(goal_state(r, c));
    plans.push_back(std::move(plan));
  }
  return plans;
}

SampleSet sample_forecasts_bc(const SceneGrid& scene, const TrackHistory& track,
                              const BcParams& bc_params, const TrajGenParams& trajgen_params,
                              const ForecastConfig& config) {
  const FeatureGrid features = assemble_features(scene, track);
  const auto [ar, ac] = scene.agent_cell();
  const std::vector<Plan> plans = sample_bc_plans(bc_params, features, path_state(ar, ac),
                                                  config.horizon, config.m, config.seed);
  SampleSet out;
  out.variant = Variant::P2tBc;
  out.trajectories.resize(plans.size());
  const Vec h_m0 = encode_motion(track, trajgen_params);
  parallel_for(plans.size(), config.threads, [&](std::size_t i) {
    const std::vector<Vec> enc = encode_plan(plans[i], features, trajgen_params);
    out.trajectories[i] = decode_trajectory(h_m0, enc, trajgen_params, config.t_f).trajectory;
  });
  return out;
}

ForecastSet forecast_bc(const SceneGrid& scene, const TrackHistory& track,
                        const BcParams& bc_params, const TrajGenParams& trajgen_params,
                        const ForecastConfig& config) {
  return cluster_forecasts(
      sample_forecasts_bc(scene, track, bc_params, trajgen_params, config), config.k,
      config.seed);
}

}  // namespace planmax
