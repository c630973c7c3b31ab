#include "planmax/irl.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "planmax/rng.hpp"

namespace planmax {

Svf demo_svf(const Plan& plan, int height, int width) {
  Svf d;
  d.height = height;
  d.width = width;
  const std::size_t cells = static_cast<std::size_t>(height) * width;
  const std::size_t steps = plan.states.size();
  d.path_step.assign(steps, std::vector<double>(cells, 0.0));
  d.goal_step.assign(steps, std::vector<double>(cells, 0.0));
  d.path_total.assign(cells, 0.0);
  d.goal_total.assign(cells, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const GridState& s = plan.states[t];
    const std::size_t idx = static_cast<std::size_t>(s.row) * width + s.col;
    if (s.kind == StateKind::Path) {
      d.path_step[t][idx] = 1.0;
      d.path_total[idx] += 1.0;
    } else {
      d.goal_step[t][idx] = 1.0;
      d.goal_total[idx] += 1.0;
    }
  }
  return d;
}

double plan_reward(const RewardGrids& rewards, const Plan& plan) {
  double total = 0.0;
  for (const GridState& s : plan.states) {
    const std::size_t idx = static_cast<std::size_t>(s.row) * rewards.width + s.col;
    total += s.kind == StateKind::Path ? rewards.r_path[idx] : rewards.r_goal[idx];
  }
  return total;
}

double plan_log_likelihood(const RewardGrids& rewards, const Policy& policy, const Plan& plan) {
  const GridState& s0 = plan.states.front();
  const double log_z = policy.v[0][static_cast<std::size_t>(s0.row) * policy.width + s0.col];
  return plan_reward(rewards, plan) - log_z;
}

Vec irl_gradient(const Demonstration& demo, const RewardParams& params, int horizon) {
  if (static_cast<int>(demo.plan.num_actions()) > horizon)
    throw std::invalid_argument("irl_gradient: plan exceeds horizon");
  const RewardGrids rewards = forward_rewards(demo.features, params);
  const Policy policy = solve_inferred(rewards, horizon);
  const Svf d_theta = propagate_inferred(policy, demo.plan.states.front());
  const Svf d_tau = demo_svf(demo.plan, rewards.height, rewards.width);

  const std::size_t cells = static_cast<std::size_t>(rewards.height) * rewards.width;
  std::vector<double> up_path(cells), up_goal(cells);
  for (std::size_t s = 0; s < cells; ++s) {
    up_path[s] = d_tau.path_total[s] - d_theta.path_total[s];
    up_goal[s] = d_tau.goal_total[s] - d_theta.goal_total[s];
  }
  return backward_rewards(demo.features, params, up_path, up_goal);
}

namespace {

bool oracle_scale(const Demonstration& demo, int horizon) {
  return demo.features.height <= 4 && demo.features.width <= 4 && horizon <= 8;
}

double demo_nll(const Demonstration& demo, const RewardParams& params, int horizon) {
  const RewardGrids rewards = forward_rewards(demo.features, params);
  if (oracle_scale(demo, horizon)) {
    const auto dist = enumerate_distribution(rewards, horizon, demo.plan.states.front());
    const auto it = dist.find(demo.plan);
    if (it == dist.end() || it->second <= 0.0)
      throw std::runtime_error("holdout demo has zero probability");
    return -std::log(it->second);
  }
  const Policy policy = solve_inferred(rewards, horizon);
  return -plan_log_likelihood(rewards, policy, demo.plan);
}

double mean_holdout_nll(const std::vector<Demonstration>& holdout, const RewardParams& params,
                        int horizon) {
  double acc = 0.0;
  for (const Demonstration& d : holdout) acc += demo_nll(d, params, horizon);
  return acc / static_cast<double>(holdout.size());
}

struct ExampleResult {
  Vec grad;
  double nll = 0.0;
};

ExampleResult example_gradient(const Demonstration& demo, const RewardParams& params,
                               int horizon) {
  ExampleResult out;
  const RewardGrids rewards = forward_rewards(demo.features, params);
  const Policy policy = solve_inferred(rewards, horizon);
  const Svf d_theta = propagate_inferred(policy, demo.plan.states.front());
  const Svf d_tau = demo_svf(demo.plan, rewards.height, rewards.width);
  const std::size_t cells = static_cast<std::size_t>(rewards.height) * rewards.width;
  std::vector<double> up_path(cells), up_goal(cells);
  for (std::size_t s = 0; s < cells; ++s) {
    up_path[s] = d_tau.path_total[s] - d_theta.path_total[s];
    up_goal[s] = d_tau.goal_total[s] - d_theta.goal_total[s];
  }
  out.grad = backward_rewards(demo.features, params, up_path, up_goal);
  out.nll = -plan_log_likelihood(rewards, policy, demo.plan);
  return out;
}

}  // namespace

IrlTrainResult train_irl(const std::vector<Demonstration>& dataset, const IrlTrainConfig& config,
                         const std::vector<Demonstration>& holdout,
                         const RewardParams* resume_params, const AdamState* resume_adam) {
  if (dataset.empty()) throw std::invalid_argument("train_irl: empty dataset");
  if (config.batch < 1 || config.epochs < 0) throw std::invalid_argument("train_irl: bad config");

  std::vector<const Demonstration*> demos;
  int discarded = 0;
  for (const Demonstration& d : dataset) {
    if (static_cast<int>(d.plan.num_actions()) > config.horizon) {
      ++discarded;
      continue;
    }
    demos.push_back(&d);
  }
  if (discarded > 0)
    std::cerr << "train_irl: discarded " << discarded << " demonstration(s) longer than horizon "
              << config.horizon << "\n";
  if (demos.empty()) throw std::invalid_argument("train_irl: every demonstration over horizon");

  IrlTrainResult result;
  result.discarded = discarded;
  const int feature_dim = demos.front()->features.feature_dim;
  result.params = resume_params ? *resume_params
                                : RewardParams::init(feature_dim, config.hidden, config.seed);
  Vec theta = result.params.flatten();
  result.adam = resume_adam ? *resume_adam : AdamState::init(theta.size(), config.lr);

  auto evaluate_nll = [&](const RewardParams& p) {
    double acc = 0.0;
    for (const Demonstration* d : demos) {
      const RewardGrids rewards = forward_rewards(d->features, p);
      const Policy policy = solve_inferred(rewards, config.horizon);
      acc += -plan_log_likelihood(rewards, policy, d->plan);
    }
    return acc / static_cast<double>(demos.size());
  };

  {
    EpochLog row;
    row.epoch = 0;
    row.train_nll = evaluate_nll(result.params);
    if (config.log_holdout && !holdout.empty())
      row.holdout_nll = mean_holdout_nll(holdout, result.params, config.horizon);
    result.log.push_back(row);
  }

  const int threads = std::max(1, config.threads);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(demos.size());
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle) {
      std::mt19937_64 rng(derive_seed(config.seed, 0x5eedULL + epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }

    double epoch_nll = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t stop = std::min(order.size(), start + config.batch);
      std::vector<ExampleResult> results(stop - start);
      if (threads == 1 || results.size() == 1) {
        for (std::size_t i = start; i < stop; ++i)
          results[i - start] = example_gradient(*demos[order[i]], result.params, config.horizon);
      } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (results.size() + threads - 1) / threads;
        for (int th = 0; th < threads; ++th) {
          const std::size_t lo = th * chunk, hi = std::min(results.size(), lo + chunk);
          if (lo >= hi) break;
          pool.emplace_back([&, lo, hi]() {
            for (std::size_t i = lo; i < hi; ++i)
              results[i] = example_gradient(*demos[order[start + i]], result.params,
                                            config.horizon);
          });
        }
        for (auto& t : pool) t.join();
      }

      // Sequential, index-ordered accumulation keeps results bit-identical
      // across thread counts.
      Vec grad(theta.size(), 0.0);
      for (const ExampleResult& r : results) {
        axpy(1.0, r.grad, grad);
        epoch_nll += r.nll;
      }
      const double scale = 1.0 / static_cast<double>(results.size());
      Vec descent(theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i) {
        descent[i] = -grad[i] * scale;
        if (!std::isfinite(descent[i]))
          throw std::runtime_error("train_irl: non-finite gradient (divergence)");
      }
      adam_step(theta, descent, result.adam);
      result.params.unflatten(theta);
    }

    EpochLog row;
    row.epoch = epoch;
    row.train_nll = epoch_nll / static_cast<double>(demos.size());
    if (!std::isfinite(row.train_nll))
      throw std::runtime_error("train_irl: non-finite loss (divergence)");
    if (config.log_holdout && !holdout.empty())
      row.holdout_nll = mean_holdout_nll(holdout, result.params, config.horizon);
    result.log.push_back(row);
  }
  return result;
}

}  // namespace planmax
