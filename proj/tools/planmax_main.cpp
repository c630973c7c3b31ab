// planmax command-line interface: training, forecasting, evaluation,
// rendering and the synthetic benchmark.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "planmax/forecast.hpp"
#include "planmax/io.hpp"
#include "planmax/irl.hpp"
#include "planmax/metrics.hpp"
#include "planmax/synth.hpp"
#include "planmax/trajgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace planmax;

namespace {

json load_config_json(const std::string& path, const std::set<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  const json cfg = json::parse(in);
  if (!cfg.is_object()) throw std::runtime_error("config must be a JSON object");
  for (const auto& [key, value] : cfg.items())
    if (!allowed.count(key)) throw std::runtime_error("unknown config key: " + key);
  return cfg;
}

// Seed precedence: explicit --seed flag, then PLANMAX_SEED, then the config
// file, then the built-in default.
std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value,
                           std::optional<std::uint64_t> config_value, std::uint64_t fallback) {
  if (seed_opt && seed_opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("PLANMAX_SEED")) return std::strtoull(env, nullptr, 10);
  if (config_value) return *config_value;
  return fallback;
}

std::vector<Demonstration> dataset_demos(const io::LoadedDataset& ds) {
  std::vector<Demonstration> demos;
  demos.reserve(ds.cases.size());
  for (const SynthCase& c : ds.cases) demos.push_back({c.gt_plan, c.features, c.history});
  return demos;
}

void write_step_loss_csv(const fs::path& path, const std::vector<double>& losses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out << i << ',' << losses[i] << '\n';
}

int cmd_train_irl(const std::string& dataset_dir, const std::string& out_path,
                  const std::string& config_path, const std::string& resume_path,
                  const std::string& loss_csv, const std::string& holdout_dir,
                  const CLI::Option* seed_opt, std::uint64_t seed_flag, int threads) {
  const io::LoadedDataset ds = io::load_dataset(dataset_dir);
  IrlTrainConfig cfg;
  cfg.horizon = ds.params.horizon;
  cfg.threads = threads;
  std::optional<std::uint64_t> cfg_seed;
  if (!config_path.empty()) {
    const json j = load_config_json(config_path, {"N", "lr", "batch", "epochs", "seed"});
    cfg.horizon = j.value("N", cfg.horizon);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.epochs = j.value("epochs", cfg.epochs);
    if (j.contains("seed")) cfg_seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.seed = resolve_seed(seed_opt, seed_flag, cfg_seed, 0);

  std::vector<Demonstration> holdout;
  if (!holdout_dir.empty()) holdout = dataset_demos(io::load_dataset(holdout_dir));

  std::optional<io::RewardCheckpoint> resume;
  if (!resume_path.empty()) resume = io::load_reward_checkpoint(resume_path);

  const IrlTrainResult res =
      train_irl(dataset_demos(ds), cfg, holdout, resume ? &resume->params : nullptr,
                resume ? &resume->adam : nullptr);
  io::save_reward_checkpoint(out_path, res.params, res.adam);
  if (!loss_csv.empty()) io::save_loss_csv(loss_csv, res.log);
  std::cout << "train-irl: " << ds.cases.size() - res.discarded << " demos, "
            << cfg.epochs << " epochs, nll " << res.log.front().train_nll << " -> "
            << res.log.back().train_nll << ", step " << res.adam.step << "\n";
  return 0;
}

int cmd_train_trajgen(const std::string& dataset_dir, const std::string& out_path,
                      const std::string& config_path, const std::string& reward_path,
                      const std::string& resume_path, const std::string& loss_csv,
                      const CLI::Option* seed_opt, std::uint64_t seed_flag, int threads) {
  const io::LoadedDataset ds = io::load_dataset(dataset_dir);
  TrajGenTrainConfig cfg;
  cfg.t_f = ds.params.t_f;
  cfg.dt = ds.params.dt;
  cfg.threads = threads;
  std::optional<std::uint64_t> cfg_seed;
  if (!config_path.empty()) {
    const json j = load_config_json(
        config_path,
        {"N", "lr", "pretrain_steps", "finetune_steps", "sample_count", "k", "seed"});
    cfg.lr = j.value("lr", cfg.lr);
    cfg.pretrain_steps = j.value("pretrain_steps", cfg.pretrain_steps);
    cfg.finetune_steps = j.value("finetune_steps", cfg.finetune_steps);
    cfg.sample_count = j.value("sample_count", cfg.sample_count);
    cfg.k = j.value("k", cfg.k);
    if (j.contains("seed")) cfg_seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.seed = resolve_seed(seed_opt, seed_flag, cfg_seed, 0);

  std::vector<TrajGenExample> examples;
  for (const SynthCase& c : ds.cases) {
    if (static_cast<int>(c.future.points.size()) != cfg.t_f) continue;  // truncated future
    examples.push_back({c.history, c.features, c.gt_plan, c.future});
  }
  if (examples.empty()) throw std::runtime_error("train-trajgen: no usable examples");

  std::vector<Policy> policies;
  if (cfg.finetune_steps > 0) {
    if (reward_path.empty())
      throw std::runtime_error("train-trajgen: --reward required for fine-tuning");
    const io::RewardCheckpoint reward = io::load_reward_checkpoint(reward_path);
    for (const TrajGenExample& ex : examples)
      policies.push_back(
          solve_inferred(forward_rewards(ex.features, reward.params), ds.params.horizon));
  }

  std::optional<io::TrajGenCheckpoint> resume;
  if (!resume_path.empty()) resume = io::load_trajgen_checkpoint(resume_path);
  const TrajGenTrainResult res =
      train_trajgen(examples, policies, cfg, resume ? &resume->params : nullptr,
                    resume ? resume->step : 0);
  io::save_trajgen_checkpoint(out_path, res.params, res.final_step);
  if (!loss_csv.empty()) write_step_loss_csv(loss_csv, res.loss_log);
  std::cout << "train-trajgen: " << examples.size() << " examples, loss "
            << (res.loss_log.empty() ? 0.0 : res.loss_log.front()) << " -> "
            << (res.loss_log.empty() ? 0.0 : res.loss_log.back()) << ", step "
            << res.final_step << "\n";
  return 0;
}

int cmd_train_bc(const std::string& dataset_dir, const std::string& out_path,
                 const std::string& config_path, const std::string& loss_csv,
                 const CLI::Option* seed_opt, std::uint64_t seed_flag) {
  const io::LoadedDataset ds = io::load_dataset(dataset_dir);
  BcTrainConfig cfg;
  std::optional<std::uint64_t> cfg_seed;
  if (!config_path.empty()) {
    const json j = load_config_json(config_path, {"lr", "batch", "epochs", "seed"});
    cfg.lr = j.value("lr", cfg.lr);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.epochs = j.value("epochs", cfg.epochs);
    if (j.contains("seed")) cfg_seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.seed = resolve_seed(seed_opt, seed_flag, cfg_seed, 0);
  const BcTrainResult res = train_bc(dataset_demos(ds), cfg);
  io::save_bc_checkpoint(out_path, res.params);
  if (!loss_csv.empty()) write_step_loss_csv(loss_csv, res.loss_log);
  std::cout << "train-bc: " << ds.cases.size() << " demos, ce "
            << (res.loss_log.empty() ? 0.0 : res.loss_log.front()) << " -> "
            << (res.loss_log.empty() ? 0.0 : res.loss_log.back()) << "\n";
  return 0;
}

struct ForecastArgs {
  std::string scene_path, tracks_path, out_path;
  std::string reward_path, trajgen_path, bc_path;
  std::string variant = "irl";
  std::string attention_csv, dump_svf, dump_rewards;
  int track_id = 0;
  std::vector<int> k_values{5, 10};
  int m = 1000;
  int horizon = 50;
  int t_f = 12;
  double dt = 0.5;
  int t_h = 4;
  int case_id = 0;
  int threads = 1;
  std::uint64_t seed = 0;
};

int cmd_forecast(const ForecastArgs& args, const CLI::Option* seed_opt) {
  const SceneGrid scene = io::load_scene(args.scene_path);
  const auto tracks = io::load_tracks(args.tracks_path);
  const auto it = tracks.find(args.track_id);
  if (it == tracks.end())
    throw std::runtime_error("track_id " + std::to_string(args.track_id) + " not in " +
                             args.tracks_path);
  const AgentFrame frame = build_agent_frame(it->second.history);
  const TrackHistory history = make_track_history(it->second.history, frame, args.t_h, args.dt);

  ForecastConfig cfg;
  cfg.m = args.m;
  cfg.horizon = args.horizon;
  cfg.t_f = args.t_f;
  cfg.dt = args.dt;
  cfg.threads = args.threads;
  cfg.seed = resolve_seed(seed_opt, args.seed, std::nullopt, 0);

  const Variant variant = variant_from_name(args.variant);
  SampleSet samples;
  if (variant == Variant::P2tIrl) {
    if (args.reward_path.empty() || args.trajgen_path.empty())
      throw std::runtime_error("variant irl needs --reward and --trajgen");
    const auto reward = io::load_reward_checkpoint(args.reward_path);
    const auto gen = io::load_trajgen_checkpoint(args.trajgen_path);
    samples = sample_forecasts_irl(scene, history, reward.params, gen.params, cfg);
  } else if (variant == Variant::P2tCs) {
    if (args.reward_path.empty()) throw std::runtime_error("variant cs needs --reward");
    const auto reward = io::load_reward_checkpoint(args.reward_path);
    samples = sample_forecasts_cs(scene, history, reward.params, cfg);
  } else if (variant == Variant::P2tBc) {
    if (args.bc_path.empty() || args.trajgen_path.empty())
      throw std::runtime_error("variant bc needs --bc and --trajgen");
    const BcParams bc = io::load_bc_checkpoint(args.bc_path);
    const auto gen = io::load_trajgen_checkpoint(args.trajgen_path);
    samples = sample_forecasts_bc(scene, history, bc, gen.params, cfg);
  } else {
    throw std::runtime_error("forecast: unsupported variant " + args.variant);
  }

  std::vector<io::ForecastRecord> records;
  for (int k : args.k_values) {
    const ForecastSet set = cluster_forecasts(samples, k, cfg.seed);
    const auto recs = io::forecast_to_records(set, args.case_id, k);
    records.insert(records.end(), recs.begin(), recs.end());
  }
  io::save_forecasts(args.out_path, records);

  if (!args.dump_svf.empty() || !args.dump_rewards.empty()) {
    if (args.reward_path.empty())
      throw std::runtime_error("--dump-svf/--dump-rewards need --reward");
    const auto reward = io::load_reward_checkpoint(args.reward_path);
    const FeatureGrid features = assemble_features(scene, history);
    const RewardGrids rewards = forward_rewards(features, reward.params);
    if (!args.dump_rewards.empty()) io::save_rewards_json(args.dump_rewards, rewards);
    if (!args.dump_svf.empty()) {
      const Policy policy = solve_inferred(rewards, cfg.horizon);
      const auto [ar, ac] = scene.agent_cell();
      io::save_svf_json(args.dump_svf, propagate_inferred(policy, path_state(ar, ac)));
    }
  }
  if (!args.attention_csv.empty()) {
    if (args.reward_path.empty() || args.trajgen_path.empty())
      throw std::runtime_error("--attention-csv needs --reward and --trajgen");
    const auto reward = io::load_reward_checkpoint(args.reward_path);
    const auto gen = io::load_trajgen_checkpoint(args.trajgen_path);
    const FeatureGrid features = assemble_features(scene, history);
    const RewardGrids rewards = forward_rewards(features, reward.params);
    const Policy policy = solve_inferred(rewards, cfg.horizon);
    const auto [ar, ac] = scene.agent_cell();
    const auto plans = sample_plans(policy, path_state(ar, ac),
                                    std::min(cfg.m, 5), cfg.seed);
    const Vec h0 = encode_motion(history, gen.params);
    std::vector<std::vector<Vec>> weights;
    for (const Plan& plan : plans) {
      const auto enc = encode_plan(plan, features, gen.params);
      weights.push_back(decode_trajectory(h0, enc, gen.params, cfg.t_f).attention);
    }
    io::save_attention_csv(args.attention_csv, weights);
  }
  std::cout << "forecast: wrote " << records.size() << " centroids to " << args.out_path
            << "\n";
  return 0;
}

int cmd_evaluate(const std::string& forecasts_path, const std::string& dataset_dir,
                 const std::string& out_path, int k_small, int k_large) {
  const io::LoadedDataset ds = io::load_dataset(dataset_dir);
  if (ds.cases.empty()) throw std::runtime_error("evaluate: empty dataset");
  const auto records = io::load_forecasts(forecasts_path);
  if (records.empty()) throw std::runtime_error("evaluate: no forecast records");

  // Group records into per-(variant, k_set, case) forecast sets.
  std::map<std::string, std::map<int, std::map<int, ForecastSet>>> grouped;
  for (const io::ForecastRecord& r : records) {
    if (r.case_id < 0 || r.case_id >= static_cast<int>(ds.cases.size()))
      throw std::runtime_error("evaluate: case_id " + std::to_string(r.case_id) +
                               " outside the dataset");
    ForecastSet& set = grouped[r.variant][r.k_set][r.case_id];
    set.variant = variant_from_name(r.variant);
    Trajectory t;
    t.points = r.points;
    set.trajectories.push_back(std::move(t));
    set.members.push_back(r.members);
  }

  std::vector<MetricRow> rows;
  for (auto& [variant_name_str, by_k] : grouped) {
    auto pick = [&](int k) -> std::map<int, ForecastSet>& {
      if (by_k.count(k)) return by_k[k];
      return by_k.begin()->second;  // single-K fallback
    };
    auto build_cases = [&](std::map<int, ForecastSet>& sets) {
      std::vector<EvalCase> cases;
      for (auto& [case_id, set] : sets) {
        const SynthCase& c = ds.cases[case_id];
        cases.push_back({set, c.future, &ds.scenes[c.scene_index], 0.0});
      }
      return cases;
    };
    const std::vector<EvalCase> cases5 = build_cases(pick(k_small));
    const std::vector<EvalCase> cases10 = build_cases(pick(k_large));
    rows.push_back(aggregate_metrics(variant_from_name(variant_name_str), cases5, cases10));
  }
  io::save_metrics_csv(out_path, rows);
  std::cout << "evaluate: wrote " << rows.size() << " variant row(s) to " << out_path << "\n";
  return 0;
}

int cmd_render(const std::string& kind, const std::string& in_path, const std::string& out_path,
               const std::string& scene_path, const std::string& field) {
  if (kind == "svf") {
    const Svf svf = io::load_svf_json(in_path);
    io::save_pgm(out_path, field == "goal" ? svf.goal_total : svf.path_total, svf.height,
                 svf.width);
  } else if (kind == "rewards") {
    const RewardGrids r = io::load_rewards_json(in_path);
    io::save_pgm(out_path, field == "goal" ? r.r_goal : r.r_path, r.height, r.width);
  } else if (kind == "forecast") {
    if (scene_path.empty()) throw std::runtime_error("render forecast needs --scene");
    const SceneGrid scene = io::load_scene(scene_path);
    io::render_forecast_pgm(out_path, scene, io::load_forecasts(in_path));
  } else {
    throw std::runtime_error("render: unknown kind " + kind);
  }
  std::cout << "render: wrote " << out_path << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir,
              const CLI::Option* seed_opt, std::uint64_t seed_flag, int threads) {
  BenchmarkConfig cfg;
  std::optional<std::uint64_t> cfg_seed;
  if (!config_path.empty()) {
    const json j = load_config_json(
        config_path,
        {"templates", "arm_halfwidth", "train_scenes_per_template", "test_scenes_per_template",
         "train_agents_per_scene", "test_agents_per_scene", "irl_epochs", "irl_lr", "irl_batch",
         "trajgen_pretrain_steps", "trajgen_finetune_steps", "trajgen_lr", "bc_epochs", "bc_lr",
         "m_eval", "k_small", "k_large", "seed", "N", "t_f", "dt", "t_h", "speed_min",
         "speed_max", "accel_max", "noise_sigma_cells"});
    if (j.contains("templates")) {
      cfg.templates.clear();
      for (const auto& name : j.at("templates"))
        cfg.templates.push_back(template_from_name(name.get<std::string>()));
    }
    cfg.arm_halfwidth = j.value("arm_halfwidth", cfg.arm_halfwidth);
    cfg.train_scenes_per_template =
        j.value("train_scenes_per_template", cfg.train_scenes_per_template);
    cfg.test_scenes_per_template =
        j.value("test_scenes_per_template", cfg.test_scenes_per_template);
    cfg.train_agents_per_scene = j.value("train_agents_per_scene", cfg.train_agents_per_scene);
    cfg.test_agents_per_scene = j.value("test_agents_per_scene", cfg.test_agents_per_scene);
    cfg.irl_epochs = j.value("irl_epochs", cfg.irl_epochs);
    cfg.irl_lr = j.value("irl_lr", cfg.irl_lr);
    cfg.irl_batch = j.value("irl_batch", cfg.irl_batch);
    cfg.trajgen_pretrain_steps = j.value("trajgen_pretrain_steps", cfg.trajgen_pretrain_steps);
    cfg.trajgen_finetune_steps = j.value("trajgen_finetune_steps", cfg.trajgen_finetune_steps);
    cfg.trajgen_lr = j.value("trajgen_lr", cfg.trajgen_lr);
    cfg.bc_epochs = j.value("bc_epochs", cfg.bc_epochs);
    cfg.bc_lr = j.value("bc_lr", cfg.bc_lr);
    cfg.m_eval = j.value("m_eval", cfg.m_eval);
    cfg.k_small = j.value("k_small", cfg.k_small);
    cfg.k_large = j.value("k_large", cfg.k_large);
    cfg.tracks.horizon = j.value("N", cfg.tracks.horizon);
    cfg.tracks.t_f = j.value("t_f", cfg.tracks.t_f);
    cfg.tracks.dt = j.value("dt", cfg.tracks.dt);
    cfg.tracks.t_h = j.value("t_h", cfg.tracks.t_h);
    cfg.tracks.speed_min = j.value("speed_min", cfg.tracks.speed_min);
    cfg.tracks.speed_max = j.value("speed_max", cfg.tracks.speed_max);
    cfg.tracks.accel_max = j.value("accel_max", cfg.tracks.accel_max);
    cfg.tracks.noise_sigma_cells = j.value("noise_sigma_cells", cfg.tracks.noise_sigma_cells);
    if (j.contains("seed")) cfg_seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.seed = resolve_seed(seed_opt, seed_flag, cfg_seed, cfg.seed);
  (void)threads;

  fs::create_directories(out_dir);
  const BenchmarkArtifacts art = run_benchmark(cfg, &std::cout);
  io::save_metrics_csv(fs::path(out_dir) / "metrics.csv", art.report);
  io::save_reward_checkpoint(fs::path(out_dir) / "reward.json", art.reward_params,
                             AdamState::init(art.reward_params.num_params(), cfg.irl_lr));
  io::save_trajgen_checkpoint(fs::path(out_dir) / "trajgen.json", art.trajgen_params,
                              cfg.trajgen_pretrain_steps + cfg.trajgen_finetune_steps);
  io::save_bc_checkpoint(fs::path(out_dir) / "bc.json", art.bc_params);
  std::cout << "bench: wrote report to " << (fs::path(out_dir) / "metrics.csv") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planmax: grid-based MaxEnt IRL trajectory forecasting"};
  app.require_subcommand(1);

  std::uint64_t seed_flag = 0;
  int threads = 1;

  // train-irl
  auto* irl = app.add_subcommand("train-irl", "Train the reward model on a dataset");
  std::string irl_dataset, irl_out, irl_config, irl_resume, irl_loss, irl_holdout;
  irl->add_option("--dataset", irl_dataset, "dataset directory")->required();
  irl->add_option("--out", irl_out, "output checkpoint path")->required();
  irl->add_option("--config", irl_config, "training config JSON");
  irl->add_option("--resume", irl_resume, "checkpoint to continue from");
  irl->add_option("--loss-csv", irl_loss, "write per-epoch losses");
  irl->add_option("--holdout", irl_holdout, "held-out dataset for oracle likelihood");
  auto* irl_seed = irl->add_option("--seed", seed_flag, "seed override");
  irl->add_option("--threads", threads, "worker threads (1 = bit-reproducible order)");

  // train-trajgen
  auto* tg = app.add_subcommand("train-trajgen", "Train the trajectory generator");
  std::string tg_dataset, tg_out, tg_config, tg_reward, tg_resume, tg_loss;
  tg->add_option("--dataset", tg_dataset, "dataset directory")->required();
  tg->add_option("--out", tg_out, "output checkpoint path")->required();
  tg->add_option("--config", tg_config, "training config JSON");
  tg->add_option("--reward", tg_reward, "reward checkpoint (fine-tuning)");
  tg->add_option("--resume", tg_resume, "checkpoint to continue from");
  tg->add_option("--loss-csv", tg_loss, "write per-step losses");
  auto* tg_seed = tg->add_option("--seed", seed_flag, "seed override");
  tg->add_option("--threads", threads, "decode threads");

  // train-bc
  auto* bc = app.add_subcommand("train-bc", "Train the behavior-cloning baseline");
  std::string bc_dataset, bc_out, bc_config, bc_loss;
  bc->add_option("--dataset", bc_dataset, "dataset directory")->required();
  bc->add_option("--out", bc_out, "output checkpoint path")->required();
  bc->add_option("--config", bc_config, "training config JSON");
  bc->add_option("--loss-csv", bc_loss, "write per-epoch losses");
  auto* bc_seed = bc->add_option("--seed", seed_flag, "seed override");

  // forecast
  auto* fc = app.add_subcommand("forecast", "Forecast one agent in one scene");
  ForecastArgs fargs;
  fc->add_option("--scene", fargs.scene_path, "scene file")->required();
  fc->add_option("--tracks", fargs.tracks_path, "track file (JSONL)")->required();
  fc->add_option("--track-id", fargs.track_id, "agent id within the track file");
  fc->add_option("--variant", fargs.variant, "irl | cs | bc")
      ->check(CLI::IsMember({"irl", "cs", "bc"}));
  fc->add_option("--reward", fargs.reward_path, "reward checkpoint");
  fc->add_option("--trajgen", fargs.trajgen_path, "trajectory generator checkpoint");
  fc->add_option("--bc", fargs.bc_path, "behavior cloning checkpoint");
  fc->add_option("--k", fargs.k_values, "cluster counts to emit");
  fc->add_option("--m", fargs.m, "plans to sample");
  fc->add_option("--horizon", fargs.horizon, "MDP horizon N");
  fc->add_option("--t-f", fargs.t_f, "prediction steps");
  fc->add_option("--dt", fargs.dt, "time step seconds");
  fc->add_option("--t-h", fargs.t_h, "history steps");
  fc->add_option("--case-id", fargs.case_id, "case id tag in the output");
  fc->add_option("--out", fargs.out_path, "output JSONL")->required();
  fc->add_option("--attention-csv", fargs.attention_csv, "dump attention weights");
  fc->add_option("--dump-svf", fargs.dump_svf, "write the policy SVF JSON");
  fc->add_option("--dump-rewards", fargs.dump_rewards, "write the reward grids JSON");
  auto* fc_seed = fc->add_option("--seed", fargs.seed, "seed override");
  fc->add_option("--threads", fargs.threads, "decode threads");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score forecasts against a dataset");
  std::string ev_forecasts, ev_dataset, ev_out;
  int ev_k_small = 5, ev_k_large = 10;
  ev->add_option("--forecasts", ev_forecasts, "forecast JSONL")->required();
  ev->add_option("--dataset", ev_dataset, "dataset directory")->required();
  ev->add_option("--out", ev_out, "metrics CSV")->required();
  ev->add_option("--k-small", ev_k_small, "K for the _5 columns");
  ev->add_option("--k-large", ev_k_large, "K for the _10 columns");

  // render
  auto* rd = app.add_subcommand("render", "Render an artifact to a PGM image");
  std::string rd_kind, rd_in, rd_out, rd_scene, rd_field = "path";
  rd->add_option("--kind", rd_kind, "svf | rewards | forecast")
      ->required()
      ->check(CLI::IsMember({"svf", "rewards", "forecast"}));
  rd->add_option("--in", rd_in, "input artifact file")->required();
  rd->add_option("--out", rd_out, "output PGM")->required();
  rd->add_option("--scene", rd_scene, "scene file (forecast overlay)");
  rd->add_option("--field", rd_field, "path | goal")->check(CLI::IsMember({"path", "goal"}));

  // bench
  auto* bn = app.add_subcommand("bench", "Run the synthetic benchmark end to end");
  std::string bn_config, bn_out;
  bn->add_option("--config", bn_config, "benchmark config JSON");
  bn->add_option("--out-dir", bn_out, "output directory")->required();
  auto* bn_seed = bn->add_option("--seed", seed_flag, "seed override");
  bn->add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (irl->parsed())
      return cmd_train_irl(irl_dataset, irl_out, irl_config, irl_resume, irl_loss, irl_holdout,
                           irl_seed, seed_flag, threads);
    if (tg->parsed())
      return cmd_train_trajgen(tg_dataset, tg_out, tg_config, tg_reward, tg_resume, tg_loss,
                               tg_seed, seed_flag, threads);
    if (bc->parsed()) return cmd_train_bc(bc_dataset, bc_out, bc_config, bc_loss, bc_seed,
                                          seed_flag);
    if (fc->parsed()) return cmd_forecast(fargs, fc_seed);
    if (ev->parsed()) return cmd_evaluate(ev_forecasts, ev_dataset, ev_out, ev_k_small,
                                          ev_k_large);
    if (rd->parsed()) return cmd_render(rd_kind, rd_in, rd_out, rd_scene, rd_field);
    if (bn->parsed()) return cmd_bench(bn_config, bn_out, bn_seed, seed_flag, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
