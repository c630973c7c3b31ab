#include "planmax/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace planmax::io {

using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

// %.17g round-trips doubles exactly.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_grid(std::ofstream& out, const std::vector<double>& grid, int width) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << fmt(grid[i]) << ((static_cast<int>(i) % width == width - 1) ? '\n' : ' ');
}

std::vector<double> read_grid(std::istream& in, std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("scene file: truncated grid");
    grid[i] = std::strtod(tok.c_str(), nullptr);
  }
  return grid;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (double x : v) {
    if (std::isfinite(x))
      arr.push_back(x);
    else
      arr.push_back(nullptr);  // -inf in value tables
  }
  return arr;
}

Vec json_to_vec(const json& arr) {
  Vec v;
  v.reserve(arr.size());
  for (const auto& x : arr)
    v.push_back(x.is_null() ? -std::numeric_limits<double>::infinity() : x.get<double>());
  return v;
}

}  // namespace

void save_scene(const fs::path& path, const SceneGrid& scene) {
  scene.validate();
  std::ofstream out = open_out(path);
  json header{{"height", scene.height},       {"width", scene.width},
              {"cell_size", scene.cell_size}, {"x_min", scene.x_min},
              {"y_min", scene.y_min},         {"channels", scene.channel_names},
              {"has_lane_dir", scene.has_lane_dir}};
  out << header.dump() << "\n";
  for (const auto& ch : scene.channels) write_grid(out, ch, scene.width);
  for (std::size_t i = 0; i < scene.drivable.size(); ++i)
    out << int(scene.drivable[i])
        << ((static_cast<int>(i) % scene.width == scene.width - 1) ? '\n' : ' ');
  if (scene.has_lane_dir) write_grid(out, scene.lane_dir, scene.width);
}

SceneGrid load_scene(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw std::runtime_error("scene file: missing header");
  const json header = json::parse(header_line);
  SceneGrid g;
  g.height = header.at("height").get<int>();
  g.width = header.at("width").get<int>();
  g.cell_size = header.at("cell_size").get<double>();
  g.x_min = header.at("x_min").get<double>();
  g.y_min = header.at("y_min").get<double>();
  g.channel_names = header.at("channels").get<std::vector<std::string>>();
  g.has_lane_dir = header.at("has_lane_dir").get<bool>();
  const std::size_t n = static_cast<std::size_t>(g.height) * g.width;
  for (std::size_t c = 0; c < g.channel_names.size(); ++c) g.channels.push_back(read_grid(in, n));
  const std::vector<double> drv = read_grid(in, n);
  g.drivable.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.drivable[i] = drv[i] != 0.0 ? 1 : 0;
  if (g.has_lane_dir)
    g.lane_dir = read_grid(in, n);
  else
    g.lane_dir.assign(n, std::nan(""));
  g.validate();
  return g;
}

void save_tracks(const fs::path& path, const std::vector<TrackRecord>& records) {
  std::ofstream out = open_out(path);
  for (const TrackRecord& r : records) {
    json rec{{"track_id", r.track_id}, {"t", r.sample.t},   {"x", r.sample.x},
             {"y", r.sample.y},        {"vx", r.sample.vx}, {"vy", r.sample.vy},
             {"ax", r.sample.ax},      {"ay", r.sample.ay}, {"yaw_rate", r.sample.yaw_rate}};
    out << rec.dump() << "\n";
  }
}

std::map<int, LoadedTrack> load_tracks(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::map<int, LoadedTrack> tracks;
  std::map<int, std::vector<std::pair<double, Vec2>>> futures;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    WorldSample s;
    s.t = rec.at("t").get<double>();
    s.x = rec.at("x").get<double>();
    s.y = rec.at("y").get<double>();
    s.vx = rec.value("vx", 0.0);
    s.vy = rec.value("vy", 0.0);
    s.ax = rec.value("ax", 0.0);
    s.ay = rec.value("ay", 0.0);
    s.yaw_rate = rec.value("yaw_rate", 0.0);
    const int id = rec.at("track_id").get<int>();
    if (s.t <= 0.0)
      tracks[id].history.samples.push_back(s);
    else
      futures[id].push_back({s.t, {s.x, s.y}});
  }
  for (auto& [id, fut] : futures) {
    std::sort(fut.begin(), fut.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [t, p] : fut) tracks[id].future_world.push_back(p);
  }
  for (auto& [id, tr] : tracks)
    std::sort(tr.history.samples.begin(), tr.history.samples.end(),
              [](const WorldSample& a, const WorldSample& b) { return a.t < b.t; });
  return tracks;
}

void save_dataset(const fs::path& dir, const std::vector<SceneGrid>& scenes,
                  const std::vector<std::vector<SynthAgent>>& agents_per_scene,
                  const DatasetParams& params) {
  if (scenes.size() != agents_per_scene.size())
    throw std::invalid_argument("save_dataset: scene/agent count mismatch");
  fs::create_directories(dir / "scenes");
  fs::create_directories(dir / "tracks");
  json cases = json::array();
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    char name[32];
    std::snprintf(name, sizeof(name), "s%04zu", si);
    const std::string scene_rel = std::string("scenes/") + name + ".txt";
    const std::string tracks_rel = std::string("tracks/") + name + ".jsonl";
    save_scene(dir / scene_rel, scenes[si]);
    std::vector<TrackRecord> records;
    for (std::size_t ai = 0; ai < agents_per_scene[si].size(); ++ai) {
      const SynthAgent& a = agents_per_scene[si][ai];
      for (const WorldSample& s : a.track.samples)
        records.push_back({static_cast<int>(ai), s});
      // Future snapshots carry positions only; velocity fields stay zero.
      for (std::size_t k = 0; k < a.future_world.size(); ++k) {
        WorldSample s;
        s.t = (static_cast<double>(k) + 1.0) * params.dt;
        s.x = a.future_world[k].x;
        s.y = a.future_world[k].y;
        records.push_back({static_cast<int>(ai), s});
      }
      cases.push_back(json{{"scene", scene_rel},
                           {"tracks", tracks_rel},
                           {"track_id", static_cast<int>(ai)}});
    }
    save_tracks(dir / tracks_rel, records);
  }
  json manifest{{"dt", params.dt},
                {"t_h", params.t_h},
                {"t_f", params.t_f},
                {"horizon", params.horizon},
                {"cases", cases}};
  std::ofstream out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

LoadedDataset load_dataset(const fs::path& dir) {
  std::ifstream in = open_in(dir / "manifest.json");
  const json manifest = json::parse(in);
  LoadedDataset ds;
  ds.params.dt = manifest.at("dt").get<double>();
  ds.params.t_h = manifest.at("t_h").get<int>();
  ds.params.t_f = manifest.at("t_f").get<int>();
  ds.params.horizon = manifest.value("horizon", 50);

  std::map<std::string, int> scene_index;
  std::map<std::string, std::map<int, LoadedTrack>> track_files;
  for (const json& c : manifest.at("cases")) {
    const std::string scene_rel = c.at("scene").get<std::string>();
    if (!scene_index.count(scene_rel)) {
      scene_index[scene_rel] = static_cast<int>(ds.scenes.size());
      ds.scenes.push_back(load_scene(dir / scene_rel));
    }
  }
  for (const json& c : manifest.at("cases")) {
    const std::string scene_rel = c.at("scene").get<std::string>();
    const std::string tracks_rel = c.at("tracks").get<std::string>();
    const int track_id = c.at("track_id").get<int>();
    if (!track_files.count(tracks_rel)) track_files[tracks_rel] = load_tracks(dir / tracks_rel);
    const auto& per_id = track_files[tracks_rel];
    const auto it = per_id.find(track_id);
    if (it == per_id.end())
      throw std::runtime_error("dataset: track_id " + std::to_string(track_id) + " missing in " +
                               tracks_rel);
    const SceneGrid& scene = ds.scenes[scene_index[scene_rel]];

    SynthCase sc;
    sc.scene_index = scene_index[scene_rel];
    const AgentFrame frame = build_agent_frame(it->second.history);
    sc.history = make_track_history(it->second.history, frame, ds.params.t_h, ds.params.dt);
    for (const Vec2& p : it->second.future_world) sc.future.points.push_back(frame.to_agent(p));
    std::vector<Vec2> raster_input{{0.0, 0.0}};
    raster_input.insert(raster_input.end(), sc.future.points.begin(), sc.future.points.end());
    sc.gt_plan = rasterize_track_to_plan(raster_input, scene).plan;
    sc.features = assemble_features(scene, sc.history);
    ds.cases.push_back(std::move(sc));
  }
  return ds;
}

namespace {

json adam_to_json(const AdamState& adam) {
  return json{{"m", adam.m},     {"v", adam.v},         {"step", adam.step},
              {"lr", adam.lr},   {"beta1", adam.beta1}, {"beta2", adam.beta2},
              {"eps", adam.eps}};
}

AdamState adam_from_json(const json& j, std::size_t dim) {
  AdamState adam;
  adam.m = j.at("m").get<Vec>();
  adam.v = j.at("v").get<Vec>();
  adam.step = j.at("step").get<long>();
  adam.lr = j.at("lr").get<double>();
  adam.beta1 = j.at("beta1").get<double>();
  adam.beta2 = j.at("beta2").get<double>();
  adam.eps = j.at("eps").get<double>();
  if (adam.m.size() != dim || adam.v.size() != dim)
    throw std::runtime_error("checkpoint: adam state size mismatch");
  return adam;
}

}  // namespace

void save_reward_checkpoint(const fs::path& path, const RewardParams& params,
                            const AdamState& adam) {
  json j{{"schema", "planmax-reward-v1"},
         {"feature_dim", params.path_head.in_dim()},
         {"hidden", params.path_head.hidden_dim()},
         {"params", params.flatten()},
         {"adam", adam_to_json(adam)}};
  open_out(path) << j.dump(2) << "\n";
}

RewardCheckpoint load_reward_checkpoint(const fs::path& path) {
  std::ifstream in = open_in(path);
  const json j = json::parse(in);
  if (j.at("schema") != "planmax-reward-v1")
    throw std::runtime_error("not a reward checkpoint: " + path.string());
  RewardCheckpoint ck;
  ck.params = RewardParams::zeros(j.at("feature_dim").get<int>(), j.at("hidden").get<int>());
  ck.params.unflatten(j.at("params").get<Vec>());
  ck.adam = adam_from_json(j.at("adam"), ck.params.num_params());
  return ck;
}

void save_trajgen_checkpoint(const fs::path& path, const TrajGenParams& params, long step) {
  json j{{"schema", "planmax-trajgen-v1"},
         {"scene_dim", params.scene_dim()},
         {"step", step},
         {"params", params.flatten()}};
  open_out(path) << j.dump(2) << "\n";
}

TrajGenCheckpoint load_trajgen_checkpoint(const fs::path& path) {
  std::ifstream in = open_in(path);
  const json j = json::parse(in);
  if (j.at("schema") != "planmax-trajgen-v1")
    throw std::runtime_error("not a trajgen checkpoint: " + path.string());
  TrajGenCheckpoint ck;
  ck.params = TrajGenParams::zeros(j.at("scene_dim").get<int>());
  ck.params.unflatten(j.at("params").get<Vec>());
  ck.step = j.at("step").get<long>();
  return ck;
}

void save_bc_checkpoint(const fs::path& path, const BcParams& params) {
  Vec theta(params.net.num_params());
  params.net.flatten_into(theta);
  json j{{"schema", "planmax-bc-v1"},
         {"feature_dim", params.net.in_dim()},
         {"hidden", params.net.hidden_dim()},
         {"out", params.net.out_dim()},
         {"params", theta}};
  open_out(path) << j.dump(2) << "\n";
}

BcParams load_bc_checkpoint(const fs::path& path) {
  std::ifstream in = open_in(path);
  const json j = json::parse(in);
  if (j.at("schema") != "planmax-bc-v1")
    throw std::runtime_error("not a bc checkpoint: " + path.string());
  BcParams p;
  p.net = CellMlp::zeros(j.at("feature_dim").get<int>(), j.at("hidden").get<int>(),
                         j.at("out").get<int>());
  p.net.unflatten_from(j.at("params").get<Vec>());
  return p;
}

void save_forecasts(const fs::path& path, const std::vector<ForecastRecord>& records) {
  std::ofstream out = open_out(path);
  for (const ForecastRecord& r : records) {
    json pts = json::array();
    for (const Vec2& p : r.points) pts.push_back(json::array({p.x, p.y}));
    json rec{{"variant", r.variant}, {"case_id", r.case_id}, {"k_set", r.k_set},
             {"k_index", r.k_index}, {"members", r.members}, {"points", pts}};
    out << rec.dump() << "\n";
  }
}

std::vector<ForecastRecord> load_forecasts(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<ForecastRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    ForecastRecord r;
    r.variant = rec.at("variant").get<std::string>();
    r.case_id = rec.value("case_id", 0);
    r.k_set = rec.value("k_set", 0);
    r.k_index = rec.at("k_index").get<int>();
    r.members = rec.at("members").get<int>();
    for (const auto& p : rec.at("points")) r.points.push_back({p[0].get<double>(), p[1].get<double>()});
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ForecastRecord> forecast_to_records(const ForecastSet& set, int case_id, int k_set) {
  std::vector<ForecastRecord> out;
  for (int k = 0; k < set.k(); ++k) {
    ForecastRecord r;
    r.variant = variant_name(set.variant);
    r.case_id = case_id;
    r.k_set = k_set;
    r.k_index = k;
    r.members = set.members[k];
    r.points = set.trajectories[k].points;
    out.push_back(std::move(r));
  }
  return out;
}

void save_metrics_csv(const fs::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out = open_out(path);
  out << "variant,minade_5,minade_10,minfde_5,minfde_10,mr_5_2,mr_10_2,offroad,offyaw\n";
  for (const MetricRow& r : rows) {
    out << variant_name(r.variant) << ',' << fmt(r.minade_5) << ',' << fmt(r.minade_10) << ','
        << fmt(r.minfde_5) << ',' << fmt(r.minfde_10) << ',' << fmt(r.mr_5_2) << ','
        << fmt(r.mr_10_2) << ',' << fmt(r.offroad) << ',';
    if (r.offyaw) out << fmt(*r.offyaw);
    out << '\n';
  }
}

void save_loss_csv(const fs::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out = open_out(path);
  out << "epoch,train_nll_proxy,oracle_nll\n";
  for (const EpochLog& row : log) {
    out << row.epoch << ',' << fmt(row.train_nll) << ',';
    if (row.holdout_nll) out << fmt(*row.holdout_nll);
    out << '\n';
  }
}

void save_svf_json(const fs::path& path, const Svf& svf) {
  json steps_path = json::array(), steps_goal = json::array();
  for (const auto& d : svf.path_step) steps_path.push_back(vec_to_json(d));
  for (const auto& d : svf.goal_step) steps_goal.push_back(vec_to_json(d));
  json j{{"schema", "planmax-svf-v1"},
         {"height", svf.height},
         {"width", svf.width},
         {"path_step", steps_path},
         {"goal_step", steps_goal},
         {"path_total", vec_to_json(svf.path_total)},
         {"goal_total", vec_to_json(svf.goal_total)}};
  open_out(path) << j.dump() << "\n";
}

Svf load_svf_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  const json j = json::parse(in);
  if (j.at("schema") != "planmax-svf-v1")
    throw std::runtime_error("not an svf export: " + path.string());
  Svf svf;
  svf.height = j.at("height").get<int>();
  svf.width = j.at("width").get<int>();
  for (const auto& d : j.at("path_step")) svf.path_step.push_back(json_to_vec(d));
  for (const auto& d : j.at("goal_step")) svf.goal_step.push_back(json_to_vec(d));
  svf.path_total = json_to_vec(j.at("path_total"));
  svf.goal_total = json_to_vec(j.at("goal_total"));
  return svf;
}

void save_policy_json(const fs::path& path, const Policy& policy) {
  json v = json::array(), q = json::array(), pi = json::array();
  for (const auto& grid : policy.v) v.push_back(vec_to_json(grid));
  for (const auto& grid : policy.q) q.push_back(vec_to_json(grid));
  for (const auto& grid : policy.pi) pi.push_back(vec_to_json(grid));
  json j{{"schema", "planmax-policy-v1"},
         {"kind", policy.kind == PolicyKind::InferredGoals ? "inferred" : "goal_conditioned"},
         {"height", policy.height},
         {"width", policy.width},
         {"horizon", policy.horizon},
         {"num_actions", policy.num_actions},
         {"v", v},
         {"q", q},
         {"pi", pi}};
  open_out(path) << j.dump() << "\n";
}

void save_rewards_json(const fs::path& path, const RewardGrids& rewards) {
  json j{{"schema", "planmax-rewards-v1"},
         {"height", rewards.height},
         {"width", rewards.width},
         {"r_path", vec_to_json(rewards.r_path)},
         {"r_goal", vec_to_json(rewards.r_goal)}};
  open_out(path) << j.dump() << "\n";
}

RewardGrids load_rewards_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  const json j = json::parse(in);
  if (j.at("schema") != "planmax-rewards-v1")
    throw std::runtime_error("not a rewards export: " + path.string());
  RewardGrids r;
  r.height = j.at("height").get<int>();
  r.width = j.at("width").get<int>();
  r.r_path = json_to_vec(j.at("r_path"));
  r.r_goal = json_to_vec(j.at("r_goal"));
  return r;
}

void save_pgm(const fs::path& path, const std::vector<double>& values, int height, int width) {
  if (static_cast<std::size_t>(height) * width != values.size())
    throw std::invalid_argument("save_pgm: size mismatch");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::ofstream out = open_out(path);
  out << "P5\n" << width << " " << height << "\n255\n";
  for (double v : values) {
    unsigned char px = 0;
    if (std::isfinite(v) && hi > lo)
      px = static_cast<unsigned char>(std::lround(255.0 * (v - lo) / (hi - lo)));
    out.put(static_cast<char>(px));
  }
}

void render_forecast_pgm(const fs::path& path, const SceneGrid& scene,
                         const std::vector<ForecastRecord>& records) {
  std::vector<double> img(static_cast<std::size_t>(scene.height) * scene.width, 0.0);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = scene.drivable[i] ? 64.0 : 0.0;
  auto stamp = [&](int r, int c) {
    if (scene.in_bounds(r, c)) img[scene.index(r, c)] = 255.0;
  };
  for (const ForecastRecord& rec : records) {
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
      const Vec2 a = i == 0 ? Vec2{0.0, 0.0} : rec.points[i - 1];
      const Vec2 b = rec.points[i];
      // Rasterize the segment by fixed subsampling; cheap and exact enough
      // for cell-level overlays.
      const int steps = 1 + static_cast<int>((b - a).norm() / (0.25 * scene.cell_size));
      for (int s = 0; s <= steps; ++s) {
        const double w = static_cast<double>(s) / steps;
        const auto [r, c] = scene.cell_of({a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)});
        stamp(r, c);
      }
    }
  }
  save_pgm(path, img, scene.height, scene.width);
}

void save_attention_csv(const fs::path& path,
                        const std::vector<std::vector<Vec>>& per_sample_weights) {
  std::ofstream out = open_out(path);
  out << "sample,step,weights\n";
  for (std::size_t s = 0; s < per_sample_weights.size(); ++s) {
    for (std::size_t t = 0; t < per_sample_weights[s].size(); ++t) {
      out << s << ',' << t << ',';
      const Vec& w = per_sample_weights[s][t];
      for (std::size_t i = 0; i < w.size(); ++i) out << (i ? ";" : "") << fmt(w[i]);
      out << '\n';
    }
  }
}

}  // namespace planmax::io
