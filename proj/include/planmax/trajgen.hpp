#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "planmax/features.hpp"
#include "planmax/geometry.hpp"
#include "planmax/linalg.hpp"
#include "planmax/maxent.hpp"

namespace planmax {

// Continuous future positions in the agent frame at fixed time steps.
struct Trajectory {
  std::vector<Vec2> points;
  std::size_t horizon() const { return points.size(); }
};

struct Linear {
  Mat w;
  Vec b;
  std::size_t num_params() const { return w.data.size() + b.size(); }
};

// Gated recurrent cell:
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   n = tanh(Wn x + bn + r .* (Un h))
//   h' = (1 - z) .* n + z .* h
// w_in stacks [Wz; Wr; Wn], w_rec stacks [Uz; Ur; Un], bias [bz; br; bn].
struct GruParams {
  Mat w_in;   // 3H x In
  Mat w_rec;  // 3H x H
  Vec bias;   // 3H
  int hidden() const { return static_cast<int>(w_rec.cols); }
  int input() const { return static_cast<int>(w_in.cols); }
  std::size_t num_params() const { return w_in.data.size() + w_rec.data.size() + bias.size(); }
};

// Recurrent plan-conditioned trajectory generator:
//   motion encoder   GRU over embedded track samples -> h_m0
//   plan encoder     BiGRU over embedded (location, scene, agent) features
//   decoder          GRU with soft attention over the plan encoding,
//                    initialized with h_m0, projected to 2-D positions
//
// Flattening order: embed_motion, gru_motion, embed_loc, embed_scene,
// embed_agents, gru_plan_fwd, gru_plan_bwd, att_hidden, att_out, gru_dec,
// out_proj; Linear as (w row-major, b), GRU as (w_in, w_rec, bias).
struct TrajGenParams {
  Linear embed_motion;  // 5 -> 16, relu
  GruParams gru_motion;  // 16 -> 32
  Linear embed_loc;      // 2 -> 16, relu
  Linear embed_scene;    // scene_dim -> 32, relu
  Linear embed_agents;   // 3 -> 16, relu
  GruParams gru_plan_fwd;  // 64 -> 32
  GruParams gru_plan_bwd;  // 64 -> 32
  Linear att_hidden;  // (32 + 64) -> 32, relu
  Linear att_out;     // 32 -> 1
  GruParams gru_dec;  // 64 -> 32
  Linear out_proj;    // 32 -> 2

  int scene_dim() const { return static_cast<int>(embed_scene.w.cols); }
  std::size_t num_params() const;
  Vec flatten() const;
  void unflatten(const Vec& theta);

  static TrajGenParams zeros(int scene_dim);
  static TrajGenParams init(int scene_dim, std::uint64_t seed);
};

inline constexpr int kMotionInputDim = 5;  // x, y, speed, accel, yaw rate
inline constexpr int kAgentChannelDim = 3;
inline constexpr int kHidden = 32;

// Final recurrent state after consuming the embedded track history in
// chronological order.
Vec encode_motion(const TrackHistory& track, const TrajGenParams& params);

// Per-state bidirectional encodings (forward state, backward state
// concatenated, 64-dim); output length equals plan length.
std::vector<Vec> encode_plan(const Plan& plan, const FeatureGrid& features,
                             const TrajGenParams& params);

struct DecodeResult {
  Trajectory trajectory;
  std::vector<Vec> attention;  // per output step, one weight per plan state
};

DecodeResult decode_trajectory(const Vec& h_m0, const std::vector<Vec>& plan_encoding,
                               const TrajGenParams& params, int t_f);

// Forward pass with every intermediate needed for exact BPTT.
struct TrajGenTape;

struct TrajGenRun {
  DecodeResult out;
  std::shared_ptr<TrajGenTape> tape;
};

TrajGenRun run_generator(const TrackHistory& track, const Plan& plan,
                         const FeatureGrid& features, const TrajGenParams& params, int t_f);

// Exact reverse-mode gradient of sum_t dy[t] . y[t] through decoder,
// attention, plan encoder and motion encoder; accumulates into grads
// (same shapes as params).
void backprop_generator(const TrajGenRun& run, const TrajGenParams& params,
                        const std::vector<Vec2>& dy, TrajGenParams& grads);

// Mean pointwise L2 distance (Eq.-style average displacement error) and its
// gradient with respect to the predicted points.
double ade(const Trajectory& pred, const Trajectory& gt);
std::vector<Vec2> ade_gradient(const Trajectory& pred, const Trajectory& gt);

// Natural cubic spline through the plan's deduplicated cell centers,
// chord-length parameterized, evaluated at the given arc positions
// (clamped to the spline's extent).
Trajectory spline_rollout(const Plan& plan, const SceneGrid& grid,
                          std::span<const double> arc_positions);

// Constant-speed baseline: the spline sampled at k * speed * dt.
Trajectory constant_speed_rollout(const Plan& plan, const SceneGrid& grid, double speed, int t_f,
                                  double dt);

struct TrajGenExample {
  TrackHistory track;
  FeatureGrid features;
  Plan gt_plan;
  Trajectory gt_future;
};

struct TrajGenTrainConfig {
  int t_f = 12;
  double dt = 0.5;
  int pretrain_steps = 2000;   // stage 1: decode the ground-truth plan
  int finetune_steps = 0;      // stage 2: sampled plans, clustered MinADE_K
  int sample_count = 200;      // plans sampled per stage-2 step
  int k = 10;                  // clusters for the stage-2 loss
  double lr = 1e-4;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct TrajGenTrainResult {
  TrajGenParams params;
  std::vector<double> loss_log;  // one entry per optimization step
  long final_step = 0;
};

// Stage-1 pretraining on ground-truth plans, then optional stage-2
// fine-tuning with plans sampled from the per-example policies (parallel
// array; required when finetune_steps > 0). Gradients of the clustered
// MinADE_K loss flow through the members of the arg-min cluster with the
// partition held fixed.
TrajGenTrainResult train_trajgen(const std::vector<TrajGenExample>& dataset,
                                 const std::vector<Policy>& policies,
                                 const TrajGenTrainConfig& config,
                                 const TrajGenParams* resume_params = nullptr,
                                 long resume_step = 0);

}  // namespace planmax
