#include "planmax/trajgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "planmax/kmeans.hpp"
#include "planmax/optim.hpp"
#include "planmax/reward_model.hpp"
#include "planmax/rng.hpp"

namespace planmax {

namespace {

Vec linear_relu(const Linear& lin, const Vec& x) {
  Vec out = matvec(lin.w, x);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += lin.b[i];
    if (out[i] < 0.0) out[i] = 0.0;
  }
  return out;
}

// Backward through relu(W x + b) given the post-relu output; accumulates
// into parameter grads and optionally dx.
void linear_relu_backward(const Linear& lin, const Vec& x, const Vec& out, const Vec& dout,
                          Linear& grads, Vec* dx) {
  Vec dpre(dout.size());
  for (std::size_t i = 0; i < dout.size(); ++i) dpre[i] = out[i] > 0.0 ? dout[i] : 0.0;
  add_outer(grads.w, dpre, x);
  axpy(1.0, dpre, grads.b);
  if (dx) {
    Vec t = matvec_t(lin.w, dpre);
    axpy(1.0, t, *dx);
  }
}

struct GruCache {
  Vec x, h_prev, z, r, n, u_n;
};

Vec gru_forward(const GruParams& p, const Vec& x, const Vec& h_prev, GruCache& cache) {
  const int hid = p.hidden();
  Vec a = matvec(p.w_in, x);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += p.bias[i];
  const Vec u = matvec(p.w_rec, h_prev);
  Vec z(hid), r(hid), n(hid), u_n(hid), h(hid);
  for (int i = 0; i < hid; ++i) {
    z[i] = sigmoid(a[i] + u[i]);
    r[i] = sigmoid(a[hid + i] + u[hid + i]);
    u_n[i] = u[2 * hid + i];
    n[i] = std::tanh(a[2 * hid + i] + r[i] * u_n[i]);
    h[i] = (1.0 - z[i]) * n[i] + z[i] * h_prev[i];
  }
  cache = {x, h_prev, z, r, n, u_n};
  return h;
}

void gru_backward(const GruParams& p, const GruCache& c, const Vec& dh, GruParams& grads,
                  Vec* dx, Vec& dh_prev) {
  const int hid = p.hidden();
  Vec da(3 * hid), du(3 * hid);
  for (int i = 0; i < hid; ++i) {
    const double dz = dh[i] * (c.h_prev[i] - c.n[i]);
    const double dn = dh[i] * (1.0 - c.z[i]);
    dh_prev[i] += dh[i] * c.z[i];
    const double dn_pre = dn * (1.0 - c.n[i] * c.n[i]);
    da[2 * hid + i] = dn_pre;
    du[2 * hid + i] = dn_pre * c.r[i];
    const double dr = dn_pre * c.u_n[i];
    const double dr_pre = dr * c.r[i] * (1.0 - c.r[i]);
    da[hid + i] = dr_pre;
    du[hid + i] = dr_pre;
    const double dz_pre = dz * c.z[i] * (1.0 - c.z[i]);
    da[i] = dz_pre;
    du[i] = dz_pre;
  }
  add_outer(grads.w_in, da, c.x);
  add_outer(grads.w_rec, du, c.h_prev);
  axpy(1.0, da, grads.bias);
  if (dx) {
    Vec t = matvec_t(p.w_in, da);
    axpy(1.0, t, *dx);
  }
  Vec t = matvec_t(p.w_rec, du);
  axpy(1.0, t, dh_prev);
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Vec concat3(const Vec& a, const Vec& b, const Vec& c) {
  Vec out;
  out.reserve(a.size() + b.size() + c.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

Vec motion_input(const TrackSample& s) {
  return {s.pos.x, s.pos.y, s.speed, s.accel, s.yaw_rate};
}

Mat glorot_mat(int rows, int cols, int fan_in, int fan_out, std::mt19937_64& rng) {
  Mat m(rows, cols);
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> unif(-a, a);
  for (double& v : m.data) v = unif(rng);
  return m;
}

Linear make_linear(int out, int in, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Linear l;
  l.w = glorot_mat(out, in, in, out, rng);
  l.b = Vec(out, 0.0);
  return l;
}

GruParams make_gru(int in, int hid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GruParams g;
  g.w_in = glorot_mat(3 * hid, in, in, hid, rng);
  g.w_rec = glorot_mat(3 * hid, hid, hid, hid, rng);
  g.bias = Vec(3 * hid, 0.0);
  return g;
}

}  // namespace

std::size_t TrajGenParams::num_params() const {
  return embed_motion.num_params() + gru_motion.num_params() + embed_loc.num_params() +
         embed_scene.num_params() + embed_agents.num_params() + gru_plan_fwd.num_params() +
         gru_plan_bwd.num_params() + att_hidden.num_params() + att_out.num_params() +
         gru_dec.num_params() + out_proj.num_params();
}

namespace {

template <typename Fn>
void for_each_component(TrajGenParams& p, Fn&& fn) {
  fn(p.embed_motion.w.data);
  fn(p.embed_motion.b);
  fn(p.gru_motion.w_in.data);
  fn(p.gru_motion.w_rec.data);
  fn(p.gru_motion.bias);
  fn(p.embed_loc.w.data);
  fn(p.embed_loc.b);
  fn(p.embed_scene.w.data);
  fn(p.embed_scene.b);
  fn(p.embed_agents.w.data);
  fn(p.embed_agents.b);
  fn(p.gru_plan_fwd.w_in.data);
  fn(p.gru_plan_fwd.w_rec.data);
  fn(p.gru_plan_fwd.bias);
  fn(p.gru_plan_bwd.w_in.data);
  fn(p.gru_plan_bwd.w_rec.data);
  fn(p.gru_plan_bwd.bias);
  fn(p.att_hidden.w.data);
  fn(p.att_hidden.b);
  fn(p.att_out.w.data);
  fn(p.att_out.b);
  fn(p.gru_dec.w_in.data);
  fn(p.gru_dec.w_rec.data);
  fn(p.gru_dec.bias);
  fn(p.out_proj.w.data);
  fn(p.out_proj.b);
}

}  // namespace

Vec TrajGenParams::flatten() const {
  Vec theta;
  theta.reserve(num_params());
  for_each_component(const_cast<TrajGenParams&>(*this),
                     [&theta](const Vec& v) { theta.insert(theta.end(), v.begin(), v.end()); });
  return theta;
}

void TrajGenParams::unflatten(const Vec& theta) {
  if (theta.size() != num_params()) throw std::invalid_argument("TrajGenParams::unflatten: size");
  std::size_t off = 0;
  for_each_component(*this, [&theta, &off](Vec& v) {
    std::copy(theta.begin() + off, theta.begin() + off + v.size(), v.begin());
    off += v.size();
  });
}

TrajGenParams TrajGenParams::zeros(int scene_dim) {
  TrajGenParams p;
  p.embed_motion = {Mat(16, kMotionInputDim), Vec(16, 0.0)};
  p.gru_motion = {Mat(3 * kHidden, 16), Mat(3 * kHidden, kHidden), Vec(3 * kHidden, 0.0)};
  p.embed_loc = {Mat(16, 2), Vec(16, 0.0)};
  p.embed_scene = {Mat(kHidden, scene_dim), Vec(kHidden, 0.0)};
  p.embed_agents = {Mat(16, kAgentChannelDim), Vec(16, 0.0)};
  p.gru_plan_fwd = {Mat(3 * kHidden, 64), Mat(3 * kHidden, kHidden), Vec(3 * kHidden, 0.0)};
  p.gru_plan_bwd = {Mat(3 * kHidden, 64), Mat(3 * kHidden, kHidden), Vec(3 * kHidden, 0.0)};
  p.att_hidden = {Mat(kHidden, kHidden + 2 * kHidden), Vec(kHidden, 0.0)};
  p.att_out = {Mat(1, kHidden), Vec(1, 0.0)};
  p.gru_dec = {Mat(3 * kHidden, 2 * kHidden), Mat(3 * kHidden, kHidden), Vec(3 * kHidden, 0.0)};
  p.out_proj = {Mat(2, kHidden), Vec(2, 0.0)};
  return p;
}

TrajGenParams TrajGenParams::init(int scene_dim, std::uint64_t seed) {
  TrajGenParams p;
  p.embed_motion = make_linear(16, kMotionInputDim, derive_seed(seed, 0));
  p.gru_motion = make_gru(16, kHidden, derive_seed(seed, 1));
  p.embed_loc = make_linear(16, 2, derive_seed(seed, 2));
  p.embed_scene = make_linear(kHidden, scene_dim, derive_seed(seed, 3));
  p.embed_agents = make_linear(16, kAgentChannelDim, derive_seed(seed, 4));
  p.gru_plan_fwd = make_gru(64, kHidden, derive_seed(seed, 5));
  p.gru_plan_bwd = make_gru(64, kHidden, derive_seed(seed, 6));
  p.att_hidden = make_linear(kHidden, 3 * kHidden, derive_seed(seed, 7));
  p.att_out = make_linear(1, kHidden, derive_seed(seed, 8));
  p.gru_dec = make_gru(2 * kHidden, kHidden, derive_seed(seed, 9));
  p.out_proj = make_linear(2, kHidden, derive_seed(seed, 10));
  return p;
}

struct TrajGenTape {
  // motion encoder
  std::vector<Vec> m_in, m_emb;
  std::vector<GruCache> m_gru;
  Vec h_m0;
  // plan encoder
  std::vector<Vec> p_loc, p_scene, p_occ;
  std::vector<Vec> p_loc_e, p_scene_e, p_occ_e;
  std::vector<Vec> p_x;
  std::vector<GruCache> p_fwd, p_bwd;
  std::vector<Vec> h_s;
  // decoder
  std::vector<Vec> d_h;  // T_f + 1 entries, [0] = h_m0
  std::vector<GruCache> d_gru;
  std::vector<std::vector<Vec>> att_hid;  // per step, per plan state
  std::vector<Vec> att_w;
  std::vector<Vec> ctx;
  Trajectory traj;
};

namespace {

void encode_motion_tape(const TrackHistory& track, const TrajGenParams& params,
                        TrajGenTape& tape) {
  track.validate();
  Vec h(kHidden, 0.0);
  for (const TrackSample& s : track.samples) {
    tape.m_in.push_back(motion_input(s));
    tape.m_emb.push_back(linear_relu(params.embed_motion, tape.m_in.back()));
    GruCache cache;
    h = gru_forward(params.gru_motion, tape.m_emb.back(), h, cache);
    tape.m_gru.push_back(std::move(cache));
  }
  tape.h_m0 = h;
}

void encode_plan_tape(const Plan& plan, const FeatureGrid& features, const TrajGenParams& params,
                      TrajGenTape& tape) {
  if (plan.states.empty()) throw std::invalid_argument("encode_plan: empty plan");
  const std::size_t len = plan.states.size();
  for (const GridState& s : plan.states) {
    const double* f = features.at(s.row, s.col);
    const int sd = features.scene_dim;
    tape.p_loc.push_back({f[sd + 1], f[sd + 2]});  // agent-frame cell center
    tape.p_scene.push_back(Vec(f, f + sd));
    const double* occ = features.occupancy_at(s.row, s.col);
    tape.p_occ.push_back(Vec(occ, occ + kAgentChannelDim));
    tape.p_loc_e.push_back(linear_relu(params.embed_loc, tape.p_loc.back()));
    tape.p_scene_e.push_back(linear_relu(params.embed_scene, tape.p_scene.back()));
    tape.p_occ_e.push_back(linear_relu(params.embed_agents, tape.p_occ.back()));
    tape.p_x.push_back(concat3(tape.p_loc_e.back(), tape.p_scene_e.back(), tape.p_occ_e.back()));
  }
  std::vector<Vec> hf(len), hb(len);
  tape.p_fwd.resize(len);
  tape.p_bwd.resize(len);
  Vec h(kHidden, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    h = gru_forward(params.gru_plan_fwd, tape.p_x[i], h, tape.p_fwd[i]);
    hf[i] = h;
  }
  h.assign(kHidden, 0.0);
  for (std::size_t i = len; i-- > 0;) {
    h = gru_forward(params.gru_plan_bwd, tape.p_x[i], h, tape.p_bwd[i]);
    hb[i] = h;
  }
  for (std::size_t i = 0; i < len; ++i) tape.h_s.push_back(concat(hf[i], hb[i]));
}

Vec attention_context(const TrajGenParams& params, const Vec& h_dec,
                      const std::vector<Vec>& h_s, Vec& weights, std::vector<Vec>& hid_cache) {
  const std::size_t len = h_s.size();
  Vec scores(len);
  hid_cache.resize(len);
  for (std::size_t n = 0; n < len; ++n) {
    const Vec cat = concat(h_dec, h_s[n]);
    hid_cache[n] = linear_relu(params.att_hidden, cat);
    scores[n] = dot(Vec(params.att_out.w.data), hid_cache[n]) + params.att_out.b[0];
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  weights.resize(len);
  for (std::size_t n = 0; n < len; ++n) {
    weights[n] = std::exp(scores[n] - mx);
    total += weights[n];
  }
  Vec ctx(2 * kHidden, 0.0);
  for (std::size_t n = 0; n < len; ++n) {
    weights[n] /= total;
    axpy(weights[n], h_s[n], ctx);
  }
  return ctx;
}

void decode_tape(const TrajGenParams& params, int t_f, TrajGenTape& tape) {
  if (t_f < 1) throw std::invalid_argument("decode_trajectory: t_f must be >= 1");
  tape.d_h.push_back(tape.h_m0);
  for (int t = 0; t < t_f; ++t) {
    Vec weights;
    std::vector<Vec> hid;
    Vec ctx = attention_context(params, tape.d_h.back(), tape.h_s, weights, hid);
    tape.att_w.push_back(std::move(weights));
    tape.att_hid.push_back(std::move(hid));
    GruCache cache;
    Vec h = gru_forward(params.gru_dec, ctx, tape.d_h.back(), cache);
    tape.ctx.push_back(std::move(ctx));
    tape.d_gru.push_back(std::move(cache));
    tape.d_h.push_back(h);
    Vec y = matvec(params.out_proj.w, h);
    tape.traj.points.push_back({y[0] + params.out_proj.b[0], y[1] + params.out_proj.b[1]});
  }
}

}  // namespace

Vec encode_motion(const TrackHistory& track, const TrajGenParams& params) {
  TrajGenTape tape;
  encode_motion_tape(track, params, tape);
  return tape.h_m0;
}

std::vector<Vec> encode_plan(const Plan& plan, const FeatureGrid& features,
                             const TrajGenParams& params) {
  TrajGenTape tape;
  encode_plan_tape(plan, features, params, tape);
  return tape.h_s;
}

DecodeResult decode_trajectory(const Vec& h_m0, const std::vector<Vec>& plan_encoding,
                               const TrajGenParams& params, int t_f) {
  TrajGenTape tape;
  tape.h_m0 = h_m0;
  tape.h_s = plan_encoding;
  decode_tape(params, t_f, tape);
  return {std::move(tape.traj), std::move(tape.att_w)};
}

TrajGenRun run_generator(const TrackHistory& track, const Plan& plan,
                         const FeatureGrid& features, const TrajGenParams& params, int t_f) {
  auto tape = std::make_shared<TrajGenTape>();
  encode_motion_tape(track, params, *tape);
  encode_plan_tape(plan, features, params, *tape);
  decode_tape(params, t_f, *tape);
  TrajGenRun run;
  run.out.trajectory = tape->traj;
  run.out.attention = tape->att_w;
  run.tape = std::move(tape);
  return run;
}

namespace {

void attention_backward(const TrajGenParams& params, const TrajGenTape& tape, int step,
                        const Vec& h_dec, const Vec& dctx, TrajGenParams& grads, Vec& dh_dec,
                        std::vector<Vec>& dh_s) {
  const std::vector<Vec>& h_s = tape.h_s;
  const Vec& alpha = tape.att_w[step];
  const std::vector<Vec>& hid = tape.att_hid[step];
  const std::size_t len = h_s.size();

  Vec dalpha(len);
  for (std::size_t n = 0; n < len; ++n) {
    dalpha[n] = dot(dctx, h_s[n]);
    axpy(alpha[n], dctx, dh_s[n]);
  }
  double inner = 0.0;
  for (std::size_t n = 0; n < len; ++n) inner += alpha[n] * dalpha[n];
  for (std::size_t n = 0; n < len; ++n) {
    const double de = alpha[n] * (dalpha[n] - inner);
    if (de == 0.0) continue;
    Vec dhid(kHidden);
    for (int i = 0; i < kHidden; ++i)
      dhid[i] = hid[n][i] > 0.0 ? de * params.att_out.w.data[i] : 0.0;
    for (int i = 0; i < kHidden; ++i) grads.att_out.w.data[i] += de * hid[n][i];
    grads.att_out.b[0] += de;
    const Vec cat = concat(h_dec, h_s[n]);
    add_outer(grads.att_hidden.w, dhid, cat);
    axpy(1.0, dhid, grads.att_hidden.b);
    const Vec dcat = matvec_t(params.att_hidden.w, dhid);
    for (int i = 0; i < kHidden; ++i) dh_dec[i] += dcat[i];
    for (int i = 0; i < 2 * kHidden; ++i) dh_s[n][i] += dcat[kHidden + i];
  }
}

}  // namespace

void backprop_generator(const TrajGenRun& run, const TrajGenParams& params,
                        const std::vector<Vec2>& dy, TrajGenParams& grads) {
  const TrajGenTape& tape = *run.tape;
  const int t_f = static_cast<int>(tape.traj.points.size());
  if (static_cast<int>(dy.size()) != t_f)
    throw std::invalid_argument("backprop_generator: dy size mismatch");
  const std::size_t len = tape.h_s.size();

  std::vector<Vec> dh_s(len, Vec(2 * kHidden, 0.0));
  Vec dh(kHidden, 0.0);
  for (int t = t_f - 1; t >= 0; --t) {
    // y_t = out_proj(h_{t+1})
    const Vec dy_t{dy[t].x, dy[t].y};
    add_outer(grads.out_proj.w, dy_t, tape.d_h[t + 1]);
    axpy(1.0, dy_t, grads.out_proj.b);
    Vec t1 = matvec_t(params.out_proj.w, dy_t);
    axpy(1.0, t1, dh);

    Vec dctx(2 * kHidden, 0.0);
    Vec dh_prev(kHidden, 0.0);
    gru_backward(params.gru_dec, tape.d_gru[t], dh, grads.gru_dec, &dctx, dh_prev);
    attention_backward(params, tape, t, tape.d_h[t], dctx, grads, dh_prev, dh_s);
    dh = std::move(dh_prev);
  }

  // dh now holds the gradient at h_m0.
  Vec dh_m0 = std::move(dh);

  // Plan encoder backward: split each dh_s into forward/backward halves.
  std::vector<Vec> dx(len, Vec(64, 0.0));
  {
    Vec dhf(kHidden, 0.0);
    for (std::size_t i = len; i-- > 0;) {
      for (int j = 0; j < kHidden; ++j) dhf[j] += dh_s[i][j];
      Vec dh_prev(kHidden, 0.0);
      gru_backward(params.gru_plan_fwd, tape.p_fwd[i], dhf, grads.gru_plan_fwd, &dx[i], dh_prev);
      dhf = std::move(dh_prev);
    }
    Vec dhb(kHidden, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      for (int j = 0; j < kHidden; ++j) dhb[j] += dh_s[i][kHidden + j];
      Vec dh_prev(kHidden, 0.0);
      gru_backward(params.gru_plan_bwd, tape.p_bwd[i], dhb, grads.gru_plan_bwd, &dx[i], dh_prev);
      dhb = std::move(dh_prev);
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    const Vec dloc(dx[i].begin(), dx[i].begin() + 16);
    const Vec dscene(dx[i].begin() + 16, dx[i].begin() + 16 + kHidden);
    const Vec docc(dx[i].begin() + 16 + kHidden, dx[i].end());
    linear_relu_backward(params.embed_loc, tape.p_loc[i], tape.p_loc_e[i], dloc,
                         grads.embed_loc, nullptr);
    linear_relu_backward(params.embed_scene, tape.p_scene[i], tape.p_scene_e[i], dscene,
                         grads.embed_scene, nullptr);
    linear_relu_backward(params.embed_agents, tape.p_occ[i], tape.p_occ_e[i], docc,
                         grads.embed_agents, nullptr);
  }

  // Motion encoder backward.
  Vec dhm = std::move(dh_m0);
  for (std::size_t i = tape.m_gru.size(); i-- > 0;) {
    Vec dx_emb(16, 0.0);
    Vec dh_prev(kHidden, 0.0);
    gru_backward(params.gru_motion, tape.m_gru[i], dhm, grads.gru_motion, &dx_emb, dh_prev);
    linear_relu_backward(params.embed_motion, tape.m_in[i], tape.m_emb[i], dx_emb,
                         grads.embed_motion, nullptr);
    dhm = std::move(dh_prev);
  }
}

double ade(const Trajectory& pred, const Trajectory& gt) {
  if (pred.points.size() != gt.points.size())
    throw std::invalid_argument("ade: horizon mismatch");
  double acc = 0.0;
  for (std::size_t t = 0; t < pred.points.size(); ++t)
    acc += (pred.points[t] - gt.points[t]).norm();
  return acc / static_cast<double>(pred.points.size());
}

std::vector<Vec2> ade_gradient(const Trajectory& pred, const Trajectory& gt) {
  if (pred.points.size() != gt.points.size())
    throw std::invalid_argument("ade_gradient: horizon mismatch");
  const double scale = 1.0 / static_cast<double>(pred.points.size());
  std::vector<Vec2> dy(pred.points.size());
  for (std::size_t t = 0; t < pred.points.size(); ++t) {
    const Vec2 d = pred.points[t] - gt.points[t];
    const double norm = std::max(d.norm(), 1e-12);
    dy[t] = {scale * d.x / norm, scale * d.y / norm};
  }
  return dy;
}

namespace {

// Natural cubic spline through (s_i, v_i); returns second derivatives.
Vec spline_second_derivs(const Vec& s, const Vec& v) {
  const std::size_t n = s.size();
  Vec m(n, 0.0);
  if (n < 3) return m;
  Vec a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = s[i] - s[i - 1];
    const double h1 = s[i + 1] - s[i];
    a[i] = h0;
    b[i] = 2.0 * (h0 + h1);
    c[i] = h1;
    d[i] = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
  }
  // Thomas algorithm on the interior rows.
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
    if (i == 1) break;
  }
  return m;
}

double spline_eval(const Vec& s, const Vec& v, const Vec& m, double t) {
  const std::size_t n = s.size();
  if (t <= s.front()) t = s.front();
  if (t >= s.back()) t = s.back();
  std::size_t i = std::upper_bound(s.begin(), s.end(), t) - s.begin();
  if (i == 0) i = 1;
  if (i >= n) i = n - 1;
  const double h = s[i] - s[i - 1];
  const double A = (s[i] - t) / h;
  const double B = (t - s[i - 1]) / h;
  return A * v[i - 1] + B * v[i] +
         ((A * A * A - A) * m[i - 1] + (B * B * B - B) * m[i]) * h * h / 6.0;
}

}  // namespace

Trajectory spline_rollout(const Plan& plan, const SceneGrid& grid,
                          std::span<const double> arc_positions) {
  if (plan.states.empty()) throw std::invalid_argument("spline_rollout: empty plan");
  std::vector<Vec2> waypoints;
  for (const GridState& s : plan.states) {
    const Vec2 p = grid.cell_center(s.row, s.col);
    if (!waypoints.empty() && (p - waypoints.back()).norm() < 1e-12) continue;
    waypoints.push_back(p);
  }
  Trajectory out;
  if (waypoints.size() < 2) {
    out.points.assign(arc_positions.size(), waypoints.front());
    return out;
  }
  const std::size_t n = waypoints.size();
  Vec s(n, 0.0), xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) s[i] = s[i - 1] + (waypoints[i] - waypoints[i - 1]).norm();
    xs[i] = waypoints[i].x;
    ys[i] = waypoints[i].y;
  }
  const Vec mx = spline_second_derivs(s, xs);
  const Vec my = spline_second_derivs(s, ys);
  for (double arc : arc_positions) {
    arc = std::clamp(arc, 0.0, s.back());
    out.points.push_back({spline_eval(s, xs, mx, arc), spline_eval(s, ys, my, arc)});
  }
  return out;
}

Trajectory constant_speed_rollout(const Plan& plan, const SceneGrid& grid, double speed, int t_f,
                                  double dt) {
  if (speed < 0.0) throw std::invalid_argument("constant_speed_rollout: negative speed");
  if (t_f < 1) throw std::invalid_argument("constant_speed_rollout: t_f must be >= 1");
  Vec arcs(t_f);
  for (int k = 1; k <= t_f; ++k) arcs[k - 1] = k * speed * dt;
  return spline_rollout(plan, grid, arcs);
}

namespace {

Trajectory centroid_to_traj(const Vec& flat) {
  Trajectory t;
  for (std::size_t i = 0; i + 1 < flat.size(); i += 2) t.points.push_back({flat[i], flat[i + 1]});
  return t;
}

Vec traj_to_flat(const Trajectory& t) {
  Vec flat;
  flat.reserve(2 * t.points.size());
  for (const Vec2& p : t.points) {
    flat.push_back(p.x);
    flat.push_back(p.y);
  }
  return flat;
}

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

}  // namespace

TrajGenTrainResult train_trajgen(const std::vector<TrajGenExample>& dataset,
                                 const std::vector<Policy>& policies,
                                 const TrajGenTrainConfig& config,
                                 const TrajGenParams* resume_params, long resume_step) {
  if (dataset.empty()) throw std::invalid_argument("train_trajgen: empty dataset");
  if (config.finetune_steps > 0 && policies.size() != dataset.size())
    throw std::invalid_argument("train_trajgen: need one policy per example for fine-tuning");
  for (const TrajGenExample& e : dataset)
    if (static_cast<int>(e.gt_future.points.size()) != config.t_f)
      throw std::invalid_argument("train_trajgen: ground-truth horizon mismatch");

  TrajGenTrainResult result;
  const int scene_dim = dataset.front().features.scene_dim;
  result.params = resume_params ? *resume_params : TrajGenParams::init(scene_dim, config.seed);
  Vec theta = result.params.flatten();
  AdamState adam = AdamState::init(theta.size(), config.lr);
  adam.step = resume_step;

  auto apply_update = [&](const TrajGenParams& grads) {
    Vec g = grads.flatten();
    for (double v : g)
      if (!std::isfinite(v)) throw std::runtime_error("train_trajgen: non-finite gradient");
    adam_step(theta, g, adam);
    result.params.unflatten(theta);
  };

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, 0x0d3c));

  // Stage 1: decode the ground-truth plan, plain ADE.
  for (int step = 0; step < config.pretrain_steps; ++step) {
    const std::size_t pos = step % dataset.size();
    if (pos == 0) std::shuffle(order.begin(), order.end(), shuffle_rng);
    const TrajGenExample& ex = dataset[order[pos]];
    TrajGenRun run =
        run_generator(ex.track, ex.gt_plan, ex.features, result.params, config.t_f);
    const double loss = ade(run.out.trajectory, ex.gt_future);
    if (!std::isfinite(loss)) throw std::runtime_error("train_trajgen: non-finite loss");
    result.loss_log.push_back(loss);
    TrajGenParams grads = TrajGenParams::zeros(scene_dim);
    backprop_generator(run, result.params, ade_gradient(run.out.trajectory, ex.gt_future),
                       grads);
    apply_update(grads);
  }

  // Stage 2: sampled plans, clustered, MinADE_K with the partition fixed.
  for (int step = 0; step < config.finetune_steps; ++step) {
    const std::size_t pos = step % dataset.size();
    if (pos == 0) std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::size_t idx = order[pos];
    const TrajGenExample& ex = dataset[idx];
    const Policy& policy = policies[idx];
    const GridState s_init = ex.gt_plan.states.front();
    const std::vector<Plan> plans =
        sample_plans(policy, s_init, config.sample_count,
                     derive_seed(config.seed, 0xf1e0ULL + static_cast<std::uint64_t>(step)));

    std::vector<TrajGenRun> runs(plans.size());
    parallel_for(plans.size(), config.threads, [&](std::size_t i) {
      runs[i] = run_generator(ex.track, plans[i], ex.features, result.params, config.t_f);
    });

    std::vector<Vec> flat(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) flat[i] = traj_to_flat(runs[i].out.trajectory);
    const int k = std::min<int>(config.k, static_cast<int>(flat.size()));
    const KMeansResult clusters =
        kmeans_cluster(flat, k, derive_seed(config.seed, 0xc0deULL + static_cast<std::uint64_t>(step)));

    int best_k = 0;
    double best_ade = std::numeric_limits<double>::infinity();
    std::vector<Trajectory> centroids(k);
    for (int c = 0; c < k; ++c) {
      centroids[c] = centroid_to_traj(clusters.centroids[c]);
      const double a = ade(centroids[c], ex.gt_future);
      if (a < best_ade) {
        best_ade = a;
        best_k = c;
      }
    }
    result.loss_log.push_back(best_ade);
    if (!std::isfinite(best_ade)) throw std::runtime_error("train_trajgen: non-finite loss");

    const std::vector<Vec2> dc = ade_gradient(centroids[best_k], ex.gt_future);
    const double member_scale = 1.0 / std::max(1, clusters.sizes[best_k]);
    TrajGenParams grads = TrajGenParams::zeros(scene_dim);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (clusters.assignment[i] != best_k) continue;
      std::vector<Vec2> dy(dc.size());
      for (std::size_t t = 0; t < dc.size(); ++t) dy[t] = member_scale * dc[t];
      backprop_generator(runs[i], result.params, dy, grads);
    }
    apply_update(grads);
  }

  result.final_step = adam.step;
  return result;
}

}  // namespace planmax
