#include "planmax/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace planmax {

namespace {

void check_case(const ForecastSet& forecast, const Trajectory& gt) {
  if (forecast.trajectories.empty()) throw std::invalid_argument("metrics: empty forecast");
  for (const Trajectory& t : forecast.trajectories)
    if (t.points.size() != gt.points.size())
      throw std::invalid_argument("metrics: horizon mismatch");
}

}  // namespace

double min_ade(const ForecastSet& forecast, const Trajectory& gt) {
  check_case(forecast, gt);
  double best = std::numeric_limits<double>::infinity();
  for (const Trajectory& t : forecast.trajectories) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.points.size(); ++i) acc += (t.points[i] - gt.points[i]).norm();
    best = std::min(best, acc / static_cast<double>(t.points.size()));
  }
  return best;
}

double min_fde(const ForecastSet& forecast, const Trajectory& gt) {
  check_case(forecast, gt);
  double best = std::numeric_limits<double>::infinity();
  for (const Trajectory& t : forecast.trajectories)
    best = std::min(best, (t.points.back() - gt.points.back()).norm());
  return best;
}

bool is_miss(const ForecastSet& forecast, const Trajectory& gt, double threshold) {
  check_case(forecast, gt);
  for (const Trajectory& t : forecast.trajectories) {
    double max_dev = 0.0;
    for (std::size_t i = 0; i < t.points.size(); ++i)
      max_dev = std::max(max_dev, (t.points[i] - gt.points[i]).norm());
    if (max_dev <= threshold) return false;  // within threshold over the entire horizon
  }
  return true;
}

double miss_rate(std::span<const EvalCase> cases, double threshold) {
  if (cases.empty()) throw std::invalid_argument("miss_rate: no cases");
  int misses = 0;
  for (const EvalCase& c : cases)
    if (is_miss(c.forecast, c.ground_truth, threshold)) ++misses;
  return static_cast<double>(misses) / static_cast<double>(cases.size());
}

double offroad_rate(std::span<const EvalCase> cases) {
  if (cases.empty()) throw std::invalid_argument("offroad_rate: no cases");
  long total = 0, offroad = 0;
  for (const EvalCase& c : cases) {
    if (!c.scene) throw std::invalid_argument("offroad_rate: case without scene");
    for (const Trajectory& t : c.forecast.trajectories) {
      for (const Vec2& p : t.points) {
        ++total;
        const auto [r, col] = c.scene->cell_of(p);
        if (!c.scene->in_bounds(r, col) || !c.scene->drivable[c.scene->index(r, col)]) ++offroad;
      }
    }
  }
  return static_cast<double>(offroad) / static_cast<double>(total);
}

namespace {

// Nearest cell with a defined lane direction; ties resolved to the lower
// row, then the lower column (guaranteed by strict < in row-major order).
std::optional<double> nearest_lane_dir(const SceneGrid& scene, Vec2 p) {
  std::optional<double> best_dir;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int r = 0; r < scene.height; ++r) {
    for (int c = 0; c < scene.width; ++c) {
      const double dir = scene.lane_dir[scene.index(r, c)];
      if (std::isnan(dir)) continue;
      const Vec2 center = scene.cell_center(r, c);
      const double d2 = (p - center).x * (p - center).x + (p - center).y * (p - center).y;
      if (d2 < best_d2) {
        best_d2 = d2;
        best_dir = dir;
      }
    }
  }
  return best_dir;
}

}  // namespace

std::optional<double> offyaw_rate(std::span<const EvalCase> cases) {
  if (cases.empty()) throw std::invalid_argument("offyaw_rate: no cases");
  long total = 0, offyaw = 0;
  for (const EvalCase& c : cases) {
    if (!c.scene) throw std::invalid_argument("offyaw_rate: case without scene");
    if (!c.scene->has_lane_dir) continue;
    for (const Trajectory& t : c.forecast.trajectories) {
      double heading = c.initial_heading;
      for (std::size_t i = 0; i < t.points.size(); ++i) {
        if (i > 0) {
          const Vec2 d = t.points[i] - t.points[i - 1];
          if (d.norm() >= 1e-6) heading = std::atan2(d.y, d.x);
        }
        const std::optional<double> lane = nearest_lane_dir(*c.scene, t.points[i]);
        if (!lane) continue;
        ++total;
        if (std::abs(wrap_angle(heading - *lane)) > std::numbers::pi / 4.0) ++offyaw;
      }
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(offyaw) / static_cast<double>(total);
}

MetricRow aggregate_metrics(Variant variant, std::span<const EvalCase> cases_k5,
                            std::span<const EvalCase> cases_k10) {
  if (cases_k5.size() != cases_k10.size())
    throw std::invalid_argument("aggregate_metrics: case count mismatch");
  MetricRow row;
  row.variant = variant;
  double ade5 = 0.0, ade10 = 0.0, fde5 = 0.0, fde10 = 0.0;
  for (std::size_t i = 0; i < cases_k5.size(); ++i) {
    ade5 += min_ade(cases_k5[i].forecast, cases_k5[i].ground_truth);
    fde5 += min_fde(cases_k5[i].forecast, cases_k5[i].ground_truth);
    ade10 += min_ade(cases_k10[i].forecast, cases_k10[i].ground_truth);
    fde10 += min_fde(cases_k10[i].forecast, cases_k10[i].ground_truth);
  }
  const double n = static_cast<double>(cases_k5.size());
  row.minade_5 = ade5 / n;
  row.minade_10 = ade10 / n;
  row.minfde_5 = fde5 / n;
  row.minfde_10 = fde10 / n;
  row.mr_5_2 = miss_rate(cases_k5, 2.0);
  row.mr_10_2 = miss_rate(cases_k10, 2.0);
  row.offroad = offroad_rate(cases_k10);
  row.offyaw = offyaw_rate(cases_k10);
  return row;
}

}  // namespace planmax
