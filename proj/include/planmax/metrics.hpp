#pragma once

#include <optional>
#include <span>
#include <vector>

#include "planmax/forecast.hpp"
#include "planmax/geometry.hpp"
#include "planmax/trajgen.hpp"

namespace planmax {

// One evaluated prediction instance. Trajectories and the scene share the
// same (agent) frame; initial_heading is the agent heading in that frame
// (0 when everything is agent-centric).
struct EvalCase {
  ForecastSet forecast;
  Trajectory ground_truth;
  const SceneGrid* scene = nullptr;
  double initial_heading = 0.0;
};

// Min over the K forecasts of the mean pointwise L2 error.
double min_ade(const ForecastSet& forecast, const Trajectory& gt);

// Min over the K forecasts of the final-point L2 error.
double min_fde(const ForecastSet& forecast, const Trajectory& gt);

// A case is a miss iff every forecast strays more than `threshold` meters
// from the ground truth at some time step.
bool is_miss(const ForecastSet& forecast, const Trajectory& gt, double threshold);
double miss_rate(std::span<const EvalCase> cases, double threshold = 2.0);

// Fraction of all predicted points (every forecast, every step, every
// case) whose containing cell is not drivable; points outside the grid
// count as off-road. Boundary points belong to the cell of their floor
// index.
double offroad_rate(std::span<const EvalCase> cases);

// Fraction of predicted points whose heading deviates more than 45 degrees
// from the direction of the nearest lane cell (Euclidean distance to cell
// centers, ties to the lower row then column). The heading at the first
// point is the agent's initial heading; near-stationary steps
// (displacement < 1e-6 m) inherit the previous heading. Absent when no
// case has lane information.
std::optional<double> offyaw_rate(std::span<const EvalCase> cases);

// One row of the benchmark report.
struct MetricRow {
  Variant variant = Variant::P2tIrl;
  double minade_5 = 0.0;
  double minade_10 = 0.0;
  double minfde_5 = 0.0;
  double minfde_10 = 0.0;
  double mr_5_2 = 0.0;
  double mr_10_2 = 0.0;
  double offroad = 0.0;
  std::optional<double> offyaw;
};

// Aggregates a variant's K=5 and K=10 case lists into a report row;
// off-road and off-yaw are computed on the K=10 sets.
MetricRow aggregate_metrics(Variant variant, std::span<const EvalCase> cases_k5,
                            std::span<const EvalCase> cases_k10);

}  // namespace planmax
