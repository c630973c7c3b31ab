#include "planmax/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "planmax/rng.hpp"

namespace planmax {

namespace {

double sq_dist(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// k-means++ seeding: first centroid uniform, then proportional to squared
// distance to the nearest centroid chosen so far.
std::vector<Vec> seed_plusplus(const std::vector<Vec>& points, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> centroids;
  centroids.push_back(points[static_cast<std::size_t>(unif(rng) * points.size()) %
                             points.size()]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec& c : centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = unif(rng) * total;
      double cum = 0.0;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        cum += d2[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(unif(rng) * points.size()) % points.size();
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

KMeansResult lloyd(const std::vector<Vec>& points, std::vector<Vec> centroids, int max_iter) {
  const int k = static_cast<int>(centroids.size());
  const std::size_t dim = points.front().size();
  KMeansResult res;
  res.assignment.assign(points.size(), -1);

  double prev_wcss = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double wcss = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.assignment[i] != best) {
        changed = true;
        res.assignment[i] = best;
      }
      wcss += best_d;
    }
    // The Lloyd objective never increases between iterations.
    if (wcss > prev_wcss + 1e-9 * (1.0 + prev_wcss))
      throw std::runtime_error("kmeans_cluster: objective increased");
    prev_wcss = wcss;
    res.iterations = iter + 1;
    if (!changed && iter > 0) break;

    std::vector<Vec> sums(k, Vec(dim, 0.0));
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      axpy(1.0, points[i], sums[res.assignment[i]]);
      counts[res.assignment[i]] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed an empty cluster to the point farthest from its centroid.
        std::size_t worst = 0;
        double worst_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const double d = sq_dist(points[i], centroids[res.assignment[i]]);
          if (d > worst_d) {
            worst_d = d;
            worst = i;
          }
        }
        centroids[c] = points[worst];
        changed = true;
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / counts[c];
    }
    if (!changed) break;
  }

  res.centroids = std::move(centroids);
  res.sizes.assign(k, 0);
  res.wcss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    res.sizes[res.assignment[i]] += 1;
    res.wcss += sq_dist(points[i], res.centroids[res.assignment[i]]);
  }
  return res;
}

}  // namespace

KMeansResult kmeans_cluster(const std::vector<Vec>& points, int k, std::uint64_t seed,
                            int restarts, int max_iter) {
  if (k < 1) throw std::invalid_argument("kmeans_cluster: k must be >= 1");
  if (static_cast<int>(points.size()) < k)
    throw std::invalid_argument("kmeans_cluster: fewer points than clusters");
  if (restarts < 1) restarts = 1;

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int run = 0; run < restarts; ++run) {
    std::mt19937_64 rng(derive_seed(seed, 0xc1a5 + run));
    KMeansResult res = lloyd(points, seed_plusplus(points, k, rng), max_iter);
    if (res.wcss < best.wcss) best = std::move(res);
  }
  return best;
}

}  // namespace planmax
