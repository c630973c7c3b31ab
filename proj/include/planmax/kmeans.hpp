#pragma once

#include <cstdint>
#include <vector>

#include "planmax/linalg.hpp"

namespace planmax {

struct KMeansResult {
  std::vector<Vec> centroids;   // k x dim
  std::vector<int> assignment;  // per point, ties to the lowest index
  std::vector<int> sizes;       // members per cluster
  double wcss = 0.0;            // within-cluster sum of squared distances
  int iterations = 0;
};

// Seeded k-means++ followed by Lloyd iterations until the assignment is a
// fixed point (or max_iter). Empty clusters are reseeded to the point
// farthest from its assigned centroid. `restarts` independent seeded runs
// are made and the lowest-WCSS result returned; the whole routine is
// deterministic in `seed`.
KMeansResult kmeans_cluster(const std::vector<Vec>& points, int k, std::uint64_t seed,
                            int restarts = 10, int max_iter = 100);

}  // namespace planmax
