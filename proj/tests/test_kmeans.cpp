#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "planmax/kmeans.hpp"

using namespace planmax;

namespace {

// Reference Lloyd implementation with plain random initialization, used as
// the best-of-restarts comparison oracle.
double reference_lloyd_wcss(const std::vector<Vec>& pts, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> centroids;
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int c = 0; c < k; ++c) centroids.push_back(pts[idx[c]]);

  std::vector<int> assign(pts.size(), -1);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double bd = 1e300;
      for (int c = 0; c < k; ++c) {
        double d = 0.0;
        for (std::size_t j = 0; j < pts[i].size(); ++j) {
          const double t = pts[i][j] - centroids[c][j];
          d += t * t;
        }
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    for (int c = 0; c < k; ++c) {
      Vec sum(pts[0].size(), 0.0);
      int count = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (assign[i] != c) continue;
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += pts[i][j];
        ++count;
      }
      if (count > 0)
        for (std::size_t j = 0; j < sum.size(); ++j) centroids[c][j] = sum[j] / count;
    }
  }
  double wcss = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts[i].size(); ++j) {
      const double t = pts[i][j] - centroids[assign[i]][j];
      wcss += t * t;
    }
  return wcss;
}

}  // namespace

TEST_CASE("M == K returns the inputs as centroids") {
  std::vector<Vec> pts{{0.0, 0.0}, {5.0, 5.0}, {-3.0, 2.0}};
  const KMeansResult res = kmeans_cluster(pts, 3, 1);
  CHECK(res.wcss == doctest::Approx(0.0));
  for (const Vec& p : pts) {
    bool found = false;
    for (const Vec& c : res.centroids) found |= (c == p);
    CHECK(found);
  }
  for (int s : res.sizes) CHECK(s == 1);
}

TEST_CASE("two well-separated bundles: centroids are the bundle means") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<Vec> pts;
  Vec mean_a(2, 0.0), mean_b(2, 0.0);
  for (int i = 0; i < 30; ++i) {
    Vec p{10.0 + noise(rng), 10.0 + noise(rng)};
    mean_a[0] += p[0] / 30.0;
    mean_a[1] += p[1] / 30.0;
    pts.push_back(p);
  }
  for (int i = 0; i < 30; ++i) {
    Vec p{-10.0 + noise(rng), -10.0 + noise(rng)};
    mean_b[0] += p[0] / 30.0;
    mean_b[1] += p[1] / 30.0;
    pts.push_back(p);
  }
  const KMeansResult res = kmeans_cluster(pts, 2, 7);
  std::vector<Vec> cents = res.centroids;
  std::sort(cents.begin(), cents.end());
  std::vector<Vec> expected{mean_b, mean_a};
  CHECK(cents[0][0] == doctest::Approx(expected[0][0]).epsilon(1e-9));
  CHECK(cents[1][0] == doctest::Approx(expected[1][0]).epsilon(1e-9));
}

TEST_CASE("WCSS is at least as good as 10 restarts of a reference Lloyd run") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> pts;
  for (int i = 0; i < 50; ++i) {
    Vec p(6);
    for (double& v : p) v = u(rng);
    pts.push_back(p);
  }
  const KMeansResult res = kmeans_cluster(pts, 5, 11);
  double best_ref = 1e300;
  for (int restart = 0; restart < 10; ++restart)
    best_ref = std::min(best_ref, reference_lloyd_wcss(pts, 5, 100 + restart));
  CHECK(res.wcss <= best_ref + 1e-9);
}

TEST_CASE("uniform duplication leaves the centroids unchanged") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<Vec> pts;
  for (int bundle = 0; bundle < 5; ++bundle)
    for (int i = 0; i < 12; ++i)
      pts.push_back({bundle * 8.0 + noise(rng), bundle * -3.0 + noise(rng)});
  std::vector<Vec> doubled = pts;
  doubled.insert(doubled.end(), pts.begin(), pts.end());

  auto sorted_centroids = [](const KMeansResult& r) {
    std::vector<Vec> c = r.centroids;
    std::sort(c.begin(), c.end());
    return c;
  };
  const auto a = sorted_centroids(kmeans_cluster(pts, 5, 13));
  const auto b = sorted_centroids(kmeans_cluster(doubled, 5, 14));
  for (int c = 0; c < 5; ++c)
    for (int j = 0; j < 2; ++j) CHECK(a[c][j] == doctest::Approx(b[c][j]).epsilon(1e-9));
}

TEST_CASE("degenerate duplicate-point input terminates with zero objective") {
  std::vector<Vec> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({1.0, 1.0});
  for (int i = 0; i < 10; ++i) pts.push_back({2.0, 2.0});
  const KMeansResult res = kmeans_cluster(pts, 3, 5);
  CHECK(res.wcss == doctest::Approx(0.0));
}

TEST_CASE("fewer points than clusters is an error") {
  std::vector<Vec> pts{{0.0, 0.0}};
  CHECK_THROWS(kmeans_cluster(pts, 2, 1));
}
