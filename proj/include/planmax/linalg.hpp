#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace planmax {

using Vec = std::vector<double>;

// Dense row-major matrix. Small enough here that hand-rolled loops beat
// pulling in a linear algebra dependency.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// y = A x
Vec matvec(const Mat& a, const Vec& x);
// y = A^T x
Vec matvec_t(const Mat& a, const Vec& x);
// A += u v^T
void add_outer(Mat& a, const Vec& u, const Vec& v);

void axpy(double alpha, const Vec& x, Vec& y);

double dot(const Vec& a, const Vec& b);

double l1_distance(const Vec& a, const Vec& b);

double l2_norm(const Vec& a);

inline void check_size(const Vec& v, std::size_t n, const char* what) {
  if (v.size() != n) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

}  // namespace planmax
