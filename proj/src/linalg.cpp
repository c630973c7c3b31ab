#include "planmax/linalg.hpp"

#include <cmath>

namespace planmax {

Vec matvec(const Mat& a, const Vec& x) {
  check_size(x, a.cols, "matvec");
  Vec y(a.rows, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double acc = 0.0;
    const double* row = &a.data[r * a.cols];
    for (std::size_t c = 0; c < a.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

Vec matvec_t(const Mat& a, const Vec& x) {
  check_size(x, a.rows, "matvec_t");
  Vec y(a.cols, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* row = &a.data[r * a.cols];
    for (std::size_t c = 0; c < a.cols; ++c) y[c] += row[c] * xr;
  }
  return y;
}

void add_outer(Mat& a, const Vec& u, const Vec& v) {
  check_size(u, a.rows, "add_outer");
  check_size(v, a.cols, "add_outer");
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double ur = u[r];
    if (ur == 0.0) continue;
    double* row = &a.data[r * a.cols];
    for (std::size_t c = 0; c < a.cols; ++c) row[c] += ur * v[c];
  }
}

void axpy(double alpha, const Vec& x, Vec& y) {
  check_size(y, x.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(const Vec& a, const Vec& b) {
  check_size(b, a.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l1_distance(const Vec& a, const Vec& b) {
  check_size(b, a.size(), "l1_distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

double l2_norm(const Vec& a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace planmax
