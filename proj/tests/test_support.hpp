#pragma once

#include <cmath>
#include <initializer_list>
#include <random>
#include <vector>

#include "lsa/geometry.hpp"

namespace lsa::testing {

inline Point pt(std::initializer_list<double> v) {
  Point p(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// Hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

  Point point(int n, double half_width) {
    Point p(n);
    for (int k = 0; k < n; ++k) p[k] = uniform(-half_width, half_width);
    return p;
  }

  std::vector<Point> points(int n, int count, double half_width) {
    std::vector<Point> out;
    for (int i = 0; i < count; ++i) out.push_back(point(n, half_width));
    return out;
  }

  PointCloud cloud(int n, int count, double half_width) {
    return PointCloud::from_points(points(n, count, half_width));
  }

  Point unit(int n) {
    Point p(n);
    std::normal_distribution<double> g;
    do {
      for (int k = 0; k < n; ++k) p[k] = g(rng_);
    } while (p.norm() < 1e-6);
    return p.normalized();
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// sup_{a in A} min_{b in B} |a - b| by double loop, independent of the k-d tree.
inline double brute_excess(const std::vector<Point>& a, const std::vector<Point>& b) {
  double out = 0.0;
  for (const auto& p : a) {
    double best = INFINITY;
    for (const auto& q : b) best = std::min(best, (p - q).norm());
    out = std::max(out, best);
  }
  return out;
}

inline std::vector<Point> in_ball(const std::vector<Point>& a, const Point& x, double r) {
  std::vector<Point> out;
  for (const auto& p : a) {
    if ((p - x).norm() <= r) out.push_back(p);
  }
  return out;
}

inline std::vector<Point> points_of(const PointCloud& c) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.emplace_back(c.point(i));
  return out;
}

}  // namespace lsa::testing
