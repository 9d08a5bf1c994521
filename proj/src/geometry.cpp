#include "lsa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace lsa {

namespace {

bool all_finite(const double* p, int n) {
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

// Removes exact duplicates, keeping the first occurrence in input order.
void dedup(int n, std::vector<double>& coords) {
  const std::size_t count = coords.size() / n;
  if (count < 2) return;
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const double* pa = coords.data() + a * n;
    const double* pb = coords.data() + b * n;
    for (int k = 0; k < n; ++k) {
      if (pa[k] < pb[k]) return true;
      if (pb[k] < pa[k]) return false;
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<char> drop(count, 0);
  bool any = false;
  for (std::size_t i = 1; i < count; ++i) {
    const double* prev = coords.data() + order[i - 1] * n;
    const double* cur = coords.data() + order[i] * n;
    if (std::equal(prev, prev + n, cur)) {
      // order[i] > order[i-1] within a run of equal points, so the first
      // occurrence survives.
      drop[order[i]] = 1;
      any = true;
    }
  }
  if (!any) return;
  std::size_t w = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (drop[i]) continue;
    if (w != i) {
      std::copy(coords.begin() + i * n, coords.begin() + (i + 1) * n,
                coords.begin() + w * n);
    }
    ++w;
  }
  coords.resize(w * n);
}

}  // namespace

void check_dim(int expected, int got, const char* what) {
  if (expected != got) {
    throw InvalidInput(fmt::format("dimension mismatch in {}: expected {}, got {}",
                                   what, expected, got));
  }
}

Ball::Ball(Point c, double r) : center(std::move(c)), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw InvalidInput(fmt::format("ball radius must be positive, got {}", r));
  }
  if (center.size() < 1 || !all_finite(center.data(), int(center.size()))) {
    throw InvalidInput("ball center must be a finite point");
  }
}

bool Ball::contains(const PointRef& p) const {
  return (p - center).squaredNorm() <= radius * radius;
}

PointCloud::PointCloud(Unchecked, int n, std::vector<double> coords, double h,
                       std::optional<Ball> window)
    : n_(n), coords_(std::move(coords)), h_(h), window_(std::move(window)) {}

PointCloud::PointCloud(int n, std::vector<double> coords, double h,
                       std::optional<Ball> window)
    : n_(n), coords_(std::move(coords)), h_(h), window_(std::move(window)) {
  if (n < 1) throw InvalidInput("ambient dimension must be >= 1");
  if (coords_.size() % n != 0) {
    throw InvalidInput("coordinate count is not a multiple of the dimension");
  }
  if (coords_.empty()) {
    throw InvalidInput("empty point cloud; use PointCloud::empty to tag one");
  }
  if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidInput("h must be finite and >= 0");
  if (!all_finite(coords_.data(), int(coords_.size()))) {
    throw InvalidInput("point coordinates must be finite");
  }
  if (window_) {
    check_dim(n, window_->dim(), "cloud window");
    // Points produced by projection can land a rounding step outside.
    const double slack = window_->radius * 1e-12;
    const double lim = (window_->radius + slack) * (window_->radius + slack);
    for (std::size_t i = 0; i < size(); ++i) {
      if ((point(i) - window_->center).squaredNorm() > lim) {
        throw InvalidInput("cloud point lies outside its window");
      }
    }
  }
  dedup(n_, coords_);
}

PointCloud PointCloud::empty(int n, double h, std::optional<Ball> window) {
  if (n < 1) throw InvalidInput("ambient dimension must be >= 1");
  if (window) check_dim(n, window->dim(), "cloud window");
  return PointCloud(Unchecked{}, n, {}, h, std::move(window));
}

PointCloud PointCloud::from_points(const std::vector<Point>& pts, double h,
                                   std::optional<Ball> window) {
  if (pts.empty()) throw InvalidInput("from_points needs at least one point");
  const int n = static_cast<int>(pts.front().size());
  std::vector<double> coords;
  coords.reserve(pts.size() * n);
  for (const auto& p : pts) {
    check_dim(n, int(p.size()), "from_points");
    coords.insert(coords.end(), p.data(), p.data() + n);
  }
  return PointCloud(n, std::move(coords), h, std::move(window));
}

PointCloud PointCloud::with_h(double h) const {
  PointCloud out = *this;
  out.h_ = h;
  return out;
}

PointCloud PointCloud::with_window(std::optional<Ball> window) const {
  if (is_empty()) return empty(n_, h_, std::move(window));
  return PointCloud(n_, coords_, h_, std::move(window));
}

PointCloud restrict(const PointCloud& cloud, const Ball& ball) {
  check_dim(cloud.dim(), ball.dim(), "restrict");
  const int n = cloud.dim();
  const double r2 = ball.radius * ball.radius;
  std::vector<double> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double* p = cloud.data() + i * n;
    double d2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t = p[k] - ball.center[k];
      d2 += t * t;
    }
    if (d2 <= r2) out.insert(out.end(), p, p + n);
  }
  return PointCloud(PointCloud::Unchecked{}, n, std::move(out), cloud.h(), ball);
}

PointCloud transform(const PointCloud& cloud, const PointRef& shift,
                     double scale) {
  check_dim(cloud.dim(), int(shift.size()), "transform");
  if (!(scale > 0.0)) throw InvalidInput("transform scale must be positive");
  const int n = cloud.dim();
  std::vector<double> out(cloud.coords().size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < n; ++k) {
      out[i * n + k] = (cloud.data()[i * n + k] - shift[k]) / scale;
    }
  }
  std::optional<Ball> w;
  if (cloud.window()) {
    w = Ball((cloud.window()->center - shift) / scale, cloud.window()->radius / scale);
  }
  return PointCloud(PointCloud::Unchecked{}, n, std::move(out), cloud.h() / scale,
                    std::move(w));
}

PointCloud merge(const std::vector<const PointCloud*>& parts) {
  if (parts.empty()) throw InvalidInput("merge needs at least one cloud");
  const int n = parts.front()->dim();
  std::vector<double> coords;
  double h = 0.0;
  for (const auto* p : parts) {
    check_dim(n, p->dim(), "merge");
    coords.insert(coords.end(), p->coords().begin(), p->coords().end());
    h = std::max(h, p->h());
  }
  if (coords.empty()) return PointCloud::empty(n, h);
  return PointCloud(n, std::move(coords), h);
}

double nearest_distance_brute(const PointCloud& cloud, const PointRef& q) {
  check_dim(cloud.dim(), int(q.size()), "nearest_distance_brute");
  if (cloud.is_empty()) throw InvalidInput("nearest distance to an empty cloud");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    best = std::min(best, (cloud.point(i) - q).squaredNorm());
  }
  return std::sqrt(best);
}

}  // namespace lsa
