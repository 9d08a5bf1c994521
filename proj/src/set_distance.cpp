#include "lsa/set_distance.hpp"

#include <algorithm>
#include <cmath>

namespace lsa {

namespace {

void check_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("radius must be positive");
}

double slack(double ha, double hb, double r) { return 2.0 * std::max(ha, hb) / r; }

}  // namespace

std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::kExcess: return "excess";
    case DistanceKind::kRelativeExcess: return "rel-excess";
    case DistanceKind::kWalkupWets: return "ww";
    case DistanceKind::kRelativeHausdorff: return "rel-hausdorff";
  }
  return "?";
}

DistanceKind parse_distance_kind(const std::string& s) {
  if (s == "excess") return DistanceKind::kExcess;
  if (s == "rel-excess") return DistanceKind::kRelativeExcess;
  if (s == "ww") return DistanceKind::kWalkupWets;
  if (s == "rel-hausdorff") return DistanceKind::kRelativeHausdorff;
  throw InvalidInput("unknown distance kind '" + s + "'");
}

double excess(const PointCloud& a, const NeighborIndex& b) {
  check_dim(b.dim(), a.dim(), "excess");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, b.nearest_sq(a.data() + i * a.dim()));
  }
  return std::sqrt(worst);
}

double excess(const PointCloud& a, const PointCloud& b) {
  check_dim(a.dim(), b.dim(), "excess");
  if (b.is_empty()) throw InvalidInput("excess over an empty set is undefined");
  if (a.is_empty()) return 0.0;
  return excess(a, NeighborIndex(b));
}

DistanceValue relative_excess(const PointCloud& a, const NeighborIndex& b, double b_h,
                              const PointRef& x, double r) {
  check_radius(r);
  check_dim(a.dim(), int(x.size()), "relative_excess");
  const PointCloud local = restrict(a, Ball(x, r));
  const double ex = local.is_empty() ? 0.0 : excess(local, b);
  return {ex / r, DistanceKind::kRelativeExcess, slack(a.h(), b_h, r)};
}

DistanceValue relative_excess(const PointCloud& a, const PointCloud& b,
                              const PointRef& x, double r) {
  check_dim(a.dim(), b.dim(), "relative_excess");
  if (b.is_empty()) throw InvalidInput("relative excess over an empty set is undefined");
  return relative_excess(a, NeighborIndex(b), b.h(), x, r);
}

DistanceValue walkup_wets(const PointCloud& a, const PointCloud& b,
                          const PointRef& x, double r) {
  if (a.is_empty() || b.is_empty()) {
    throw InvalidInput("Walkup-Wets distance needs two nonempty sets");
  }
  const auto ab = relative_excess(a, b, x, r);
  const auto ba = relative_excess(b, a, x, r);
  return {std::max(ab.value, ba.value), DistanceKind::kWalkupWets, ab.sampling_slack};
}

DistanceValue relative_hausdorff(const PointCloud& a, const PointCloud& b,
                                 const PointRef& x, double r) {
  check_radius(r);
  check_dim(a.dim(), b.dim(), "relative_hausdorff");
  const Ball ball(x, r);
  const PointCloud la = restrict(a, ball);
  const PointCloud lb = restrict(b, ball);
  if (la.is_empty() || lb.is_empty()) {
    throw InvalidInput("relative Hausdorff distance is undefined when a set misses the ball");
  }
  const double v = std::max(excess(la, lb), excess(lb, la)) / r;
  return {v, DistanceKind::kRelativeHausdorff, slack(a.h(), b.h(), r)};
}

}  // namespace lsa
