#pragma once

#include <string>

#include "lsa/geometry.hpp"

namespace lsa {

enum class DistanceKind { kExcess, kRelativeExcess, kWalkupWets, kRelativeHausdorff };

std::string to_string(DistanceKind kind);
DistanceKind parse_distance_kind(const std::string& s);

struct DistanceValue {
  double value = 0.0;
  DistanceKind kind = DistanceKind::kExcess;
  /// 2*max(h_A, h_B)/r; zero when both inputs are exact finite sets.
  double sampling_slack = 0.0;
};

/// ex(A, B) = sup_{a in A} dist(a, B); 0 for empty A. B must be nonempty.
double excess(const PointCloud& a, const PointCloud& b);
double excess(const PointCloud& a, const NeighborIndex& b);

DistanceValue relative_excess(const PointCloud& a, const PointCloud& b,
                              const PointRef& x, double r);
DistanceValue relative_excess(const PointCloud& a, const NeighborIndex& b,
                              double b_h, const PointRef& x, double r);

DistanceValue walkup_wets(const PointCloud& a, const PointCloud& b,
                          const PointRef& x, double r);

/// Mutual excess of A∩B(x,r) and B∩B(x,r), over r. Undefined (throws)
/// when either restriction is empty.
DistanceValue relative_hausdorff(const PointCloud& a, const PointCloud& b,
                                 const PointRef& x, double r);

}  // namespace lsa
