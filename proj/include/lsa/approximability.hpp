#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsa/generators.hpp"
#include "lsa/model_classes.hpp"

namespace lsa {

enum class Variant { kTheta, kBeta };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct ApproxOptions {
  /// Target sampling slack; sampler windows use h = tolerance * r / 2.
  double tolerance = 1.0 / 32;
  /// A must meet B(x, r (1 + margin)).
  double margin = 0.25;
  /// Member sampling resolution relative to r; 0 picks the window
  /// resolution, or 1/64 when the set is an exact finite cloud.
  double member_h = 0.0;
  /// Extra candidate members in absolute units (x + S is compared to A).
  std::vector<ModelMember> witnesses;
  bool sampler_witnesses = true;
  /// Stop searching once a member reaches this value (then the gap is the
  /// value itself). Negative disables.
  double accept_below = -1.0;
  /// Overrides the per-family coarse budget when positive.
  std::size_t budget = 0;
};

struct ApproxResult {
  double value = 0.0;
  ModelMember best_member;
  /// Lipschitz bound at the final refinement step around the winner,
  /// capped by the value itself.
  double optimizer_gap = 0.0;
  double sampling_slack = 0.0;
  Variant variant = Variant::kTheta;
  std::size_t evaluations = 0;

  nlohmann::json to_json() const;
};

struct ApproxQuery {
  SamplerPtr set;
  ModelClassId cls;
  Point x;
  double r = 1.0;
  double tolerance = 1.0 / 32;
  Variant variant = Variant::kTheta;
};

ApproxResult approximate(const ApproxQuery& q, ApproxOptions opt = {});

ApproxResult theta(const SetSampler& set, const ModelClassId& c, const PointRef& x, double r,
                   const ApproxOptions& opt = {});
ApproxResult beta(const SetSampler& set, const ModelClassId& c, const PointRef& x, double r,
                  const ApproxOptions& opt = {});
ApproxResult theta(const PointCloud& set, const ModelClassId& c, const PointRef& x, double r,
                   const ApproxOptions& opt = {});
ApproxResult beta(const PointCloud& set, const ModelClassId& c, const PointRef& x, double r,
                  const ApproxOptions& opt = {});

/// The optimizer on a prepared cloud U already normalized to x = 0, r = 1.
/// U must contain every point of the set within 2 + dist(0, set) of 0.
/// member_h is the member sampling resolution in normalized units.
ApproxResult optimize_normalized(const PointCloud& u, const ModelClassId& c, Variant v,
                                 double member_h, const std::vector<ModelMember>& seeds,
                                 const ApproxOptions& opt);

/// Geometric scale ladder r0 * lambda^k, k = 0..depth.
struct Ladder {
  double r0 = 1.0;
  double lambda = 0.5;
  int depth = 12;

  std::vector<double> radii() const;
  static Ladder between(double r_max, double r_min, double lambda = 0.5);
};

struct Profile {
  ModelClassId cls;
  Variant variant = Variant::kTheta;
  std::vector<Point> points;
  std::vector<double> radii;
  std::vector<ApproxResult> values;  // row-major: point, then scale

  const ApproxResult& at(std::size_t point, std::size_t scale) const {
    return values[point * radii.size() + scale];
  }
  /// sup over points of value at each scale.
  std::vector<double> sup_per_scale() const;
  /// Largest value + gap + slack over the whole grid.
  double max_upper() const;
  /// True when the per-scale sup never increases by more than the combined
  /// gaps and slacks from one scale to the next.
  bool decaying() const;
  std::string to_csv() const;
  nlohmann::json summary() const;
};

Profile profile(const SetSampler& set, const ModelClassId& c, const std::vector<Point>& points,
                const Ladder& ladder, Variant v, const ApproxOptions& opt = {});

struct EnlargementResult {
  bool member = false;
  /// Largest value - (eps + gap + slack) over the ladder, and its scale.
  double worst_margin = 0.0;
  double worst_scale = 0.0;
  Profile witness;
};

/// Finite surrogate of A in (class; eps) over [r_min, r_max] at x = 0.
EnlargementResult enlargement_membership(const SetSampler& set, const ModelClassId& c,
                                         double eps, Variant v, double r_min, double r_max,
                                         double lambda = 0.5, const ApproxOptions& opt = {});

}  // namespace lsa
