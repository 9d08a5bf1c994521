#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lsa/approximability.hpp"
#include "lsa/generators.hpp"
#include "lsa/set_distance.hpp"

namespace lsa {

struct BlowupSpec {
  SamplerPtr set;
  Point x;
  /// Tangent mode: x_i = x at these radii.
  std::vector<double> radii;
  /// Directed mode (x_i, r_i); takes precedence over radii when nonempty.
  std::vector<std::pair<Point, double>> sequence;
  std::vector<double> view_radii{1.0, 2.0, 4.0};
  /// Sampling resolution of each rescaled window.
  double resolution = 1.0 / 64;
  /// Gap level for the convergence verdict (sampling slack is added).
  double tolerance = 0.05;
  /// Directions with sup |x_i - x| / r_i above this are unbounded.
  double direction_bound = 4.0;

  static BlowupSpec tangent(SamplerPtr set, Point x, const Ladder& ladder);
  static BlowupSpec directed(SamplerPtr set, Point x, std::vector<std::pair<Point, double>> seq);
};

struct BlowupStep {
  Point x;
  double r = 0.0;
  /// (x_i - x) / r_i.
  Point direction;
  /// (A - x_i) / r_i restricted to B(0, 2 * max view radius).
  PointCloud cloud;
};

struct BlowupTrace {
  std::vector<BlowupStep> steps;
  std::vector<double> view_radii;
  /// gaps[i][v]: Walkup-Wets distance at view radius v between steps i, i+1.
  std::vector<std::vector<DistanceValue>> gaps;
  double tolerance = 0.0;
  bool partial = false;
  std::string partial_reason;
  bool convergent = false;
  double max_direction = 0.0;
  bool bounded = true;
  /// Bounded directed traces: distance at each view radius between the
  /// terminal cloud and the deeper tangent cloud translated by -direction.
  std::vector<DistanceValue> translate_gaps;

  const PointCloud& terminal() const { return steps.back().cloud; }
  nlohmann::json summary() const;
};

BlowupTrace blow_up(const BlowupSpec& spec);
BlowupTrace directed_blow_up(const BlowupSpec& spec);

/// True iff Theta of the terminal cloud against c at every view radius is
/// at most eps + optimizer gap + sampling slack + the final trace gap.
/// Throws InvalidInput on a non-convergent trace.
bool tangent_membership(const BlowupTrace& trace, const ModelClassId& c, double eps,
                        const ApproxOptions& opt = {});

enum class Dichotomy { kTBranch, kTperpBranch, kNotInS, kInconclusive };
std::string to_string(Dichotomy d);

struct DichotomyOptions {
  /// Theta^S above this (after removing gap and slack) at some scale: not in S.
  double in_class = 0.15;
  /// Tail values at most tol (plus gap and slack): T branch.
  double tol = 0.05;
  /// Tail values at least phi (minus gap and slack): T-perp branch.
  double phi = 0.25;
  int tail = 3;
  ApproxOptions approx;
};

struct DichotomyResult {
  Dichotomy verdict = Dichotomy::kInconclusive;
  Profile theta_s;
  Profile theta_t;
  /// Scale at which Theta^S left the class, when verdict is not-in-S.
  double offending_scale = 0.0;
  nlohmann::json summary() const;
};

DichotomyResult dichotomy_check(const SetSampler& set, const Point& x, const ModelClassId& t,
                                const ModelClassId& s, const Ladder& ladder,
                                const DichotomyOptions& opt = {});

}  // namespace lsa
