#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lsa/approximability.hpp"
#include "lsa/geometry.hpp"
#include "lsa/generators.hpp"
#include "lsa/model_classes.hpp"

namespace lsa {

struct CoveringReport {
  double s = 0.0;
  std::size_t count_greedy = 0;
  std::optional<std::size_t> count_exact;
  /// Chosen centers, all taken from the input cloud.
  std::vector<Point> centers;

  nlohmann::json to_json() const;
};

/// Farthest-point greedy cover by closed s-balls centered in the cloud,
/// seeded with the first point. Optionally restricted to a ball first.
CoveringReport covering_number_greedy(const PointCloud& cloud, double s,
                                      const std::optional<Ball>& ball = std::nullopt);
/// Greedy count only, without storing centers.
std::size_t greedy_count(const PointCloud& cloud, double s);

/// Minimum number of closed s-balls centered in the cloud; at most 20 points.
std::size_t covering_number_exact(const PointCloud& cloud, double s);

struct DimensionEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double r_max = 0.0;
  double r_min = 0.0;
  double lambda = 0.5;
  /// Root mean square residual of the log-log fit.
  double residual = 0.0;
  std::vector<double> scales;
  std::vector<std::size_t> counts;

  nlohmann::json to_json() const;
};

/// Least-squares slope of log N(A, s) against log(1/s) for
/// s = r_max * lambda^k >= r_min. Needs at least 4 scales.
DimensionEstimate minkowski_estimate(const PointCloud& cloud, double r_max, double r_min,
                                     double lambda = 0.5);
/// Same on a sampler window, sampled once at resolution r_min / 4 (or the
/// sampler floor, which must stay below r_min / 2).
DimensionEstimate minkowski_estimate(const SetSampler& set, const Ball& window, double r_max,
                                     double r_min, double lambda = 0.5);

struct ProfileGrid {
  std::vector<double> s;
  std::vector<double> r;
};

/// s = 2^(-k/4) from 1/2 down to 2^-(7 - alpha), r in {1, 2}.
ProfileGrid default_profile_grid(int alpha);

/// alpha from analytic_alpha(c); C = 1.25 max count * s^alpha over the
/// members and grid (no factor when alpha = 0); s0 = largest grid s.
/// Counts are greedy covers at s r / 2 of (s r / 2)-nets, an upper bound on
/// N(S ∩ B(0, r), s r). Audited on 50 random (member, r, s) triples.
CoveringProfile fit_covering_profile(const ModelClassId& c, const std::vector<ModelMember>& members,
                                     const ProfileGrid& grid, std::uint64_t seed = 1);

/// Upper bound on N(S ∩ B(0, r), s r) for one member.
std::size_t member_covering_count(const ModelMember& m, double r, double s);

struct LemmaRow {
  Point x;
  double r = 0.0;
  double beta = 0.0;
  /// beta + optimizer gap + sampling slack.
  double beta_upper = 0.0;
  std::size_t count = 0;
  std::size_t bound = 0;
  /// pass | fail | greedy-marginal | precondition-unmet
  std::string status;
};

struct LemmaReport {
  double delta = 0.0;
  double lambda = 0.0;
  std::size_t bound = 0;
  std::vector<LemmaRow> rows;

  bool passed() const;
  std::size_t count(const std::string& status) const;
  std::string to_csv() const;
  nlohmann::json summary() const;
};

/// lambda = delta (2 + 2 C^(1/alpha) (1 + delta)).
double lemma_lambda(const CoveringProfile& p, double delta);

/// Checks N^{x,r}(A, lambda r) <= ceil(delta^-alpha) wherever the certified
/// beta bound is below delta. Throws InvalidInput unless C^(1/alpha) delta <= s0.
LemmaReport verify_covering_lemma(const SetSampler& set, const ModelClassId& c,
                                  const CoveringProfile& p, double delta,
                                  const std::vector<std::pair<Point, double>>& samples,
                                  double tolerance = 1.0 / 64);
LemmaReport verify_covering_lemma(const SetSampler& set, const ModelClassId& c,
                                  const CoveringProfile& p, double delta,
                                  const std::vector<std::pair<Point, double>>& samples,
                                  const ApproxOptions& opt);

struct Epsilon0 {
  double eps0 = 0.0;
  double mu0 = 0.0;
  double C_prime = 0.0;
};

/// Largest eps0 (to bisection precision) satisfying
///   2 eps0 mu0 <= 1/2,  C^(1/alpha) 2 eps0 <= s0,  log mu0 / log(1/(2 eps0)) <= 1/2,
/// with mu0 = 2 + 2 C^(1/alpha) (1 + 2 eps0) and C' = 2 alpha log mu0.
Epsilon0 solve_epsilon0(const CoveringProfile& p);

struct DimBoundQuery {
  double eps = 0.0;
  double r0 = 1.0;
  /// Base points for measuring unilateral approximability.
  std::vector<Point> points;
  /// Measurement ladder r0 * 2^-k, k = 0..depth.
  int depth = 4;
  double tolerance = 1.0 / 256;
  /// Region and scales for the Minkowski estimate.
  Ball window;
  double est_r_max = 0.25;
  double est_r_min = 1.0 / 256;
  double est_lambda = 0.5;
};

struct DimBoundReport {
  Epsilon0 constants;
  double eps = 0.0;
  double measured_eps = 0.0;
  double bound = 0.0;
  DimensionEstimate estimate;
  bool admissible = false;
  /// Empty when admissible; names the first violated condition otherwise.
  std::string violation;
  bool passed = false;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Measures sup beta over the ladder, checks eps against eps0 and the
/// measurement, then compares the estimated slope with alpha + C'/log(1/eps).
DimBoundReport dimension_bound_audit(const SetSampler& set, const ModelClassId& c,
                                     const CoveringProfile& p, const DimBoundQuery& q);

}  // namespace lsa
