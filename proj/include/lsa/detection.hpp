#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lsa/approximability.hpp"
#include "lsa/generators.hpp"
#include "lsa/model_classes.hpp"

namespace lsa {

/// Calibrated (phi, Phi) detectability of T points in S and the thresholds
/// derived from it.
struct DetectabilityParams {
  ModelClassId t;
  ModelClassId s;
  double phi = 0.0;
  /// (s, Phi(s)) with s decreasing.
  std::vector<std::pair<double, double>> phi_table;
  /// Smallest C with Phi(s) <= C s on the table.
  double phi_linear = 0.0;
  double delta = 0.0;     // phi / 32
  double t_scale = 0.0;   // Phi(t) <= delta / 4
  double epsilon = 0.0;   // t delta / 32
  double gamma = 0.0;     // phi / 8
  double t_prime = 0.0;   // Phi(t') <= gamma / 4
  double beta = 0.0;      // (t' / 8) gamma
  double beta_tilde = 0.0;  // min(beta / 6, 1/2)

  /// Phi at s: table value at the nearest grid s at or above s; the linear
  /// fit below the table; the table max (or the fit) above it.
  double phi_at(double s) const;
  /// Rechecks every threshold inequality; throws InvalidInput on violation.
  void validate() const;
  nlohmann::json to_json() const;
  static DetectabilityParams from_json(const nlohmann::json& j);
};

/// Derives delta, t, epsilon, gamma, t', beta, beta_tilde from phi and the
/// Phi table (t and t' from the table when it reaches the level, else from
/// the linear fit).
void derive_thresholds(DetectabilityParams& p);

struct CalibrationOptions {
  std::vector<double> s_grid{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  /// Sampling tolerance for the member Theta evaluations.
  double tolerance = 1.0 / 64;
  /// Admissible phi needs Phi(smallest s) <= decay * phi.
  double decay = 0.25;
  /// Upper cap on phi (the decomposition needs phi < 1).
  double phi_cap = 0.99;
};

/// Empirical (phi, Phi) on the member sample: phi is the largest level such
/// that members with Theta^T(0, 1) < phi have Theta^T(0, s) decaying.
/// Throws AuditFailure when no level qualifies.
DetectabilityParams calibrate_detectability(const ModelClassId& t, const ModelClassId& s,
                                            const std::vector<ModelMember>& members,
                                            const CalibrationOptions& opt = {});

/// Theta^T(0, s) for members with Theta^T(0, 1) < phi, checked against
/// Phi(s); returns the worst excess (negative when the implication holds).
double detectability_audit(const DetectabilityParams& p, const std::vector<ModelMember>& members,
                           const CalibrationOptions& opt = {});

enum class PointLabel { kFlat, kSingular };
std::string to_string(PointLabel l);

struct ClassifyOptions {
  ApproxOptions approx;
  /// Check Theta^S <= epsilon + gap + slack at every scale.
  bool check_hypothesis = true;
};

struct Classification {
  Point x;
  PointLabel label = PointLabel::kSingular;
  /// min over the ladder of Theta^T - gap - slack, and its scale.
  double min_lower = 0.0;
  double min_scale = 0.0;
  std::vector<double> radii;
  std::vector<ApproxResult> theta_t;
  std::vector<ApproxResult> theta_s;

  nlohmann::json to_json() const;
};

/// flat iff some ladder scale certifies Theta^T < beta_tilde; ties go to
/// singular. Throws InvalidInput naming the scale when Theta^S exceeds
/// epsilon beyond gap and slack.
Classification classify_point(const SetSampler& set, const Point& x,
                              const DetectabilityParams& p, const Ladder& ladder,
                              const ClassifyOptions& opt = {});

struct Decomposition {
  std::vector<Classification> points;
  std::vector<std::string> errors;  // per-point failures, index-aligned
  PointCloud flat;
  PointCloud singular;
  /// sup over flat points of Theta^T per ladder scale.
  std::vector<double> flat_sup;

  std::string to_csv() const;
  nlohmann::json summary() const;
};

Decomposition decompose(const SetSampler& set, const std::vector<Point>& grid,
                        const DetectabilityParams& p, const Ladder& ladder,
                        const ClassifyOptions& opt = {});

struct ImprovingStep {
  bool hypothesis = false;
  bool conclusion = false;
  double alpha_prime = 0.0;
  double s = 0.0;
  double theta_s = 0.0;   // Theta^S(x, r)
  double theta_t = 0.0;   // Theta^T(x, r)
  double theta_t_small = 0.0;  // Theta^T(x, s r)
  /// hypothesis-unmet | holds | violated
  std::string status;

  nlohmann::json to_json() const;
};

/// Measures the improving-step implication: with s < 1/8 the largest grid
/// value with Phi(8 s) <= gamma' / 4 and alpha' = min(phi/4 - beta', s gamma'/2),
/// Theta^S(x,r) < alpha' and Theta^T(x,r) < beta' should give Theta^T(x,sr) < gamma'.
/// Throws InvalidInput unless beta' < phi / 4.
ImprovingStep improving_step_check(const SetSampler& set, const Point& x, double r,
                                   double beta_prime, double gamma_prime,
                                   const DetectabilityParams& p, const ApproxOptions& opt = {});

/// beta profile of the singular part against the singular-parts class.
Profile singular_unilateral(const SetSampler& set, const std::vector<Point>& singular,
                            const ModelClassId& sing_class, const Ladder& ladder,
                            const ApproxOptions& opt = {});

}  // namespace lsa
