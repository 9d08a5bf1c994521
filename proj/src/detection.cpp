#include "lsa/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "lsa/parallel.hpp"

namespace lsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest table s with Phi(s) <= level, else level / C from the linear fit.
double scale_for_level(const DetectabilityParams& p, double level) {
  double best = 0.0;
  for (const auto& [s, v] : p.phi_table) {
    if (v <= level) best = std::max(best, s);
  }
  if (best > 0.0) return best;
  if (p.phi_linear > 0.0) return std::min(level / p.phi_linear, 0.5);
  throw NumericFailure("Phi never reaches the required level");
}

ApproxResult eval(const SetSampler& set, const ModelClassId& c, const Point& x, double r,
                  const ApproxOptions& opt) {
  return theta(set, c, x, r, opt);
}

Classification classify_impl(const SetSampler& set, const Point& x, const DetectabilityParams& p,
                             const std::vector<double>& radii, const ClassifyOptions& opt) {
  Classification c;
  c.x = x;
  c.radii = radii;
  if (opt.check_hypothesis) {
    for (double r : radii) {
      const ApproxResult v = eval(set, p.s, x, r, opt.approx);
      c.theta_s.push_back(v);
      if (v.value > p.epsilon + v.optimizer_gap + v.sampling_slack) {
        throw InvalidInput(fmt::format(
            "set is not within epsilon of {} at r = {} (theta = {}, gap {}, slack {})",
            p.s.to_string(), r, v.value, v.optimizer_gap, v.sampling_slack));
      }
    }
  }
  c.min_lower = kInf;
  for (double r : radii) {
    const ApproxResult v = eval(set, p.t, x, r, opt.approx);
    c.theta_t.push_back(v);
    const double lower = v.value - v.optimizer_gap - v.sampling_slack;
    if (lower < c.min_lower) {
      c.min_lower = lower;
      c.min_scale = r;
    }
  }
  c.label = c.min_lower < p.beta_tilde ? PointLabel::kFlat : PointLabel::kSingular;
  return c;
}

std::vector<double> vec(const Point& p) { return {p.data(), p.data() + p.size()}; }

}  // namespace

double DetectabilityParams::phi_at(double s) const {
  double best = kInf, val = 0.0;
  double table_max = 0.0, table_min_s = kInf;
  for (const auto& [ts, v] : phi_table) {
    table_max = std::max(table_max, v);
    table_min_s = std::min(table_min_s, ts);
    if (ts >= s && ts < best) best = ts, val = v;
  }
  if (s < table_min_s) return phi_linear * s;
  if (best == kInf) return std::max(table_max, phi_linear * s);
  return val;
}

void DetectabilityParams::validate() const {
  auto fail = [](const std::string& what) { throw InvalidInput("detectability params: " + what); };
  if (!(phi > 0.0 && phi < 1.0)) fail("phi must lie in (0, 1)");
  if (!(delta > 0.0 && delta <= phi / 32 * (1 + 1e-12))) fail("need 0 < delta <= phi/32");
  if (!(t_scale > 0.0 && t_scale < 1.0)) fail("need 0 < t < 1");
  if (phi_at(t_scale) > delta / 4 * (1 + 1e-12)) fail("need Phi(t) <= delta/4");
  if (!(epsilon > 0.0 && epsilon < t_scale * delta / 16)) fail("need 0 < epsilon < t delta/16");
  if (!(t_prime > 0.0 && t_prime < 1.0)) fail("need 0 < t' < 1");
  if (phi_at(t_prime) > gamma / 4 * (1 + 1e-12)) fail("need Phi(t') <= gamma/4");
  if (std::abs(beta_tilde - std::min(beta / 6, 0.5)) > 1e-15) fail("beta_tilde mismatch");
}

nlohmann::json DetectabilityParams::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [s, v] : phi_table) table.push_back({{"s", s}, {"Phi", v}});
  return {{"T", t.to_string()},         {"S", s.to_string()},       {"phi", phi},
          {"Phi_table", table},         {"Phi_linear", phi_linear}, {"delta", delta},
          {"t", t_scale},               {"epsilon", epsilon},       {"gamma", gamma},
          {"t_prime", t_prime},         {"beta", beta},             {"beta_tilde", beta_tilde}};
}

DetectabilityParams DetectabilityParams::from_json(const nlohmann::json& j) {
  try {
    DetectabilityParams p;
    p.t = ModelClassId::parse(j.at("T").get<std::string>());
    p.s = ModelClassId::parse(j.at("S").get<std::string>());
    p.phi = j.at("phi").get<double>();
    for (const auto& e : j.at("Phi_table")) {
      p.phi_table.emplace_back(e.at("s").get<double>(), e.at("Phi").get<double>());
    }
    p.phi_linear = j.at("Phi_linear").get<double>();
    p.delta = j.at("delta").get<double>();
    p.t_scale = j.at("t").get<double>();
    p.epsilon = j.at("epsilon").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.t_prime = j.at("t_prime").get<double>();
    p.beta = j.at("beta").get<double>();
    p.beta_tilde = j.at("beta_tilde").get<double>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed detectability params: ") + e.what());
  }
}

void derive_thresholds(DetectabilityParams& p) {
  if (!(p.phi > 0.0 && p.phi < 1.0)) throw InvalidInput("phi must lie in (0, 1)");
  p.delta = p.phi / 32;
  p.t_scale = scale_for_level(p, p.delta / 4);
  p.epsilon = p.t_scale * p.delta / 32;
  p.gamma = p.phi / 8;
  p.t_prime = scale_for_level(p, p.gamma / 4);
  p.beta = p.t_prime / 8 * p.gamma;
  p.beta_tilde = std::min(p.beta / 6, 0.5);
}

DetectabilityParams calibrate_detectability(const ModelClassId& t, const ModelClassId& s,
                                            const std::vector<ModelMember>& members,
                                            const CalibrationOptions& opt) {
  if (members.empty()) throw InvalidInput("calibration needs members");
  if (t.dim() != s.dim()) throw InvalidInput("classes live in different dimensions");
  if (opt.s_grid.empty()) throw InvalidInput("calibration needs a scale grid");
  for (const auto& m : members) {
    if (!(m.cls == s)) throw InvalidInput("calibration member outside S");
  }
  std::vector<double> scales{1.0};
  for (double v : opt.s_grid) {
    if (!(v > 0.0 && v < 1.0)) throw InvalidInput("grid scales must lie in (0, 1)");
    scales.push_back(v);
  }
  std::sort(scales.begin() + 1, scales.end(), std::greater<>());
  const std::size_t ns = scales.size();
  std::vector<double> val(members.size() * ns);
  ApproxOptions ao;
  ao.tolerance = opt.tolerance;
  const Point o = Point::Zero(s.dim());
  parallel_for(val.size(), [&](std::size_t i) {
    const auto& m = members[i / ns];
    const SamplerPtr set = shape_sampler("member", member_shape(m));
    val[i] = theta(*set, t, o, scales[i % ns], ao).value;
  });

  std::vector<double> levels{opt.phi_cap};
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (val[m * ns] < opt.phi_cap && val[m * ns] > 0.0) levels.push_back(val[m * ns]);
  }
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  double worst_level = 0.0, worst_phi = 0.0;
  for (double level : levels) {
    std::vector<double> sup(ns, 0.0);
    bool any = false;
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (!(val[m * ns] < level)) continue;
      any = true;
      for (std::size_t k = 1; k < ns; ++k) sup[k] = std::max(sup[k], val[m * ns + k]);
    }
    if (!any) continue;
    if (sup[ns - 1] > opt.decay * level) {
      if (worst_level == 0.0) worst_level = level, worst_phi = sup[ns - 1];
      continue;
    }
    DetectabilityParams p;
    p.t = t;
    p.s = s;
    p.phi = level;
    for (std::size_t k = 1; k < ns; ++k) {
      p.phi_table.emplace_back(scales[k], sup[k]);
      p.phi_linear = std::max(p.phi_linear, sup[k] / scales[k]);
    }
    derive_thresholds(p);
    p.validate();
    return p;
  }
  throw AuditFailure(fmt::format(
      "no admissible phi for {} points in {}: at phi = {} Phi(smallest s) = {}", t.to_string(),
      s.to_string(), worst_level, worst_phi));
}

double detectability_audit(const DetectabilityParams& p, const std::vector<ModelMember>& members,
                           const CalibrationOptions& opt) {
  ApproxOptions ao;
  ao.tolerance = opt.tolerance;
  const Point o = Point::Zero(p.s.dim());
  std::vector<double> worst(members.size(), -kInf);
  parallel_for(members.size(), [&](std::size_t i) {
    const SamplerPtr set = shape_sampler("member", member_shape(members[i]));
    if (!(theta(*set, p.t, o, 1.0, ao).value < p.phi)) return;
    for (const auto& [s, bound] : p.phi_table) {
      const ApproxResult v = theta(*set, p.t, o, s, ao);
      worst[i] = std::max(worst[i], v.value - (bound + v.optimizer_gap + v.sampling_slack));
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

std::string to_string(PointLabel l) { return l == PointLabel::kFlat ? "flat" : "singular"; }

nlohmann::json Classification::to_json() const {
  nlohmann::json tt = nlohmann::json::array(), ts = nlohmann::json::array();
  for (const auto& v : theta_t) tt.push_back(v.to_json());
  for (const auto& v : theta_s) ts.push_back(v.to_json());
  return {{"x", vec(x)},           {"label", to_string(label)}, {"min_lower", min_lower},
          {"min_scale", min_scale}, {"radii", radii},            {"theta_T", tt},
          {"theta_S", ts}};
}

Classification classify_point(const SetSampler& set, const Point& x,
                              const DetectabilityParams& p, const Ladder& ladder,
                              const ClassifyOptions& opt) {
  check_dim(set.dim(), int(x.size()), "classified point");
  check_dim(set.dim(), p.t.dim(), "detectability classes");
  return classify_impl(set, x, p, ladder.radii(), opt);
}

std::string Decomposition::to_csv() const {
  std::ostringstream os;
  const int n = points.empty() ? 0 : int(points.front().x.size());
  for (int k = 0; k < n; ++k) os << 'x' << k + 1 << ',';
  os << "label,min_lower,min_scale,error\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& c = points[i];
    for (int k = 0; k < n; ++k) os << fmt::format("{},", c.x[k]);
    if (errors[i].empty()) {
      os << fmt::format("{},{},{},\n", to_string(c.label), c.min_lower, c.min_scale);
    } else {
      std::string e = errors[i];
      std::replace(e.begin(), e.end(), '"', '\'');
      os << fmt::format("error,,,\"{}\"\n", e);
    }
  }
  return os.str();
}

nlohmann::json Decomposition::summary() const {
  const auto failed = std::count_if(errors.begin(), errors.end(),
                                    [](const std::string& e) { return !e.empty(); });
  return {{"points", points.size()},
          {"flat", flat.size()},
          {"singular", singular.size()},
          {"errors", failed},
          {"flat_sup", flat_sup}};
}

Decomposition decompose(const SetSampler& set, const std::vector<Point>& grid,
                        const DetectabilityParams& p, const Ladder& ladder,
                        const ClassifyOptions& opt) {
  if (grid.empty()) throw InvalidInput("decomposition needs grid points");
  for (const auto& x : grid) check_dim(set.dim(), int(x.size()), "grid point");
  const std::vector<double> radii = ladder.radii();
  Decomposition d;
  d.points.resize(grid.size());
  d.errors.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      d.points[i] = classify_impl(set, grid[i], p, radii, opt);
    } catch (const std::exception& e) {
      d.points[i].x = grid[i];
      d.errors[i] = e.what();
    }
  });
  std::vector<Point> flat, singular;
  d.flat_sup.assign(radii.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!d.errors[i].empty()) continue;
    const auto& c = d.points[i];
    if (c.label == PointLabel::kFlat) {
      flat.push_back(c.x);
      for (std::size_t k = 0; k < radii.size(); ++k) {
        d.flat_sup[k] = std::max(d.flat_sup[k], c.theta_t[k].value);
      }
    } else {
      singular.push_back(c.x);
    }
  }
  d.flat = flat.empty() ? PointCloud::empty(set.dim()) : PointCloud::from_points(flat);
  d.singular = singular.empty() ? PointCloud::empty(set.dim()) : PointCloud::from_points(singular);
  return d;
}

nlohmann::json ImprovingStep::to_json() const {
  return {{"status", status},           {"hypothesis", hypothesis}, {"conclusion", conclusion},
          {"alpha_prime", alpha_prime}, {"s", s},                   {"theta_S", theta_s},
          {"theta_T", theta_t},         {"theta_T_small", theta_t_small}};
}

ImprovingStep improving_step_check(const SetSampler& set, const Point& x, double r,
                                   double beta_prime, double gamma_prime,
                                   const DetectabilityParams& p, const ApproxOptions& opt) {
  if (!(beta_prime < p.phi / 4)) {
    throw InvalidInput(fmt::format("improving step needs beta' < phi/4 = {}", p.phi / 4));
  }
  if (!(gamma_prime > 0.0)) throw InvalidInput("gamma' must be positive");
  ImprovingStep out;
  double t8 = 0.0;
  for (const auto& [ts, v] : p.phi_table) {
    if (v <= gamma_prime / 4 && ts > t8) t8 = ts;
  }
  if (t8 == 0.0) {
    if (!(p.phi_linear > 0.0)) throw NumericFailure("Phi never reaches gamma'/4");
    t8 = std::min(gamma_prime / (4 * p.phi_linear), 0.5);
  }
  out.s = t8 / 8;
  out.alpha_prime = std::min(p.phi / 4 - beta_prime, out.s * gamma_prime / 2);
  out.theta_s = theta(set, p.s, x, r, opt).value;
  out.theta_t = theta(set, p.t, x, r, opt).value;
  out.hypothesis = out.theta_s < out.alpha_prime && out.theta_t < beta_prime;
  if (!out.hypothesis) {
    out.status = "hypothesis-unmet";
    return out;
  }
  out.theta_t_small = theta(set, p.t, x, out.s * r, opt).value;
  out.conclusion = out.theta_t_small < gamma_prime;
  out.status = out.conclusion ? "holds" : "violated";
  return out;
}

Profile singular_unilateral(const SetSampler& set, const std::vector<Point>& singular,
                            const ModelClassId& sing_class, const Ladder& ladder,
                            const ApproxOptions& opt) {
  if (singular.empty()) throw InvalidInput("singular part is empty");
  if (sing_class.kind != ClassKind::kSingularParts && sing_class.kind != ClassKind::kGrassmannian) {
    throw InvalidInput("singular part must be compared with a singular-parts or flat class");
  }
  return profile(set, sing_class, singular, ladder, Variant::kBeta, opt);
}

}  // namespace lsa
