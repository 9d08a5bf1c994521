#include "lsa/tangents.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace lsa {

namespace {

std::vector<double> to_vec(const Point& p) { return {p.data(), p.data() + p.size()}; }

void check_spec(const BlowupSpec& spec) {
  if (!spec.set) throw InvalidInput("blow-up needs a set");
  check_dim(spec.set->dim(), int(spec.x.size()), "blow-up base point");
  if (spec.view_radii.empty()) throw InvalidInput("blow-up needs view radii");
  for (double v : spec.view_radii) {
    if (!(v > 0.0)) throw InvalidInput("view radii must be positive");
  }
  if (!(spec.resolution > 0.0)) throw InvalidInput("resolution must be positive");
}

// Samples (A - y) / r on B(0, radius) at relative resolution res. Returns
// nothing when the sampler cannot reach the requested resolution.
std::optional<PointCloud> rescaled_window(const SetSampler& set, const Point& y, double r,
                                          double radius, double res, std::string& why) {
  const double h = res * r;
  if (!set.fixed_resolution() && h < set.resolution_floor()) {
    why = fmt::format("resolution {} below sampler floor {} at r = {}", h,
                      set.resolution_floor(), r);
    return std::nullopt;
  }
  try {
    return transform(set.window(Ball(y, radius * r), h), y, r);
  } catch (const NumericFailure& e) {
    why = e.what();
    return std::nullopt;
  }
}

BlowupTrace run_trace(const BlowupSpec& spec, const std::vector<std::pair<Point, double>>& seq) {
  const SetSampler& set = *spec.set;
  const double view_max = *std::max_element(spec.view_radii.begin(), spec.view_radii.end());
  BlowupTrace tr;
  tr.view_radii = spec.view_radii;
  tr.tolerance = spec.tolerance;
  double prev_r = std::numeric_limits<double>::infinity();
  for (const auto& [xi, ri] : seq) {
    check_dim(set.dim(), int(xi.size()), "blow-up sequence point");
    if (!(ri > 0.0) || !(ri < prev_r)) throw InvalidInput("blow-up radii must decrease");
    prev_r = ri;
    if (set.distance(xi) > spec.resolution * ri + 1e-12) {
      throw InvalidInput(fmt::format("sequence point at r = {} is off the set", ri));
    }
    std::string why;
    auto cloud = rescaled_window(set, xi, ri, 2.0 * view_max, spec.resolution, why);
    if (!cloud) {
      tr.partial = true;
      tr.partial_reason = why;
      break;
    }
    BlowupStep step;
    step.x = xi;
    step.r = ri;
    step.direction = (xi - spec.x) / ri;
    step.cloud = std::move(*cloud);
    tr.max_direction = std::max(tr.max_direction, step.direction.norm());
    tr.steps.push_back(std::move(step));
  }
  if (tr.steps.empty()) throw NumericFailure("blow-up produced no steps: " + tr.partial_reason);
  tr.bounded = tr.max_direction <= spec.direction_bound;

  const Point o = Point::Zero(set.dim());
  for (std::size_t i = 0; i + 1 < tr.steps.size(); ++i) {
    std::vector<DistanceValue> row;
    for (double v : spec.view_radii) {
      row.push_back(walkup_wets(tr.steps[i].cloud, tr.steps[i + 1].cloud, o, v));
    }
    tr.gaps.push_back(std::move(row));
  }
  if (tr.gaps.size() >= 3) {
    tr.convergent = true;
    for (std::size_t i = tr.gaps.size() - 3; i < tr.gaps.size(); ++i) {
      for (const auto& g : tr.gaps[i]) {
        if (g.value > spec.tolerance + g.sampling_slack) tr.convergent = false;
      }
    }
  }
  return tr;
}

}  // namespace

BlowupSpec BlowupSpec::tangent(SamplerPtr set, Point x, const Ladder& ladder) {
  BlowupSpec s;
  s.set = std::move(set);
  s.x = std::move(x);
  s.radii = ladder.radii();
  return s;
}

BlowupSpec BlowupSpec::directed(SamplerPtr set, Point x,
                                std::vector<std::pair<Point, double>> seq) {
  BlowupSpec s;
  s.set = std::move(set);
  s.x = std::move(x);
  s.sequence = std::move(seq);
  return s;
}

nlohmann::json BlowupTrace::summary() const {
  nlohmann::json steps_j = nlohmann::json::array();
  for (const auto& s : steps) {
    steps_j.push_back({{"x", to_vec(s.x)},
                       {"r", s.r},
                       {"direction", to_vec(s.direction)},
                       {"points", s.cloud.size()}});
  }
  nlohmann::json gaps_j = nlohmann::json::array();
  for (const auto& row : gaps) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& g : row) r.push_back({{"value", g.value}, {"slack", g.sampling_slack}});
    gaps_j.push_back(r);
  }
  nlohmann::json out = {{"steps", steps_j},
                        {"view_radii", view_radii},
                        {"gaps", gaps_j},
                        {"tolerance", tolerance},
                        {"partial", partial},
                        {"convergent", convergent},
                        {"max_direction", max_direction},
                        {"bounded", bounded}};
  if (partial) out["partial_reason"] = partial_reason;
  if (!translate_gaps.empty()) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& g : translate_gaps) {
      t.push_back({{"value", g.value}, {"slack", g.sampling_slack}});
    }
    out["translate_gaps"] = t;
  }
  return out;
}

BlowupTrace blow_up(const BlowupSpec& spec) {
  check_spec(spec);
  if (!spec.sequence.empty()) throw InvalidInput("blow_up takes a ladder; use directed_blow_up");
  if (spec.radii.empty()) throw InvalidInput("blow-up ladder is empty");
  std::vector<std::pair<Point, double>> seq;
  for (double r : spec.radii) seq.emplace_back(spec.x, r);
  return run_trace(spec, seq);
}

BlowupTrace directed_blow_up(const BlowupSpec& spec) {
  check_spec(spec);
  if (spec.sequence.empty()) throw InvalidInput("directed blow-up needs a sequence");
  BlowupTrace tr = run_trace(spec, spec.sequence);
  if (!tr.bounded) return tr;

  // The limit along bounded directions is a translate of a tangent: compare
  // the terminal cloud with a deeper plain blow-up moved by -direction.
  const BlowupStep& last = tr.steps.back();
  const double rho = last.r / 4.0;
  const double view_max = *std::max_element(spec.view_radii.begin(), spec.view_radii.end());
  std::string why;
  auto deeper = rescaled_window(*spec.set, spec.x, rho,
                                4.0 * (2.0 * view_max + last.direction.norm()),
                                4.0 * spec.resolution, why);
  if (!deeper) {
    tr.partial = true;
    tr.partial_reason = "translate check: " + why;
    return tr;
  }
  // (A - x) / rho rescaled to radius r_N: divide by 4, then shift by -y.
  const PointCloud tangent = transform(*deeper, last.direction * 4.0, 4.0);
  const Point o = Point::Zero(spec.set->dim());
  for (double v : spec.view_radii) tr.translate_gaps.push_back(walkup_wets(last.cloud, tangent, o, v));
  return tr;
}

bool tangent_membership(const BlowupTrace& trace, const ModelClassId& c, double eps,
                        const ApproxOptions& opt) {
  if (!trace.convergent) throw InvalidInput("tangent membership needs a convergent trace");
  double trace_gap = 0.0;
  if (!trace.gaps.empty()) {
    for (const auto& g : trace.gaps.back()) {
      trace_gap = std::max(trace_gap, g.value + g.sampling_slack);
    }
  }
  const Point o = Point::Zero(trace.terminal().dim());
  for (double v : trace.view_radii) {
    const ApproxResult t = theta(trace.terminal(), c, o, v, opt);
    if (t.value > eps + t.optimizer_gap + t.sampling_slack + trace_gap) return false;
  }
  return true;
}

std::string to_string(Dichotomy d) {
  switch (d) {
    case Dichotomy::kTBranch: return "T-branch";
    case Dichotomy::kTperpBranch: return "Tperp-branch";
    case Dichotomy::kNotInS: return "not-in-S";
    case Dichotomy::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

nlohmann::json DichotomyResult::summary() const {
  nlohmann::json out = {{"verdict", to_string(verdict)},
                        {"theta_s", theta_s.summary()},
                        {"theta_t", theta_t.summary()}};
  if (verdict == Dichotomy::kNotInS) out["offending_scale"] = offending_scale;
  return out;
}

DichotomyResult dichotomy_check(const SetSampler& set, const Point& x, const ModelClassId& t,
                                const ModelClassId& s, const Ladder& ladder,
                                const DichotomyOptions& opt) {
  if (opt.tail < 1) throw InvalidInput("dichotomy tail must be positive");
  DichotomyResult res;
  res.theta_s = profile(set, s, {x}, ladder, Variant::kTheta, opt.approx);
  for (std::size_t k = 0; k < res.theta_s.radii.size(); ++k) {
    const auto& v = res.theta_s.at(0, k);
    if (v.value - v.optimizer_gap - v.sampling_slack > opt.in_class) {
      res.verdict = Dichotomy::kNotInS;
      res.offending_scale = res.theta_s.radii[k];
      return res;
    }
  }
  res.theta_t = profile(set, t, {x}, ladder, Variant::kTheta, opt.approx);
  const std::size_t n = res.theta_t.radii.size();
  const std::size_t from = n > std::size_t(opt.tail) ? n - opt.tail : 0;
  bool all_small = true, all_large = true;
  for (std::size_t k = from; k < n; ++k) {
    const auto& v = res.theta_t.at(0, k);
    if (v.value > opt.tol + v.optimizer_gap + v.sampling_slack) all_small = false;
    if (v.value < opt.phi - v.optimizer_gap - v.sampling_slack) all_large = false;
  }
  res.verdict = all_small   ? Dichotomy::kTBranch
                : all_large ? Dichotomy::kTperpBranch
                            : Dichotomy::kInconclusive;
  return res;
}

}  // namespace lsa
