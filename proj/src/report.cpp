#include "lsa/report.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "lsa/approximability.hpp"
#include "lsa/detection.hpp"
#include "lsa/dimension.hpp"
#include "lsa/generators.hpp"
#include "lsa/tangents.hpp"
#include "lsa/verify.hpp"

namespace lsa {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& config) {
  return fmt::format("{:016x}", fnv1a(config.dump()));
}

int exit_code_for_current_exception(std::string* message) {
  auto set = [&](const char* what) {
    if (message) *message = what;
  };
  try {
    throw;
  } catch (const InvalidInput& e) {
    set(e.what());
    return kExitInvalidInput;
  } catch (const nlohmann::json::exception& e) {
    set(e.what());
    return kExitInvalidInput;
  } catch (const AuditFailure& e) {
    set(e.what());
    return kExitAuditFailure;
  } catch (const NumericFailure& e) {
    set(e.what());
    return kExitNumericFailure;
  } catch (const std::exception& e) {
    set(e.what());
    return kExitNumericFailure;
  }
}

namespace {

using StageFn = std::function<StageResult()>;

struct Plan {
  SamplerPtr set;
  std::uint64_t seed = 0;
  std::string output;
  std::vector<std::string> ops;
  std::vector<StageFn> stages;
};

[[noreturn]] void bad(const std::string& ctx, const std::string& msg) {
  throw InvalidInput(ctx + ": " + msg);
}

const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) bad(ctx, fmt::format("missing '{}'", key));
  return j.at(key);
}

double number(const nlohmann::json& j, const char* key, double def, const std::string& ctx) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number()) bad(ctx, fmt::format("'{}' must be a number", key));
  return j.at(key).get<double>();
}

double positive(const nlohmann::json& j, const char* key, double def, const std::string& ctx) {
  const double v = number(j, key, def, ctx);
  if (!(v > 0.0) || !std::isfinite(v)) bad(ctx, fmt::format("'{}' must be positive", key));
  return v;
}

Point point_of(const nlohmann::json& j, int n, const std::string& ctx) {
  if (!j.is_array() || int(j.size()) != n) bad(ctx, fmt::format("expected a point in R^{}", n));
  Point p(n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_number()) bad(ctx, "point coordinates must be numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

std::vector<Point> points_of(const nlohmann::json& j, int n, const std::string& ctx) {
  if (!j.is_array() || j.empty()) bad(ctx, "expected a nonempty list of points");
  std::vector<Point> out;
  for (const auto& p : j) out.push_back(point_of(p, n, ctx));
  return out;
}

ModelClassId class_of(const nlohmann::json& j, const char* key, const std::string& ctx, int n) {
  const auto& v = require(j, key, ctx);
  if (!v.is_string()) bad(ctx, fmt::format("'{}' must be a class name", key));
  const ModelClassId c = ModelClassId::parse(v.get<std::string>());
  if (c.dim() != n) bad(ctx, fmt::format("class {} does not live in R^{}", c.to_string(), n));
  return c;
}

Ladder ladder_of(const nlohmann::json& stage, const std::string& ctx) {
  const auto& j = require(stage, "ladder", ctx);
  const double lambda = number(j, "lambda", 0.5, ctx);
  if (!(lambda > 0.0 && lambda < 1.0)) bad(ctx, "ladder lambda must be in (0, 1)");
  if (j.contains("r_max")) {
    return Ladder::between(positive(j, "r_max", 1.0, ctx), positive(j, "r_min", 1.0, ctx), lambda);
  }
  Ladder l;
  l.r0 = positive(j, "r0", 1.0, ctx);
  l.lambda = lambda;
  l.depth = int(number(j, "depth", 6, ctx));
  if (l.depth < 0 || l.depth > 60) bad(ctx, "ladder depth must be in 0..60");
  return l;
}

Ball ball_of(const nlohmann::json& j, int n, const std::string& ctx) {
  return Ball(point_of(require(j, "center", ctx), n, ctx), positive(j, "radius", 1.0, ctx));
}

ApproxOptions approx_of(const nlohmann::json& stage, const std::string& ctx) {
  ApproxOptions opt;
  opt.tolerance = positive(stage, "tolerance", opt.tolerance, ctx);
  if (stage.contains("budget")) opt.budget = std::size_t(positive(stage, "budget", 1, ctx));
  return opt;
}

std::vector<Point> grid_of(const SetSampler& set, const nlohmann::json& stage,
                           const std::string& ctx) {
  if (stage.contains("points")) return points_of(stage.at("points"), set.dim(), ctx);
  const auto& g = require(stage, "grid", ctx);
  const Ball ball = ball_of(require(g, "window", ctx), set.dim(), ctx);
  const double h = positive(g, "h", 0.1, ctx);
  // The grid is the sampler's own h-net, so every grid point lies on the set.
  const PointCloud net = set.window(ball, h);
  if (net.is_empty()) bad(ctx, "grid window misses the set");
  std::vector<Point> out;
  for (std::size_t i = 0; i < net.size(); ++i) out.emplace_back(net.point(i));
  return out;
}

CoveringProfile profile_of(const nlohmann::json& stage, const ModelClassId& c, std::uint64_t seed,
                           const std::string& ctx) {
  if (!stage.contains("profile")) return covering_profile(c, seed);
  const auto& p = stage.at("profile");
  CoveringProfile out;
  out.alpha = number(p, "alpha", analytic_alpha(c), ctx);
  out.C = positive(p, "C", 1.0, ctx);
  out.s0 = positive(p, "s0", 0.5, ctx);
  return out;
}

std::string estimate_csv(const DimensionEstimate& e) {
  std::ostringstream os;
  os << "scale,count\n";
  for (std::size_t i = 0; i < e.scales.size(); ++i) {
    os << fmt::format("{:.12g},{}\n", e.scales[i], e.counts[i]);
  }
  return os.str();
}

StageFn plan_profile(SamplerPtr set, const nlohmann::json& st, const std::string& ctx) {
  const ModelClassId c = class_of(st, "class", ctx, set->dim());
  const Variant v = parse_variant(st.value("variant", std::string("theta")));
  const auto points = grid_of(*set, st, ctx);
  const Ladder ladder = ladder_of(st, ctx);
  const ApproxOptions opt = approx_of(st, ctx);
  return [=] {
    const Profile p = profile(*set, c, points, ladder, v, opt);
    return StageResult{p.summary(), p.to_csv(), false};
  };
}

StageFn plan_tangent(SamplerPtr set, const nlohmann::json& st, const std::string& ctx) {
  const Point x = point_of(require(st, "x", ctx), set->dim(), ctx);
  BlowupSpec spec;
  if (st.contains("sequence")) {
    std::vector<std::pair<Point, double>> seq;
    for (const auto& e : st.at("sequence")) {
      seq.emplace_back(point_of(require(e, "x", ctx), set->dim(), ctx), positive(e, "r", 1.0, ctx));
    }
    if (seq.size() < 2) bad(ctx, "a directed sequence needs at least two steps");
    spec = BlowupSpec::directed(set, x, std::move(seq));
  } else {
    spec = BlowupSpec::tangent(set, x, ladder_of(st, ctx));
  }
  if (st.contains("view_radii")) spec.view_radii = st.at("view_radii").get<std::vector<double>>();
  spec.resolution = positive(st, "resolution", spec.resolution, ctx);
  spec.tolerance = positive(st, "tolerance", spec.tolerance, ctx);
  std::optional<ModelClassId> c;
  if (st.contains("class")) c = class_of(st, "class", ctx, set->dim());
  const double eps = number(st, "eps", 0.05, ctx);
  const bool directed = st.contains("sequence");
  return [=] {
    const BlowupTrace trace = directed ? directed_blow_up(spec) : blow_up(spec);
    nlohmann::json out = trace.summary();
    bool failed = false;
    if (c && trace.convergent) {
      const bool member = tangent_membership(trace, *c, eps);
      out["membership"] = {{"class", c->to_string()}, {"eps", eps}, {"member", member}};
    }
    std::ostringstream csv;
    csv << "step,r,view_radius,value,slack\n";
    for (std::size_t i = 0; i < trace.gaps.size(); ++i) {
      for (std::size_t k = 0; k < trace.gaps[i].size(); ++k) {
        csv << fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g}\n", i, trace.steps[i].r,
                           trace.view_radii[k], trace.gaps[i][k].value,
                           trace.gaps[i][k].sampling_slack);
      }
    }
    return StageResult{out, csv.str(), failed};
  };
}

DetectabilityParams calibrated(const nlohmann::json& cal, std::uint64_t seed, int n,
                               const std::string& ctx) {
  const ModelClassId t = class_of(cal, "T", ctx, n);
  const ModelClassId s = class_of(cal, "S", ctx, n);
  const int count = int(number(cal, "members", 12, ctx));
  if (count < 1) bad(ctx, "members must be positive");
  CalibrationOptions opt;
  opt.tolerance = positive(cal, "tolerance", opt.tolerance, ctx);
  return calibrate_detectability(t, s, random_members(s, count, seed), opt);
}

StageFn plan_calibrate(SamplerPtr set, std::uint64_t seed, const nlohmann::json& st,
                       const std::string& ctx) {
  class_of(st, "T", ctx, set->dim());
  class_of(st, "S", ctx, set->dim());
  const int n = set->dim();
  return [=] {
    const DetectabilityParams p = calibrated(st, seed, n, ctx);
    std::ostringstream csv;
    csv << "s,Phi\n";
    for (const auto& [s, v] : p.phi_table) csv << fmt::format("{:.12g},{:.12g}\n", s, v);
    return StageResult{p.to_json(), csv.str(), false};
  };
}

StageFn plan_classify(SamplerPtr set, std::uint64_t seed, const nlohmann::json& st,
                      const std::string& ctx) {
  std::optional<DetectabilityParams> fixed;
  if (st.contains("params")) {
    fixed = DetectabilityParams::from_json(st.at("params"));
    fixed->validate();
  } else {
    const auto& cal = require(st, "calibrate", ctx);
    class_of(cal, "T", ctx, set->dim());
    class_of(cal, "S", ctx, set->dim());
  }
  const auto points = grid_of(*set, st, ctx);
  const Ladder ladder = ladder_of(st, ctx);
  ClassifyOptions opt;
  opt.approx = approx_of(st, ctx);
  opt.check_hypothesis = st.value("check_hypothesis", true);
  std::optional<std::array<double, 3>> est;
  if (st.contains("singular_estimate")) {
    const auto& e = st.at("singular_estimate");
    est = std::array<double, 3>{positive(e, "r_max", 0.25, ctx), positive(e, "r_min", 1e-2, ctx),
                                positive(e, "lambda", 0.5, ctx)};
  }
  const nlohmann::json cal = st.value("calibrate", nlohmann::json());
  const int n = set->dim();
  return [=] {
    const DetectabilityParams p = fixed ? *fixed : calibrated(cal, seed, n, ctx);
    const Decomposition d = decompose(*set, points, p, ladder, opt);
    nlohmann::json out = d.summary();
    out["params"] = p.to_json();
    if (est && d.singular.size() > 0) {
      const auto e = minkowski_estimate(d.singular, (*est)[0], (*est)[1], (*est)[2]);
      out["singular_estimate"] = e.to_json();
    }
    return StageResult{out, d.to_csv(), false};
  };
}

StageFn plan_dimension(SamplerPtr set, const nlohmann::json& st, const std::string& ctx) {
  const Ball window = ball_of(require(st, "window", ctx), set->dim(), ctx);
  const double r_max = positive(st, "r_max", 0.25, ctx);
  const double r_min = positive(st, "r_min", 1.0 / 256, ctx);
  const double lambda = positive(st, "lambda", 0.5, ctx);
  if (!(r_min < r_max) || !(lambda < 1.0)) bad(ctx, "need r_min < r_max and lambda < 1");
  return [=] {
    const auto e = minkowski_estimate(*set, window, r_max, r_min, lambda);
    return StageResult{e.to_json(), estimate_csv(e), false};
  };
}

StageFn plan_audit(SamplerPtr set, std::uint64_t seed, const nlohmann::json& st,
                   const std::string& ctx) {
  const std::string kind = require(st, "kind", ctx).get<std::string>();
  const ModelClassId c = class_of(st, "class", ctx, set->dim());
  if (kind == "covering-lemma") {
    const double delta = positive(st, "delta", 0.05, ctx);
    const Ball window = ball_of(require(st, "window", ctx), set->dim(), ctx);
    const int samples = int(number(st, "samples", 100, ctx));
    const double r_lo = positive(st, "r_min", 0.05, ctx);
    const double r_hi = positive(st, "r_max", 0.5, ctx);
    ApproxOptions opt;
    opt.tolerance = positive(st, "tolerance", 1.0 / 64, ctx);
    opt.accept_below = number(st, "accept_below", -1.0, ctx);
    if (samples < 1 || r_lo > r_hi) bad(ctx, "need samples >= 1 and r_min <= r_max");
    return [=] {
      const CoveringProfile p = profile_of(st, c, seed, ctx);
      // Sample points come from the set itself: a fine net of the window.
      const PointCloud net = set->window(window, std::max(r_lo / 4, set->resolution_floor()));
      if (net.is_empty()) throw InvalidInput(ctx + ": window misses the set");
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::size_t> pick(0, net.size() - 1);
      std::uniform_real_distribution<double> logr(std::log(r_lo), std::log(r_hi));
      std::vector<std::pair<Point, double>> xs;
      for (int i = 0; i < samples; ++i) xs.emplace_back(Point(net.point(pick(rng))), std::exp(logr(rng)));
      const LemmaReport rep = verify_covering_lemma(*set, c, p, delta, xs, opt);
      nlohmann::json out = rep.summary();
      out["profile"] = {{"alpha", p.alpha}, {"C", p.C}, {"s0", p.s0}};
      out["passed"] = rep.passed();
      return StageResult{out, rep.to_csv(), !rep.passed()};
    };
  }
  if (kind == "dim-bound") {
    DimBoundQuery q;
    q.eps = positive(st, "eps", 0.05, ctx);
    q.r0 = positive(st, "r0", 1.0, ctx);
    q.points = points_of(require(st, "points", ctx), set->dim(), ctx);
    q.depth = int(number(st, "depth", q.depth, ctx));
    q.tolerance = positive(st, "tolerance", q.tolerance, ctx);
    q.window = ball_of(require(st, "window", ctx), set->dim(), ctx);
    q.est_r_max = positive(st, "est_r_max", q.est_r_max, ctx);
    q.est_r_min = positive(st, "est_r_min", q.est_r_min, ctx);
    q.est_lambda = positive(st, "est_lambda", q.est_lambda, ctx);
    return [=] {
      const CoveringProfile p = profile_of(st, c, seed, ctx);
      const DimBoundReport rep = dimension_bound_audit(*set, c, p, q);
      return StageResult{rep.to_json(), rep.to_csv(), !rep.passed};
    };
  }
  bad(ctx, "audit kind must be covering-lemma or dim-bound");
}

StageFn plan_verify(std::uint64_t seed, const nlohmann::json& st, const std::string& ctx) {
  const double scale = positive(st, "scale", 1000, ctx);
  return [=] {
    const VerifyTable t = verify_suite(seed, std::size_t(scale));
    return StageResult{t.to_json(), t.to_csv(), !t.passed()};
  };
}

StageFn plan_stage(SamplerPtr set, std::uint64_t seed, const nlohmann::json& st,
                   const std::string& op, const std::string& ctx) {
  if (op == "profile") return plan_profile(set, st, ctx);
  if (op == "tangent") return plan_tangent(set, st, ctx);
  if (op == "calibrate") return plan_calibrate(set, seed, st, ctx);
  if (op == "classify") return plan_classify(set, seed, st, ctx);
  if (op == "dimension") return plan_dimension(set, st, ctx);
  if (op == "audit") return plan_audit(set, seed, st, ctx);
  if (op == "verify") return plan_verify(seed, st, ctx);
  bad(ctx, "unknown op");
}

Plan make_plan(const nlohmann::json& config) {
  if (!config.is_object()) throw InvalidInput("config must be a JSON object");
  Plan plan;
  plan.seed = config.value("seed", std::uint64_t{1});
  plan.output = config.value("output", std::string("lsa_out"));
  plan.set = sampler_from_config(require(config, "set", "config"));
  const auto& pipeline = require(config, "pipeline", "config");
  if (!pipeline.is_array() || pipeline.empty()) {
    throw InvalidInput("config: pipeline must be a nonempty list");
  }
  for (std::size_t i = 0; i < pipeline.size(); ++i) {
    const auto& st = pipeline[i];
    const std::string op = require(st, "op", fmt::format("stage {}", i)).get<std::string>();
    const std::string ctx = fmt::format("stage {} ({})", i, op);
    plan.ops.push_back(op);
    plan.stages.push_back(plan_stage(plan.set, plan.seed, st, op, ctx));
  }
  return plan;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw NumericFailure("cannot write " + p.string());
  out << text;
}

}  // namespace

SamplerPtr sampler_from_config(const nlohmann::json& set) {
  if (!set.is_object()) throw InvalidInput("set must be a JSON object");
  if (set.contains("cloud")) return cloud_sampler(read_cloud(set.at("cloud").get<std::string>()));
  return make_sampler(set);
}

StageResult run_stage(SamplerPtr set, std::uint64_t seed, const nlohmann::json& stage) {
  try {
    const std::string op = require(stage, "op", "stage").get<std::string>();
    return plan_stage(std::move(set), seed, stage, op, op)();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("stage: ") + e.what());
  }
}

void validate_config(const nlohmann::json& config) {
  try {
    make_plan(config);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

RunResult run_experiment(const nlohmann::json& config, const std::string& output_override) {
  RunResult res;
  Plan plan;
  try {
    plan = make_plan(config);
  } catch (...) {
    std::string msg;
    exit_code_for_current_exception(&msg);
    res.exit_code = kExitInvalidInput;
    res.report = {{"error", msg}, {"exit_code", res.exit_code}};
    return res;
  }
  const std::filesystem::path dir = output_override.empty() ? plan.output : output_override;

  nlohmann::json stages = nlohmann::json::array();
  bool stopped = false;
  bool audit_failed = false;
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    nlohmann::json row = {{"index", i}, {"op", plan.ops[i]}};
    if (stopped) {
      row["status"] = "skipped";
      stages.push_back(std::move(row));
      continue;
    }
    try {
      StageResult out = plan.stages[i]();
      row["status"] = out.audit_failed ? "audit-failed" : "ok";
      row["result"] = std::move(out.result);
      if (!out.csv.empty()) {
        const std::string name = fmt::format("{:02}_{}.csv", i, plan.ops[i]);
        row["csv"] = name;
        std::filesystem::create_directories(dir);
        write_file(dir / name, out.csv);
        res.files.push_back(name);
      }
      audit_failed = audit_failed || out.audit_failed;
    } catch (...) {
      std::string msg;
      res.exit_code = exit_code_for_current_exception(&msg);
      row["status"] = "failed";
      row["error"] = msg;
      row["exit_code"] = res.exit_code;
      stopped = true;
    }
    stages.push_back(std::move(row));
  }
  if (res.exit_code == kExitOk && audit_failed) res.exit_code = kExitAuditFailure;

  res.report = {{"provenance",
                 {{"config_hash", config_hash(config)},
                  {"seed", plan.seed},
                  {"tool_version", kToolVersion}}},
                {"stages", stages},
                {"summary",
                 {{"exit_code", res.exit_code},
                  {"audits_passed", !audit_failed},
                  {"completed", !stopped}}}};
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", res.report.dump(2) + "\n");
  res.files.push_back("report.json");
  return res;
}

}  // namespace lsa
