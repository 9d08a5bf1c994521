// Command-line front end. Every subcommand prints JSON (or CSV where noted)
// to stdout and exits 0 ok, 1 invalid input, 2 numeric failure, 3 audit failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsa/approximability.hpp"
#include "lsa/generators.hpp"
#include "lsa/report.hpp"
#include "lsa/set_distance.hpp"
#include "lsa/verify.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& text_or_path) {
  if (!text_or_path.empty() && text_or_path.front() == '{') return json::parse(text_or_path);
  std::ifstream in(text_or_path);
  if (!in) throw lsa::InvalidInput("cannot read " + text_or_path);
  return json::parse(in);
}

std::vector<double> numbers(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw lsa::InvalidInput("not a number: '" + item + "'");
    }
  }
  return out;
}

lsa::Point point(const std::string& csv) {
  const auto v = numbers(csv);
  if (v.empty()) throw lsa::InvalidInput("empty point");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

json point_list(const std::vector<std::string>& items) {
  json out = json::array();
  for (const auto& p : items) out.push_back(numbers(p));
  return out;
}

json window(const std::string& center, double radius) {
  return {{"center", numbers(center)}, {"radius", radius}};
}

void emit(const lsa::StageResult& r, bool csv) {
  if (csv) {
    std::cout << r.csv;
  } else {
    std::cout << r.result.dump(2) << "\n";
  }
}

struct Common {
  std::string set;
  std::uint64_t seed = 1;
  bool csv = false;
};

void add_set(CLI::App* cmd, Common& c) {
  cmd->add_option("--set", c.set, "sampler spec JSON (file or inline), or {\"cloud\": file}")
      ->required();
  cmd->add_option("--seed", c.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local set approximation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lsa::kToolVersion));

  Common common;
  int code = lsa::kExitOk;
  std::function<void()> action;

  // distance
  auto* dist = app.add_subcommand("distance", "distance between two point clouds (CSV)");
  std::string a_path, b_path, kind = "ww", x_s;
  double r = 1.0;
  dist->add_option("--a", a_path, "first cloud")->required();
  dist->add_option("--b", b_path, "second cloud")->required();
  dist->add_option("--kind", kind, "excess | rel-excess | ww | rel-hausdorff");
  dist->add_option("--x", x_s, "ball center, comma separated");
  dist->add_option("--r", r, "ball radius");
  dist->callback([&] {
    action = [&] {
      const auto a = lsa::read_cloud(a_path), b = lsa::read_cloud(b_path);
      const auto k = lsa::parse_distance_kind(kind);
      json out = {{"kind", lsa::to_string(k)}};
      if (k == lsa::DistanceKind::kExcess) {
        out["value"] = lsa::excess(a, b);
        out["sampling_slack"] = 2.0 * std::max(a.h(), b.h());
      } else {
        const lsa::Point x = x_s.empty() ? lsa::Point::Zero(a.dim()) : point(x_s);
        lsa::DistanceValue v;
        if (k == lsa::DistanceKind::kRelativeExcess) v = lsa::relative_excess(a, b, x, r);
        if (k == lsa::DistanceKind::kWalkupWets) v = lsa::walkup_wets(a, b, x, r);
        if (k == lsa::DistanceKind::kRelativeHausdorff) v = lsa::relative_hausdorff(a, b, x, r);
        out["value"] = v.value;
        out["sampling_slack"] = v.sampling_slack;
      }
      std::cout << out.dump(2) << "\n";
    };
  });

  // theta / beta
  std::string cls;
  double tolerance = 1.0 / 32;
  for (const char* name : {"theta", "beta"}) {
    auto* cmd = app.add_subcommand(name, std::string(name) + " approximability at one (x, r)");
    add_set(cmd, common);
    cmd->add_option("--class", cls, "model class, e.g. G(2,1)")->required();
    cmd->add_option("--x", x_s, "point, comma separated")->required();
    cmd->add_option("--r", r, "scale");
    cmd->add_option("--tolerance", tolerance, "sampling tolerance");
    const std::string variant = name;
    cmd->callback([&, variant] {
      action = [&, variant] {
        const auto set = lsa::sampler_from_config(load_json(common.set));
        lsa::ApproxOptions opt;
        opt.tolerance = tolerance;
        const auto c = lsa::ModelClassId::parse(cls);
        const auto res = variant == "theta" ? lsa::theta(*set, c, point(x_s), r, opt)
                                            : lsa::beta(*set, c, point(x_s), r, opt);
        std::cout << res.to_json().dump(2) << "\n";
      };
    });
  }

  // pipeline stages exposed directly
  std::vector<std::string> pts;
  std::string center, range, ladder_s, params_path, t_cls, s_cls, variant_s = "theta";
  double radius = 1.0, h = 0.1, lambda = 0.5, delta = 0.05, eps = 0.05, r0 = 1.0;
  int depth = 6, samples = 100, members = 12;

  auto ladder = [&]() -> json {
    const auto v = numbers(ladder_s.empty() ? "1,0.5,6" : ladder_s);
    if (v.size() != 3) throw lsa::InvalidInput("--ladder is r0,lambda,depth");
    return {{"r0", v[0]}, {"lambda", v[1]}, {"depth", int(v[2])}};
  };
  auto grid_or_points = [&](json& st) {
    if (!pts.empty()) {
      st["points"] = point_list(pts);
    } else {
      st["grid"] = {{"window", window(center, radius)}, {"h", h}};
    }
  };
  auto run_stage_cmd = [&](std::function<json()> build) {
    return [&, build] {
      action = [&, build] {
        const auto set = lsa::sampler_from_config(load_json(common.set));
        const auto res = lsa::run_stage(set, common.seed, build());
        emit(res, common.csv);
        if (res.audit_failed) code = lsa::kExitAuditFailure;
      };
    };
  };

  auto* prof = app.add_subcommand("profile", "approximability profile over points and a ladder (CSV)");
  add_set(prof, common);
  prof->add_option("--class", cls)->required();
  prof->add_option("--variant", variant_s, "theta | beta");
  prof->add_option("--point", pts, "grid point (repeatable)");
  prof->add_option("--center", center, "grid window center");
  prof->add_option("--radius", radius, "grid window radius");
  prof->add_option("--step", h, "grid spacing");
  prof->add_option("--ladder", ladder_s, "r0,lambda,depth");
  prof->add_option("--tolerance", tolerance);
  prof->add_flag("--csv", common.csv, "print CSV instead of the JSON summary");
  prof->callback(run_stage_cmd([&] {
    json st = {{"op", "profile"}, {"class", cls}, {"variant", variant_s},
               {"ladder", ladder()}, {"tolerance", tolerance}};
    grid_or_points(st);
    return st;
  }));

  auto* tan = app.add_subcommand("tangent", "blow-up trace at a point");
  add_set(tan, common);
  tan->add_option("--x", x_s)->required();
  tan->add_option("--ladder", ladder_s, "r0,lambda,depth");
  tan->add_option("--class", cls, "optional class for tangent membership");
  tan->add_option("--eps", eps);
  tan->callback(run_stage_cmd([&] {
    json st = {{"op", "tangent"}, {"x", numbers(x_s)}, {"ladder", ladder()}, {"eps", eps}};
    if (!cls.empty()) st["class"] = cls;
    return st;
  }));

  auto* cal = app.add_subcommand("calibrate", "empirical (phi, Phi) detectability and thresholds");
  add_set(cal, common);
  cal->add_option("--T", t_cls)->required();
  cal->add_option("--S", s_cls)->required();
  cal->add_option("--members", members);
  cal->add_option("--tolerance", tolerance);
  cal->callback(run_stage_cmd([&] {
    return json{{"op", "calibrate"}, {"T", t_cls}, {"S", s_cls}, {"members", members},
                {"tolerance", tolerance}};
  }));

  auto* cls_cmd = app.add_subcommand("classify", "flat/singular decomposition (CSV)");
  add_set(cls_cmd, common);
  cls_cmd->add_option("--params", params_path, "detectability JSON from calibrate");
  cls_cmd->add_option("--T", t_cls);
  cls_cmd->add_option("--S", s_cls);
  cls_cmd->add_option("--point", pts);
  cls_cmd->add_option("--center", center);
  cls_cmd->add_option("--radius", radius);
  cls_cmd->add_option("--resolution", h, "sampling resolution");
  cls_cmd->add_option("--ladder", ladder_s);
  cls_cmd->add_option("--tolerance", tolerance);
  cls_cmd->add_flag("--csv", common.csv);
  cls_cmd->callback(run_stage_cmd([&] {
    json st = {{"op", "classify"}, {"ladder", ladder()}, {"tolerance", tolerance}};
    if (!params_path.empty()) {
      st["params"] = load_json(params_path);
    } else {
      st["calibrate"] = {{"T", t_cls}, {"S", s_cls}, {"members", members}};
    }
    grid_or_points(st);
    return st;
  }));

  auto* dim = app.add_subcommand("dimension", "Minkowski dimension estimate on a window");
  add_set(dim, common);
  dim->add_option("--center", center)->required();
  dim->add_option("--radius", radius);
  dim->add_option("--range", range, "r_max,r_min");
  dim->add_option("--lambda", lambda);
  dim->add_flag("--csv", common.csv);
  dim->callback(run_stage_cmd([&] {
    const auto rr = numbers(range.empty() ? "0.25,0.00390625" : range);
    if (rr.size() != 2) throw lsa::InvalidInput("--range is r_max,r_min");
    return json{{"op", "dimension"}, {"window", window(center, radius)}, {"r_max", rr[0]},
                {"r_min", rr[1]}, {"lambda", lambda}};
  }));

  auto* aud = app.add_subcommand("audit", "covering-lemma or dim-bound audit (CSV)");
  std::string audit_kind;
  aud->add_option("kind", audit_kind, "covering-lemma | dim-bound")->required();
  add_set(aud, common);
  aud->add_option("--class", cls)->required();
  aud->add_option("--center", center)->required();
  aud->add_option("--radius", radius);
  aud->add_option("--delta", delta);
  aud->add_option("--samples", samples);
  aud->add_option("--range", range, "r_max,r_min for sampled radii or the estimate");
  aud->add_option("--eps", eps);
  aud->add_option("--r0", r0);
  aud->add_option("--depth", depth);
  aud->add_option("--point", pts);
  aud->add_option("--tolerance", tolerance);
  bool audit_json = false;
  aud->add_flag("--json", audit_json, "print the JSON summary instead of CSV");
  aud->callback([&] {
    common.csv = !audit_json;
    run_stage_cmd([&] {
      json st = {{"op", "audit"}, {"kind", audit_kind}, {"class", cls},
                 {"window", window(center, radius)}, {"tolerance", tolerance}};
      const auto rr = range.empty() ? std::vector<double>{} : numbers(range);
      if (audit_kind == "covering-lemma") {
        st["delta"] = delta;
        st["samples"] = samples;
        if (rr.size() == 2) {
          st["r_max"] = rr[0];
          st["r_min"] = rr[1];
        }
      } else {
        st["eps"] = eps;
        st["r0"] = r0;
        st["depth"] = depth;
        st["points"] = pts.empty() ? json::array({numbers(center)}) : point_list(pts);
        if (rr.size() == 2) {
          st["est_r_max"] = rr[0];
          st["est_r_min"] = rr[1];
        }
      }
      return st;
    })();
  });

  auto* gen = app.add_subcommand("generate", "sample a window of a set (CSV)");
  gen->add_option("--spec", common.set, "sampler spec JSON")->required();
  gen->add_option("--x", x_s)->required();
  gen->add_option("--r", r);
  gen->add_option("--resolution", h, "sampling resolution");
  gen->callback([&] {
    action = [&] {
      const auto set = lsa::sampler_from_config(load_json(common.set));
      std::cout << lsa::cloud_to_csv(set->window(lsa::Ball(point(x_s), r), h));
    };
  });

  std::size_t scale = 1000;
  auto* ver = app.add_subcommand("verify", "property self-check suite (CSV table)");
  ver->add_option("--seed", common.seed);
  ver->add_option("--scale", scale, "random cases per exact property");
  ver->callback([&] {
    action = [&] {
      const auto t = lsa::verify_suite(common.seed, scale);
      std::cout << t.to_csv();
      if (!t.passed()) {
        for (const auto& row : t.rows) {
          if (!row.passed()) std::cerr << row.property << " repro: " << row.repro.dump() << "\n";
        }
        code = lsa::kExitAuditFailure;
      }
    };
  });

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->callback([&] {
    action = [&] {
      const auto res = lsa::run_experiment(load_json(config_path), out_dir);
      std::cout << res.report.dump(2) << "\n";
      code = res.exit_code;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lsa::kExitInvalidInput;
  }
  try {
    if (action) action();
  } catch (...) {
    std::string msg;
    code = lsa::exit_code_for_current_exception(&msg);
    std::cerr << "error: " << msg << "\n";
  }
  return code;
}
