#include "lsa/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "lsa/approximability.hpp"
#include "lsa/dimension.hpp"
#include "lsa/generators.hpp"
#include "lsa/set_distance.hpp"

namespace lsa {

void PropertyRow::record(double margin, const nlohmann::json& detail) {
  ++cases;
  worst_margin = std::min(worst_margin, margin);
  if (margin < -tolerance) {
    if (failures == 0) repro = detail;
    ++failures;
  }
}

bool VerifyTable::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const PropertyRow& r) { return r.passed(); });
}

std::string VerifyTable::to_csv() const {
  std::ostringstream os;
  os << "module,property,cases,failures,worst_margin,observed,status\n";
  for (const auto& r : rows) {
    os << fmt::format("{},{},{},{},{:.12g},{:.12g},{}\n", r.module, r.property, r.cases,
                      r.failures, r.worst_margin, r.observed, r.passed() ? "pass" : "fail");
  }
  return os.str();
}

nlohmann::json VerifyTable::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"module", r.module},       {"property", r.property},
                        {"cases", r.cases},         {"failures", r.failures},
                        {"worst_margin", r.worst_margin}, {"tolerance", r.tolerance},
                        {"observed", r.observed},   {"passed", r.passed()}};
    if (!r.repro.is_null()) j["repro"] = r.repro;
    rows_j.push_back(std::move(j));
  }
  return {{"seed", seed}, {"passed", passed()}, {"rows", rows_j}};
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Point random_point(Rng& rng, int n, double half) {
  Point p(n);
  for (int i = 0; i < n; ++i) p[i] = uniform(rng, -half, half);
  return p;
}

std::vector<Point> random_set(Rng& rng, int n) {
  std::vector<Point> pts(uniform_int(rng, 1, 8));
  for (auto& p : pts) p = random_point(rng, n, 2.0);
  return pts;
}

PointCloud cloud(const std::vector<Point>& pts) { return PointCloud::from_points(pts); }

std::vector<Point> scaled(const std::vector<Point>& pts, double s, const Point& shift) {
  std::vector<Point> out;
  for (const auto& p : pts) out.push_back(s * p + shift);
  return out;
}

nlohmann::json points_json(const std::vector<Point>& pts) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : pts) j.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  return j;
}

double rel(const std::vector<Point>& a, const std::vector<Point>& b, const Point& x, double r) {
  return relative_excess(cloud(a), cloud(b), x, r).value;
}

double ww(const std::vector<Point>& a, const std::vector<Point>& b, const Point& x, double r) {
  return walkup_wets(cloud(a), cloud(b), x, r).value;
}

bool contains_point(const std::vector<Point>& set, const Point& p) {
  return std::any_of(set.begin(), set.end(), [&](const Point& q) { return q == p; });
}

std::vector<Point> in_ball(const std::vector<Point>& set, const Point& x, double r) {
  std::vector<Point> out;
  const Ball ball(x, r);
  for (const auto& p : set) {
    if (ball.contains(p)) out.push_back(p);
  }
  return out;
}

PropertyRow make_row(const std::string& module, const std::string& property) {
  PropertyRow r;
  r.module = module;
  r.property = property;
  return r;
}

}  // namespace

std::vector<PropertyRow> exact_property_rows(std::uint64_t seed, std::size_t triples) {
  const char* mod = "set-distance";
  PropertyRow ex_tri = make_row(mod, "excess triangle inequality");
  PropertyRow ex_mono = make_row(mod, "excess monotonicity");
  PropertyRow re_closure = make_row(mod, "relative excess closure");
  PropertyRow re_contain = make_row(mod, "relative excess containment");
  PropertyRow re_mono = make_row(mod, "relative excess monotonicity");
  PropertyRow re_strong = make_row(mod, "relative excess strong quasitriangle");
  PropertyRow re_weak2 = make_row(mod, "relative excess weak quasitriangle 2@2r");
  PropertyRow re_weak3 = make_row(mod, "relative excess weak quasitriangle 3@3r");
  PropertyRow re_scale = make_row(mod, "relative excess scale invariance");
  PropertyRow re_trans = make_row(mod, "relative excess translation invariance");
  PropertyRow ww_closure = make_row(mod, "walkup-wets closure");
  PropertyRow ww_contain = make_row(mod, "walkup-wets containment");
  PropertyRow ww_mono = make_row(mod, "walkup-wets monotonicity");
  PropertyRow ww_strong = make_row(mod, "walkup-wets strong quasitriangle");
  PropertyRow ww_weak2 = make_row(mod, "walkup-wets weak quasitriangle 2@2r");
  PropertyRow ww_weak3 = make_row(mod, "walkup-wets weak quasitriangle 3@3r");
  PropertyRow ww_scale = make_row(mod, "walkup-wets scale invariance");
  PropertyRow ww_trans = make_row(mod, "walkup-wets translation invariance");

  Rng rng(seed);
  for (std::size_t t = 0; t < triples; ++t) {
    const int n = uniform_int(rng, 1, 3);
    const auto A = random_set(rng, n);
    const auto B = random_set(rng, n);
    const auto C = random_set(rng, n);
    const Point x = random_point(rng, n, 1.5);
    const double r = std::exp(uniform(rng, std::log(0.3), std::log(3.0)));
    const nlohmann::json detail = {{"A", points_json(A)}, {"B", points_json(B)},
                                   {"C", points_json(C)},
                                   {"x", std::vector<double>(x.data(), x.data() + n)},
                                   {"r", r}};
    const PointCloud a = cloud(A), b = cloud(B), c = cloud(C);

    ex_tri.record(excess(a, b) + excess(b, c) - excess(a, c), detail);
    {
      std::vector<Point> a2 = A, b2(B.begin(), B.begin() + (B.size() + 1) / 2);
      a2.insert(a2.end(), C.begin(), C.end());
      ex_mono.record(excess(cloud(a2), cloud(b2)) - excess(a, b), detail);
    }

    const double d_ab = rel(A, B, x, r);
    {
      const double delta = uniform(rng, 0.01, 1.0);
      re_closure.record((1 + delta) * rel(A, B, x, r * (1 + delta)) - d_ab, detail);
      ww_closure.record((1 + delta) * ww(A, B, x, r * (1 + delta)) - ww(A, B, x, r), detail);
    }
    {
      // B' = (A ∩ B(x,r)) ∪ C has zero relative excess; dropping a point of
      // A ∩ B(x,r) that C does not contain makes it positive.
      const auto local = in_ball(A, x, r);
      std::vector<Point> full = local;
      full.insert(full.end(), C.begin(), C.end());
      re_contain.record(rel(A, full, x, r) == 0.0 ? 0.0 : -1.0, detail);
      if (!local.empty() && !contains_point(C, local.front())) {
        std::vector<Point> holed(local.begin() + 1, local.end());
        holed.insert(holed.end(), C.begin(), C.end());
        re_contain.record(rel(A, holed, x, r) > 0.0 ? 0.0 : -1.0, detail);
      }
      const bool a_in_b = std::all_of(local.begin(), local.end(),
                                      [&](const Point& p) { return contains_point(B, p); });
      const auto local_b = in_ball(B, x, r);
      const bool b_in_a = std::all_of(local_b.begin(), local_b.end(),
                                      [&](const Point& p) { return contains_point(A, p); });
      ww_contain.record((ww(A, B, x, r) == 0.0) == (a_in_b && b_in_a) ? 0.0 : -1.0, detail);
      std::vector<Point> outside = A;
      for (const auto& p : B) {
        if ((p - x).norm() > r) outside.push_back(p);
      }
      std::vector<Point> mirror = local;
      for (const auto& p : C) {
        if ((p - x).norm() > r) mirror.push_back(p);
      }
      if (!mirror.empty()) {
        ww_contain.record(ww(outside, mirror, x, r) == 0.0 ? 0.0 : -1.0, detail);
      }
    }
    {
      const Point y = x + random_point(rng, n, 1.0);
      const double s = (x - y).norm() + r + uniform(rng, 0.0, 1.0);
      std::vector<Point> a2 = A, b2(B.begin(), B.begin() + (B.size() + 1) / 2);
      a2.insert(a2.end(), C.begin(), C.end());
      re_mono.record(s / r * rel(a2, b2, y, s) - d_ab, detail);
      ww_mono.record(s / r * ww(A, B, y, s) - ww(A, B, x, r), detail);
    }
    {
      const double eps = d_ab;
      re_strong.record(eps + (1 + eps) * rel(B, C, x, r * (1 + eps)) - rel(A, C, x, r), detail);
      const double e1 = d_ab, e2 = rel(C, B, x, r);
      ww_strong.record((1 + e2) * ww(A, B, x, r * (1 + e2)) + (1 + e1) * ww(B, C, x, r * (1 + e1)) -
                           ww(A, C, x, r),
                       detail);
    }
    {
      const Point xb = B[uniform_int(rng, 0, int(B.size()) - 1)];
      re_weak2.record(rel(A, B, xb, r) + 2 * rel(B, C, xb, 2 * r) - rel(A, C, xb, r), detail);
      ww_weak2.record(2 * ww(A, B, xb, 2 * r) + 2 * ww(B, C, xb, 2 * r) - ww(A, C, xb, r), detail);
      Point dir = random_point(rng, n, 1.0);
      if (dir.norm() > 0) dir *= uniform(rng, 0.0, r) / dir.norm();
      const Point xn = xb + dir;
      re_weak3.record(rel(A, B, xn, r) + 3 * rel(B, C, xn, 3 * r) - rel(A, C, xn, r), detail);
      ww_weak3.record(3 * ww(A, B, xn, 3 * r) + 3 * ww(B, C, xn, 3 * r) - ww(A, C, xn, r), detail);
    }
    {
      const double lambda = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
      const Point zero = Point::Zero(n);
      const auto la = scaled(A, lambda, zero), lb = scaled(B, lambda, zero);
      re_scale.record(-std::abs(rel(la, lb, lambda * x, lambda * r) - d_ab), detail);
      ww_scale.record(-std::abs(ww(la, lb, lambda * x, lambda * r) - ww(A, B, x, r)), detail);
      const Point z = random_point(rng, n, 5.0);
      const auto ta = scaled(A, 1.0, z), tb = scaled(B, 1.0, z);
      re_trans.record(-std::abs(rel(ta, tb, x + z, r) - d_ab), detail);
      ww_trans.record(-std::abs(ww(ta, tb, x + z, r) - ww(A, B, x, r)), detail);
    }
  }
  return {ex_tri,    ex_mono,    re_closure, re_contain, re_mono,  re_strong,
          re_weak2,  re_weak3,   re_scale,   re_trans,   ww_closure, ww_contain,
          ww_mono,   ww_strong,  ww_weak2,   ww_weak3,   ww_scale, ww_trans};
}

PropertyRow hausdorff_monotonicity_row(int imax) {
  PropertyRow row = make_row("set-distance", "relative hausdorff monotonicity failure");
  row.tolerance = 1e-12;
  const Point zero = Point::Zero(1);
  for (int i = 1; i <= imax; ++i) {
    const double q = 1.0 + 1.0 / i;
    const auto a = PointCloud(1, {0.0, 1.0});
    const auto b = PointCloud(1, {0.0, q});
    const double small = relative_hausdorff(a, b, zero, 1.0).value;
    const double large = relative_hausdorff(a, b, zero, q).value;
    const nlohmann::json detail = {{"i", i}, {"at_1", small}, {"at_1_plus", large}};
    row.record(-std::abs(small - 1.0), detail);
    row.record(-std::abs(large - 1.0 / (i + 1)), detail);
    const double ratio = small / large;
    row.record(-std::abs(ratio - (i + 1)) / (i + 1), detail);
    row.observed = std::max(row.observed, ratio);
  }
  return row;
}

PropertyRow walkup_wets_convergence_row(int imax) {
  PropertyRow row = make_row("set-distance", "walkup-wets convergence 1/(i r)");
  row.tolerance = 1e-12;
  const Point zero = Point::Zero(1);
  for (int i = 1; i <= imax; ++i) {
    const auto a = PointCloud(1, {0.0, 1.0 + 1.0 / i});
    const auto b = PointCloud(1, {0.0, 1.0});
    for (double r : {2.0, 4.0, 8.0}) {
      const double v = walkup_wets(a, b, zero, r).value;
      row.record(-std::abs(v - 1.0 / (i * r)), {{"i", i}, {"r", r}, {"value", v}});
      row.observed = std::max(row.observed, v);
    }
  }
  return row;
}

std::vector<PropertyRow> approximability_rows(std::uint64_t seed, std::size_t queries) {
  PropertyRow lower = make_row("approximability", "theta lower size bound");
  PropertyRow upper = make_row("approximability", "theta upper size bound");
  PropertyRow compare = make_row("approximability", "beta <= theta");
  const std::vector<nlohmann::json> specs = {
      {{"spec", "cross_2d"}},
      {{"spec", "circle"}, {"params", {{"radius", 1.0}}}},
      {{"spec", "koch"}, {"params", {{"angle_deg", 30.0}, {"level", 5}}}},
      {{"spec", "graph"}, {"params", {{"function", "parabola"}, {"amplitude", 1.0}}}},
  };
  std::vector<SamplerPtr> sets;
  for (const auto& s : specs) sets.push_back(make_sampler(s));
  const ModelClassId g21 = ModelClassId::grassmannian(2, 1);
  ApproxOptions opt;
  opt.tolerance = 1.0 / 16;

  Rng rng(seed);
  for (std::size_t q = 0; q < queries; ++q) {
    const std::size_t k = q % sets.size();
    const SetSampler& set = *sets[k];
    Point x;
    double r = 0.0, dist = 0.0;
    do {
      x = random_point(rng, 2, 1.5);
      r = std::exp(uniform(rng, std::log(0.1), std::log(2.0)));
      dist = set.distance(x);
    } while (dist > r);
    const auto th = theta(set, g21, x, r, opt);
    const auto be = beta(set, g21, x, r, opt);
    const nlohmann::json detail = {{"set", specs[k]},
                                   {"x", {x[0], x[1]}},
                                   {"r", r},
                                   {"theta", th.to_json()},
                                   {"beta", be.to_json()}};
    lower.record(th.value + th.sampling_slack - dist / r, detail);
    upper.record(1.0 + dist / r + th.sampling_slack - th.value, detail);
    compare.record(th.value + th.optimizer_gap + th.sampling_slack + be.optimizer_gap +
                       be.sampling_slack - be.value,
                   detail);
  }
  return {lower, upper, compare};
}

std::vector<PropertyRow> covering_rows(std::uint64_t seed, std::size_t cases) {
  PropertyRow exact_le = make_row("dimension", "exact <= greedy");
  PropertyRow greedy_le = make_row("dimension", "greedy(s) <= exact(s/2)");
  PropertyRow mono = make_row("dimension", "greedy count monotone in s");
  Rng rng(seed);
  for (std::size_t t = 0; t < cases; ++t) {
    const int n = uniform_int(rng, 1, 3);
    std::vector<Point> pts(uniform_int(rng, 1, 14));
    for (auto& p : pts) p = random_point(rng, n, 1.0);
    const PointCloud c = cloud(pts);
    const double s = uniform(rng, 0.05, 1.0);
    const nlohmann::json detail = {{"points", points_json(pts)}, {"s", s}};
    const auto g = double(greedy_count(c, s));
    exact_le.record(g - double(covering_number_exact(c, s)), detail);
    greedy_le.record(double(covering_number_exact(c, s / 2)) - g, detail);
    const double s2 = s * uniform(rng, 1.0, 3.0);
    mono.record(g - double(greedy_count(c, s2)), detail);
  }
  return {exact_le, greedy_le, mono};
}

VerifyTable verify_suite(std::uint64_t seed, std::size_t scale) {
  VerifyTable t;
  t.seed = seed;
  auto add = [&](std::vector<PropertyRow> rows) {
    t.rows.insert(t.rows.end(), rows.begin(), rows.end());
  };
  add(exact_property_rows(seed, scale));
  t.rows.push_back(hausdorff_monotonicity_row());
  t.rows.push_back(walkup_wets_convergence_row());
  add(approximability_rows(seed + 1, std::max<std::size_t>(scale / 10, 8)));
  add(covering_rows(seed + 2, std::max<std::size_t>(scale / 5, 10)));
  return t;
}

}  // namespace lsa
