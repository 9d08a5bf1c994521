#include "lsa/approximability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "lsa/parallel.hpp"

namespace lsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRefineHalfWidth = 8;
constexpr std::size_t kFullLocalGridMax = 289;  // 17^2

struct Candidate {
  double value = kInf;
  int family = 0;
  std::vector<double> p;
};

// Theta / beta objective on a normalized cloud: the comparison ball is B(0,1).
class Objective {
 public:
  Objective(const PointCloud& u, Variant v, double member_h)
      : u_(u), index_(u), v_(v), hs_(member_h), n_(u.dim()), unit_(Point::Zero(u.dim()), 1.0) {
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = u.point(i).norm();
      if (r <= 1.0) order.emplace_back(-r, i);
    }
    std::sort(order.begin(), order.end());
    inner_.reserve(order.size() * n_);
    for (const auto& [neg, i] : order) {
      inner_.insert(inner_.end(), u.data() + i * n_, u.data() + (i + 1) * n_);
    }
  }

  std::size_t calls() const { return calls_; }
  const std::vector<double>& inner() const { return inner_; }

  // Returns the objective, or some value > bound once it is certain to
  // exceed bound.
  double operator()(const FamilySearch& f, const double* p, double bound) {
    ++calls_;
    const ShapePtr s = f.build(p);
    double t1 = 0.0;
    for (std::size_t i = 0; i < inner_.size(); i += n_) {
      t1 = std::max(t1, s->distance(inner_.data() + i));
      if (t1 > bound) return t1;
    }
    if (v_ == Variant::kBeta) return t1;
    buf_.clear();
    s->sample(unit_, hs_, buf_);
    double t2 = 0.0;
    const double b2 = bound * bound;
    for (std::size_t i = 0; i < buf_.size(); i += n_) {
      t2 = std::max(t2, index_.nearest_sq(buf_.data() + i));
      if (t2 > b2) return std::sqrt(t2);
    }
    return std::max(t1, std::sqrt(t2));
  }

 private:
  const PointCloud& u_;
  NeighborIndex index_;
  Variant v_;
  double hs_;
  int n_;
  Ball unit_;
  std::vector<double> inner_;
  std::vector<double> buf_;
  std::size_t calls_ = 0;
};

double radical_inverse(std::size_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * double(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

std::vector<double> axis_values(const ParamAxis& a) {
  std::vector<double> vals;
  if (a.discrete) {
    for (int k = int(a.lo); k <= int(a.hi); ++k) vals.push_back(k);
    return vals;
  }
  const int k = int(std::floor((a.hi - a.lo) / a.step + 1e-9));
  const int count = a.periodic ? std::max(k, 1) : k + 1;
  for (int i = 0; i < count; ++i) vals.push_back(a.lo + i * a.step);
  return vals;
}

std::vector<std::vector<double>> coarse_points(const FamilySearch& f, std::size_t budget) {
  const std::size_t d = f.axes.size();
  std::vector<std::vector<double>> pts;
  if (d == 0) return {{}};
  if (f.product_size() <= budget) {
    std::vector<std::vector<double>> vals;
    for (const auto& a : f.axes) vals.push_back(axis_values(a));
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
      std::vector<double> p(d);
      for (std::size_t j = 0; j < d; ++j) p[j] = vals[j][idx[j]];
      pts.push_back(std::move(p));
      std::size_t j = 0;
      while (j < d && ++idx[j] == vals[j].size()) idx[j] = 0, ++j;
      if (j == d) break;
    }
    return pts;
  }
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  if (d > std::size(primes)) throw InvalidInput("too many search axes");
  std::vector<double> canonical(d);
  for (std::size_t j = 0; j < d; ++j) canonical[j] = std::clamp(0.0, f.axes[j].lo, f.axes[j].hi);
  pts.push_back(canonical);
  for (std::size_t i = 0; i < budget; ++i) {
    std::vector<double> p(d);
    for (std::size_t j = 0; j < d; ++j) {
      const auto& a = f.axes[j];
      const double h = radical_inverse(i + 20, primes[j]);
      p[j] = a.discrete ? a.lo + std::min(std::floor(h * (a.hi - a.lo + 1)), a.hi - a.lo)
                        : a.lo + h * (a.hi - a.lo);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

// Principal directions of the inner points about the origin.
std::vector<std::pair<int, std::vector<double>>> pca_seeds(const std::vector<FamilySearch>& fams,
                                                           const std::vector<double>& inner,
                                                           int n) {
  std::vector<std::pair<int, std::vector<double>>> out;
  if (inner.empty() || n < 2) return out;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < inner.size(); i += n) {
    const ConstPointMap p(inner.data() + i, n);
    M += p * p.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) return out;
  for (std::size_t f = 0; f < fams.size(); ++f) {
    if (fams[f].axes.empty()) continue;
    if (fams[f].name == "line") {
      out.emplace_back(int(f), angles_of(es.eigenvectors().col(n - 1)));
    } else if (fams[f].name == "hyperplane") {
      out.emplace_back(int(f), angles_of(es.eigenvectors().col(0)));
    }
  }
  return out;
}

void clamp_axes(const FamilySearch& f, std::vector<double>& p) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!f.axes[j].periodic) p[j] = std::clamp(p[j], f.axes[j].lo, f.axes[j].hi);
  }
}

void refine(const FamilySearch& f, Candidate& c, Objective& obj, int passes, double factor) {
  std::vector<std::size_t> cont;
  for (std::size_t j = 0; j < f.axes.size(); ++j) {
    if (!f.axes[j].discrete) cont.push_back(j);
  }
  if (cont.empty()) return;
  std::vector<double> step(f.axes.size());
  for (std::size_t j = 0; j < f.axes.size(); ++j) step[j] = f.axes[j].step;
  const int width = 2 * kRefineHalfWidth + 1;
  std::size_t grid = 1;
  for (std::size_t k = 0; k < cont.size() && grid <= kFullLocalGridMax; ++k) grid *= width;
  for (int pass = 0; pass < passes; ++pass) {
    for (auto j : cont) step[j] /= factor;
    const std::vector<double> center = c.p;
    if (grid <= kFullLocalGridMax) {
      std::vector<int> off(cont.size(), -kRefineHalfWidth);
      for (;;) {
        std::vector<double> q = center;
        for (std::size_t k = 0; k < cont.size(); ++k) q[cont[k]] += off[k] * step[cont[k]];
        clamp_axes(f, q);
        const double v = obj(f, q.data(), c.value);
        if (v < c.value) c.value = v, c.p = q;
        std::size_t k = 0;
        while (k < cont.size() && ++off[k] > kRefineHalfWidth) off[k] = -kRefineHalfWidth, ++k;
        if (k == cont.size()) break;
      }
    } else {
      for (int sweep = 0; sweep < 2; ++sweep) {
        for (auto j : cont) {
          const std::vector<double> base = c.p;
          for (int k = -kRefineHalfWidth; k <= kRefineHalfWidth; ++k) {
            if (k == 0) continue;
            std::vector<double> q = base;
            q[j] += k * step[j];
            clamp_axes(f, q);
            const double v = obj(f, q.data(), c.value);
            if (v < c.value) c.value = v, c.p = q;
          }
        }
      }
    }
  }
}

double local_gap(const FamilySearch& f, int passes, double factor) {
  double g = 0.0;
  const double shrink = std::pow(factor, passes);
  for (const auto& a : f.axes) {
    if (!a.discrete) g += a.lipschitz * a.step / shrink / 2.0;
  }
  return g;
}

ApproxResult run(const SetSampler& set, const ModelClassId& c, const PointRef& x, double r,
                 Variant v, const ApproxOptions& opt) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("radius must be positive");
  check_dim(set.dim(), int(x.size()), "approximability query");
  check_dim(set.dim(), c.dim(), "approximability class");
  const double d = set.distance(x);
  if (d > r * (1.0 + opt.margin)) {
    throw InvalidInput(fmt::format("set misses B(x, r(1+margin)) (dist {} at r {})", d, r));
  }
  const double h = set.fixed_resolution()
                       ? 0.0
                       : std::max(opt.tolerance * r / 2.0, set.resolution_floor());
  const double radius = v == Variant::kTheta ? 2.0 * r + d + 2.0 * h : r;
  const PointCloud w = set.window(Ball(x, radius), h);
  const PointCloud u = transform(w, x, r);
  const double hs = opt.member_h > 0.0 ? opt.member_h : (u.h() > 0.0 ? u.h() : 1.0 / 64);
  std::vector<ModelMember> seeds;
  auto add = [&](const std::vector<ModelMember>& ms) {
    for (const auto& m : ms) {
      if (!(m.cls == c)) throw InvalidInput("witness member belongs to another class");
      seeds.push_back(dilate_member(m, 1.0 / r));
    }
  };
  add(opt.witnesses);
  if (opt.sampler_witnesses) add(set.witnesses(c, x, r));
  if (u.is_empty()) {
    // Only reachable for beta when A misses B(x, r): every member is exact.
    ApproxResult res;
    res.variant = v;
    res.best_member = dilate_member(make_member(c, 0, std::vector<double>(
                                        search_space(c).families[0].axes.size(), 0.0)),
                                    r);
    return res;
  }
  ApproxResult res = optimize_normalized(u, c, v, hs, seeds, opt);
  res.best_member = dilate_member(res.best_member, r);
  return res;
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::kTheta ? "theta" : "beta"; }

Variant parse_variant(const std::string& s) {
  if (s == "theta") return Variant::kTheta;
  if (s == "beta") return Variant::kBeta;
  throw InvalidInput("unknown variant '" + s + "'");
}

nlohmann::json ApproxResult::to_json() const {
  return {{"value", value},
          {"optimizer_gap", optimizer_gap},
          {"sampling_slack", sampling_slack},
          {"variant", to_string(variant)},
          {"best_member", lsa::to_json(best_member)},
          {"evaluations", evaluations}};
}

ApproxResult optimize_normalized(const PointCloud& u, const ModelClassId& c, Variant v,
                                 double member_h, const std::vector<ModelMember>& seeds,
                                 const ApproxOptions& opt) {
  if (!(member_h > 0.0)) throw InvalidInput("member resolution must be positive");
  const SearchSpace space = search_space(c);
  const auto& fams = space.families;
  const bool tagged = fams.size() > 1;
  Objective obj(u, v, member_h);

  const std::size_t keep = std::size_t(std::max(1, space.refine_top));
  std::vector<Candidate> top;
  bool done = false;
  auto bound = [&] { return top.size() < keep ? kInf : top.back().value; };
  auto consider = [&](int f, std::vector<double> p) {
    if (done) return;
    const double val = obj(fams[f], p.data(), bound());
    if (val >= bound()) return;
    top.push_back({val, f, std::move(p)});
    std::sort(top.begin(), top.end(),
              [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    if (top.size() > keep) top.pop_back();
    if (opt.accept_below >= 0.0 && top.front().value <= opt.accept_below) done = true;
  };

  for (const auto& m : seeds) {
    const int f = member_family(m);
    consider(f, std::vector<double>(m.params.begin() + (tagged ? 1 : 0), m.params.end()));
  }
  for (auto& [f, p] : pca_seeds(fams, obj.inner(), u.dim())) consider(f, p);
  for (std::size_t f = 0; f < fams.size() && !done; ++f) {
    const std::size_t budget = opt.budget > 0 ? opt.budget : fams[f].budget;
    for (auto& p : coarse_points(fams[f], budget)) consider(int(f), std::move(p));
  }
  if (top.empty()) throw NumericFailure("optimizer found no finite candidate");

  if (!done) {
    for (auto& cand : top) {
      refine(fams[cand.family], cand, obj, space.refine_passes, space.refine_factor);
    }
    std::sort(top.begin(), top.end(),
              [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  }
  const Candidate& best = top.front();

  ApproxResult res;
  res.variant = v;
  res.value = best.value;
  res.best_member = make_member(c, best.family, best.p);
  res.optimizer_gap =
      done ? best.value
           : std::min(best.value,
                      local_gap(fams[best.family], space.refine_passes, space.refine_factor));
  res.sampling_slack =
      v == Variant::kTheta ? 2.0 * std::max(u.h(), member_h) : 2.0 * u.h();
  res.evaluations = obj.calls();
  return res;
}

ApproxResult approximate(const ApproxQuery& q, ApproxOptions opt) {
  if (!q.set) throw InvalidInput("query has no set");
  if (!(q.tolerance > 0.0)) throw InvalidInput("tolerance must be positive");
  opt.tolerance = q.tolerance;
  return run(*q.set, q.cls, q.x, q.r, q.variant, opt);
}

ApproxResult theta(const SetSampler& set, const ModelClassId& c, const PointRef& x, double r,
                   const ApproxOptions& opt) {
  return run(set, c, x, r, Variant::kTheta, opt);
}

ApproxResult beta(const SetSampler& set, const ModelClassId& c, const PointRef& x, double r,
                  const ApproxOptions& opt) {
  return run(set, c, x, r, Variant::kBeta, opt);
}

ApproxResult theta(const PointCloud& set, const ModelClassId& c, const PointRef& x, double r,
                   const ApproxOptions& opt) {
  return run(*cloud_sampler(set), c, x, r, Variant::kTheta, opt);
}

ApproxResult beta(const PointCloud& set, const ModelClassId& c, const PointRef& x, double r,
                  const ApproxOptions& opt) {
  return run(*cloud_sampler(set), c, x, r, Variant::kBeta, opt);
}

std::vector<double> Ladder::radii() const {
  if (!(r0 > 0.0) || !(lambda > 0.0 && lambda < 1.0) || depth < 0) {
    throw InvalidInput("ladder needs r0 > 0, 0 < lambda < 1, depth >= 0");
  }
  std::vector<double> out;
  for (int k = 0; k <= depth; ++k) out.push_back(r0 * std::pow(lambda, k));
  return out;
}

Ladder Ladder::between(double r_max, double r_min, double lambda) {
  if (!(r_min > 0.0) || !(r_max >= r_min)) throw InvalidInput("bad scale range");
  Ladder l;
  l.r0 = r_max;
  l.lambda = lambda;
  l.depth = int(std::floor(std::log(r_min / r_max) / std::log(lambda) + 1e-9));
  return l;
}

std::vector<double> Profile::sup_per_scale() const {
  std::vector<double> out(radii.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < radii.size(); ++k) out[k] = std::max(out[k], at(i, k).value);
  }
  return out;
}

double Profile::max_upper() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, v.value + v.optimizer_gap + v.sampling_slack);
  return m;
}

bool Profile::decaying() const {
  const auto sup = sup_per_scale();
  for (std::size_t k = 1; k < sup.size(); ++k) {
    double tol = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      tol = std::max(tol, at(i, k).optimizer_gap + at(i, k).sampling_slack +
                              at(i, k - 1).optimizer_gap + at(i, k - 1).sampling_slack);
    }
    if (sup[k] > sup[k - 1] + tol) return false;
  }
  return true;
}

std::string Profile::to_csv() const {
  std::ostringstream os;
  const int n = points.empty() ? 0 : int(points.front().size());
  os << "point";
  for (int k = 0; k < n; ++k) os << ",x" << k + 1;
  os << ",scale,value,gap,slack\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < radii.size(); ++k) {
      os << i;
      for (int j = 0; j < n; ++j) os << ',' << fmt::format("{}", points[i][j]);
      const auto& v = at(i, k);
      os << ',' << fmt::format("{}", radii[k]) << ',' << fmt::format("{}", v.value) << ','
         << fmt::format("{}", v.optimizer_gap) << ',' << fmt::format("{}", v.sampling_slack)
         << '\n';
    }
  }
  return os.str();
}

nlohmann::json Profile::summary() const {
  const auto sup = sup_per_scale();
  double gap = 0.0, slack = 0.0;
  for (const auto& v : values) {
    gap = std::max(gap, v.optimizer_gap);
    slack = std::max(slack, v.sampling_slack);
  }
  return {{"class", cls.to_string()},
          {"variant", to_string(variant)},
          {"radii", radii},
          {"sup_per_scale", sup},
          {"max_gap", gap},
          {"max_slack", slack},
          {"decaying", decaying()}};
}

Profile profile(const SetSampler& set, const ModelClassId& c, const std::vector<Point>& points,
                const Ladder& ladder, Variant v, const ApproxOptions& opt) {
  if (points.empty()) throw InvalidInput("profile needs at least one base point");
  Profile p;
  p.cls = c;
  p.variant = v;
  p.points = points;
  p.radii = ladder.radii();
  p.values.resize(points.size() * p.radii.size());
  const std::size_t ns = p.radii.size();
  parallel_for(p.values.size(), [&](std::size_t idx) {
    p.values[idx] = run(set, c, points[idx / ns], p.radii[idx % ns], v, opt);
  });
  return p;
}

EnlargementResult enlargement_membership(const SetSampler& set, const ModelClassId& c,
                                         double eps, Variant v, double r_min, double r_max,
                                         double lambda, const ApproxOptions& opt) {
  if (!(eps >= 0.0)) throw InvalidInput("eps must be nonnegative");
  const Point o = Point::Zero(set.dim());
  if (set.distance(o) > opt.tolerance * r_min) {
    throw InvalidInput("enlargement membership needs 0 in the set");
  }
  EnlargementResult out;
  out.witness = profile(set, c, {o}, Ladder::between(r_max, r_min, lambda), v, opt);
  out.member = true;
  out.worst_margin = -kInf;
  for (std::size_t k = 0; k < out.witness.radii.size(); ++k) {
    const auto& val = out.witness.at(0, k);
    const double m = val.value - (eps + val.optimizer_gap + val.sampling_slack);
    if (m > out.worst_margin) {
      out.worst_margin = m;
      out.worst_scale = out.witness.radii[k];
    }
    if (m > 0.0) out.member = false;
  }
  return out;
}

}  // namespace lsa
