#include "lsa/generators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace lsa {

namespace {

constexpr double kPi = 3.14159265358979323846;

void push_if_inside(std::vector<double>& out, const Point& p, const Ball& ball) {
  if ((p - ball.center).norm() <= ball.radius) out.insert(out.end(), p.data(), p.data() + p.size());
}

class ShapeSampler : public SetSampler {
 public:
  ShapeSampler(std::string name, ShapePtr shape, double floor)
      : name_(std::move(name)), shape_(std::move(shape)), floor_(floor) {}
  int dim() const override { return shape_->dim(); }
  std::string name() const override { return name_; }
  double distance(const PointRef& q) const override { return shape_->distance(q); }
  double resolution_floor() const override { return floor_; }

 protected:
  PointCloud sample_window(const Ball& ball, double h) const override {
    return shape_->sample_cloud(ball, h);
  }

  std::string name_;
  ShapePtr shape_;
  double floor_;
};

class CloudSampler final : public SetSampler {
 public:
  CloudSampler(PointCloud cloud, std::string name)
      : cloud_(std::move(cloud)), index_(cloud_), name_(std::move(name)) {}
  int dim() const override { return cloud_.dim(); }
  std::string name() const override { return name_; }
  double distance(const PointRef& q) const override { return index_.nearest_distance(q); }
  bool fixed_resolution() const override { return true; }

 protected:
  PointCloud sample_window(const Ball& ball, double) const override {
    return restrict(cloud_, ball);
  }

 private:
  PointCloud cloud_;
  NeighborIndex index_;
  std::string name_;
};

class LightConeSampler final : public ShapeSampler {
 public:
  LightConeSampler() : ShapeSampler("light_cone", make_light_cone(Point::Zero(4), Point(Eigen::Vector4d::UnitW())), 0.0) {}

  std::vector<ModelMember> witnesses(const ModelClassId& c, const PointRef& x,
                                     double) const override {
    const double zero[3] = {0.0, 0.0, 0.0};
    if (c.kind == ClassKind::kLightCone && x.norm() == 0.0) {
      return {ModelMember{c, {zero[0], zero[1], zero[2]}}};
    }
    if (c.kind != ClassKind::kUniformSupport) return {};
    if (x.norm() == 0.0) return {make_member(c, 1, {0.0, 0.0, 0.0})};
    // Nearest cone point, then C - p written in the translated-cone chart.
    const Eigen::Vector3d y = x.head<3>();
    const double t = x[3];
    const double rho = y.norm();
    if (rho == 0.0) return {};
    const double m = 0.5 * (rho + std::abs(t));
    const double sign = t >= 0.0 ? 1.0 : -1.0;
    const Eigen::Vector3d w = sign * y / rho;
    return {make_member(c, 2,
                        {0.0, 0.0, 0.0, std::acos(std::clamp(w[2], -1.0, 1.0)),
                         std::atan2(w[1], w[0]), sign > 0 ? 0.0 : 1.0,
                         std::log2(m * std::sqrt(2.0))})};
  }
};

// x-axis together with the y-axis pieces 2^-k-1 <= |y| <= 2^-k, k odd.
class AnnulusMixerShape final : public Shape {
 public:
  int dim() const override { return 2; }

  double distance(const double* q) const override {
    const double ax = std::abs(q[0]), ay = std::abs(q[1]);
    double best = ay;
    if (ay > 0.0) {
      const int k0 = int(std::floor(-std::log2(ay)));
      for (int k = k0 - 2; k <= k0 + 2; ++k) {
        if (!is_odd(k)) continue;
        const double lo = std::exp2(-k - 1), hi = std::exp2(-k);
        const double dy = ay < lo ? lo - ay : (ay > hi ? ay - hi : 0.0);
        best = std::min(best, std::hypot(ax, dy));
      }
    }
    return best;
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    make_flat(Point::Zero(2), Eigen::MatrixXd(Point(Eigen::Vector2d::UnitX())))
        ->sample(ball, h, out);
    const double far = ball.center.norm() + ball.radius;
    const int kmin = int(std::floor(-std::log2(far))) - 1;
    const int kmax = int(std::ceil(-std::log2(0.25 * h)));
    for (int k = kmin; k <= kmax; ++k) {
      if (!is_odd(k)) continue;
      const double lo = std::exp2(-k - 1), hi = std::exp2(-k);
      for (double s : {1.0, -1.0}) {
        make_segment(Point(Eigen::Vector2d(0.0, s * lo)), Point(Eigen::Vector2d(0.0, s * hi)))
            ->sample(ball, h, out);
      }
    }
  }

 private:
  static bool is_odd(int k) { return (k % 2 + 2) % 2 == 1; }
};

// Points r_i e for i >= 1 (accumulating at the origin).
class ExtraPointsShape final : public Shape {
 public:
  explicit ExtraPointsShape(Point e) : e_(e.normalized()) {}
  int dim() const override { return int(e_.size()); }

  double distance(const double* q) const override {
    const ConstPointMap p(q, dim());
    double best = p.norm();  // closure point 0
    for (int i = 1; i <= 60; ++i) {
      best = std::min(best, (p - sphere_stack_extra_radius(i) * e_).norm());
    }
    return best;
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    for (int i = 1; i <= 60; ++i) {
      const double ri = sphere_stack_extra_radius(i);
      push_if_inside(out, Point(ri * e_), ball);
      if (ri < 0.25 * h) break;
    }
  }

 private:
  Point e_;
};

// [0,1]^m inside R^n.
class BoxShape final : public Shape {
 public:
  BoxShape(int n, int m) : n_(n), m_(m) {}
  int dim() const override { return n_; }

  double distance(const double* q) const override {
    double d2 = 0.0;
    for (int k = 0; k < n_; ++k) {
      const double c = k < m_ ? std::clamp(q[k], 0.0, 1.0) : 0.0;
      d2 += (q[k] - c) * (q[k] - c);
    }
    return std::sqrt(d2);
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const int k = std::max(1, int(std::ceil(1.0 / h)));
    std::vector<int> lo(m_), hi(m_), idx(m_);
    for (int j = 0; j < m_; ++j) {
      lo[j] = std::max(0, int(std::floor((ball.center[j] - ball.radius) * k)));
      hi[j] = std::min(k, int(std::ceil((ball.center[j] + ball.radius) * k)));
      if (lo[j] > hi[j]) return;
    }
    idx = lo;
    Point p = Point::Zero(n_);
    for (;;) {
      for (int j = 0; j < m_; ++j) p[j] = double(idx[j]) / k;
      push_if_inside(out, p, ball);
      int j = 0;
      while (j < m_ && ++idx[j] > hi[j]) idx[j] = lo[j], ++j;
      if (j == m_) break;
    }
  }

 private:
  int n_, m_;
};

std::vector<double> vec_param(const nlohmann::json& p, const char* key, std::vector<double> def) {
  return p.contains(key) ? p.at(key).get<std::vector<double>>() : def;
}

Point to_point(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

SamplerPtr build(const std::string& spec, const nlohmann::json& p, std::uint64_t seed) {
  auto num = [&](const char* key, double def) { return p.value(key, def); };
  auto integer = [&](const char* key, int def) { return p.value(key, def); };

  if (spec == "flat" || spec == "line" || spec == "plane") {
    const int n = integer("n", spec == "plane" ? 3 : 2);
    const int m = integer("m", spec == "plane" ? 2 : (spec == "line" ? 1 : n - 1));
    if (m < 0 || m > n) throw InvalidInput("flat needs 0 <= m <= n");
    const Point o = p.contains("origin") ? to_point(vec_param(p, "origin", {})) : Point::Zero(n);
    check_dim(n, int(o.size()), "flat origin");
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n).leftCols(m);
    if (p.contains("basis")) {
      const auto rows = p.at("basis").get<std::vector<std::vector<double>>>();
      if (int(rows.size()) != m) throw InvalidInput("flat basis must have m vectors");
      for (int j = 0; j < m; ++j) basis.col(j) = to_point(rows[j]);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
      basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    }
    return shape_sampler(spec, make_flat(o, basis));
  }
  if (spec == "segment") {
    const Point a = to_point(vec_param(p, "a", {0.0, 0.0}));
    const Point b = to_point(vec_param(p, "b", {1.0, 0.0}));
    check_dim(int(a.size()), int(b.size()), "segment");
    return shape_sampler(spec, make_segment(a, b));
  }
  if (spec == "box") {
    const int m = integer("m", 2);
    const int n = integer("n", m);
    if (m < 1 || m > n) throw InvalidInput("box needs 1 <= m <= n");
    return shape_sampler(spec, std::make_shared<BoxShape>(n, m));
  }
  if (spec == "cross_2d" || spec == "axes_union_2d") {
    return shape_sampler(spec, harmonic_shape(2, 0.0, 1.0));
  }
  if (spec == "graph") {
    const std::string fn = p.value("function", std::string("parabola"));
    const double a = num("amplitude", 1.0);
    CurveFunction f;
    if (fn == "parabola") {
      f = {[a](double t) { return a * t * t; }, [a](double t) { return 2 * a * t; },
           [a](double) { return 2 * a; }};
    } else if (fn == "sine") {
      f = {[a](double t) { return a * std::sin(t); }, [a](double t) { return a * std::cos(t); },
           [a](double t) { return -a * std::sin(t); }};
    } else if (fn == "cubic") {
      f = {[a](double t) { return a * t * t * t; }, [a](double t) { return 3 * a * t * t; },
           [a](double t) { return 6 * a * t; }};
    } else {
      throw InvalidInput("unknown graph function '" + fn + "'");
    }
    return shape_sampler(spec, make_graph_curve(std::move(f)));
  }
  if (spec == "koch") {
    const double theta = num("angle_deg", 60.0) * kPi / 180.0;
    const int level = integer("level", 7);
    if (!(theta > 0.0 && theta < kPi / 2)) throw InvalidInput("koch angle must be in (0, 90) degrees");
    if (level < 0 || level > 9) throw InvalidInput("koch level must be in 0..9");
    const double seg = std::pow(1.0 / (2.0 * (1.0 + std::cos(theta))), level);
    return shape_sampler(spec, make_polyline(2, koch_vertices(theta, level)), seg);
  }
  if (spec == "circle" || spec == "sphere") {
    const double R = num("radius", 1.0);
    if (!(R > 0.0)) throw InvalidInput("radius must be positive");
    const int n = integer("n", spec == "circle" ? 2 : 3);
    const Point c = p.contains("center") ? to_point(vec_param(p, "center", {})) : Point::Zero(n);
    check_dim(n, int(c.size()), "circle center");
    const int k = spec == "circle" ? 2 : 3;
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n).leftCols(k);
    if (p.contains("basis")) {
      const auto rows = p.at("basis").get<std::vector<std::vector<double>>>();
      if (int(rows.size()) != k) throw InvalidInput("sphere basis has the wrong size");
      for (int j = 0; j < k; ++j) basis.col(j) = to_point(rows[j]);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
      basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    }
    return shape_sampler(spec, make_sphere(c, R, basis));
  }
  if (spec == "light_cone") return std::make_shared<LightConeSampler>();
  if (spec == "y_cone") return shape_sampler(spec, y_cone_shape(Eigen::Matrix3d::Identity(), Point::Zero(3)));
  if (spec == "t_cone") return shape_sampler(spec, t_cone_shape(Eigen::Matrix3d::Identity(), Point::Zero(3)));
  if (spec == "y_spine") {
    return shape_sampler(spec, make_flat(Point::Zero(3), Eigen::MatrixXd(Point(Eigen::Vector3d::UnitZ()))));
  }
  if (spec == "t_spine") return shape_sampler(spec, t_spine_shape(Eigen::Matrix3d::Identity(), Point::Zero(3)));
  if (spec == "harmonic_zero") {
    const int type = integer("type", 2);
    return shape_sampler(spec, harmonic_shape(type, num("angle", 0.0), num("scale", 1.0)));
  }
  if (spec == "sphere_stack") {
    return shape_sampler(spec, make_sphere_stack(Point::Zero(integer("n", 2)), 1.0));
  }
  if (spec == "sphere_stack_plus") {
    const int n = integer("n", 2);
    Point e = Point::Zero(n);
    e[0] = 1.0;
    if (p.contains("e")) e = to_point(vec_param(p, "e", {}));
    check_dim(n, int(e.size()), "sphere_stack_plus direction");
    return shape_sampler(spec, make_union({make_sphere_stack(Point::Zero(n), 1.0),
                                           std::make_shared<ExtraPointsShape>(e)}));
  }
  if (spec == "annulus_mixer") return shape_sampler(spec, std::make_shared<AnnulusMixerShape>());
  if (spec == "reifenberg_graph") {
    const double eps = num("eps", 0.005);
    const int levels = integer("levels", 8);
    if (!(eps > 0.0) || levels < 1 || levels > 16) throw InvalidInput("bad reifenberg_graph params");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
    std::vector<double> cs, sn, ph, fr;
    for (int j = 0; j < levels; ++j) {
      const double w = ang(rng);
      cs.push_back(std::cos(w));
      sn.push_back(std::sin(w));
      ph.push_back(ang(rng));
      fr.push_back(std::exp2(j));
    }
    SurfaceFunction f;
    f.lipschitz = eps * levels;
    f.eval = [=](double u, double v, double* g, double* H) {
      double val = 0.0;
      g[0] = g[1] = H[0] = H[1] = H[2] = 0.0;
      for (int j = 0; j < levels; ++j) {
        const double arg = fr[j] * (cs[j] * u + sn[j] * v) + ph[j];
        const double s = std::sin(arg), c = std::cos(arg);
        val += eps / fr[j] * s;
        g[0] += eps * c * cs[j];
        g[1] += eps * c * sn[j];
        H[0] -= eps * fr[j] * s * cs[j] * cs[j];
        H[1] -= eps * fr[j] * s * cs[j] * sn[j];
        H[2] -= eps * fr[j] * s * sn[j] * sn[j];
      }
      return val;
    };
    return shape_sampler(spec, make_graph_surface(std::move(f)));
  }
  throw InvalidInput("unknown set spec '" + spec + "'");
}

}  // namespace

PointCloud SetSampler::window(const Ball& ball, double h) const {
  check_dim(dim(), ball.dim(), "sampler window");
  if (!fixed_resolution()) {
    if (!(h > 0.0)) throw InvalidInput("sampling resolution must be positive");
    if (h < resolution_floor()) {
      throw NumericFailure(fmt::format("{}: resolution {} is below the floor {}", name(), h,
                                       resolution_floor()));
    }
  }
  return sample_window(ball, h);
}

std::vector<ModelMember> SetSampler::witnesses(const ModelClassId&, const PointRef&,
                                               double) const {
  return {};
}

SamplerPtr shape_sampler(std::string name, ShapePtr shape, double floor) {
  auto s = std::make_shared<ShapeSampler>(name, std::move(shape), floor);
  s->set_spec({{"spec", name}, {"params", nlohmann::json::object()}, {"seed", 0}});
  return s;
}

SamplerPtr cloud_sampler(PointCloud cloud, std::string name) {
  if (cloud.is_empty()) throw InvalidInput("cloud sampler needs a nonempty cloud");
  auto s = std::make_shared<CloudSampler>(std::move(cloud), name);
  s->set_spec({{"spec", "cloud"}, {"params", {{"name", name}}}, {"seed", 0}});
  return s;
}

SamplerPtr make_sampler(const nlohmann::json& spec) {
  try {
    const std::string name = spec.at("spec").get<std::string>();
    const nlohmann::json params = spec.value("params", nlohmann::json::object());
    const auto seed = spec.value("seed", std::uint64_t{0});
    auto sampler = build(name, params, seed);
    std::const_pointer_cast<SetSampler>(sampler)->set_spec(
        {{"spec", name}, {"params", params}, {"seed", seed}});
    return sampler;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad set spec: ") + e.what());
  }
}

std::vector<double> koch_vertices(double theta, int level) {
  std::vector<Eigen::Vector2d> pts = {{0.0, 0.0}, {1.0, 0.0}};
  const double L = 1.0 / (2.0 * (1.0 + std::cos(theta)));
  const Eigen::Rotation2Dd up(theta), down(-theta);
  for (int l = 0; l < level; ++l) {
    std::vector<Eigen::Vector2d> next;
    next.reserve(4 * pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Eigen::Vector2d a = pts[i], d = (pts[i + 1] - a) * L;
      const Eigen::Vector2d p1 = a + d;
      const Eigen::Vector2d p2 = p1 + up * d;
      const Eigen::Vector2d p3 = p2 + down * d;
      next.insert(next.end(), {a, p1, p2, p3});
    }
    next.push_back(pts.back());
    pts.swap(next);
  }
  std::vector<double> out;
  out.reserve(2 * pts.size());
  for (const auto& v : pts) out.insert(out.end(), {v[0], v[1]});
  return out;
}

double koch_dimension(double theta) {
  return std::log(4.0) / std::log(2.0 * (1.0 + std::cos(theta)));
}

double sphere_stack_extra_radius(int i) { return std::exp2(-i) - std::pow(3.0, -i); }

}  // namespace lsa
