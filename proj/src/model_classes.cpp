#include "lsa/model_classes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "lsa/dimension.hpp"

namespace lsa {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Scaling about the origin moves points of B(0,1) by at most ln 2 per unit
// of log2-scale (first order); 0.7 rounds it up.
constexpr double kLogScaleLip = 0.7;

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Splits "a,b(c,d)" at top-level commas.
std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

int parse_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw InvalidInput("");
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("bad integer '" + s + "' in class id");
  }
}

ParamAxis angle_axis(std::string name, double lo, double hi, double step, bool periodic,
                     double lip = 1.0) {
  return {std::move(name), lo, hi, step, periodic, false, lip};
}

// Hemisphere coordinates of a direction up to sign (see unit_vector).
std::vector<ParamAxis> direction_axes(int n) {
  switch (n) {
    case 1: return {};
    case 2: return {angle_axis("theta", 0.0, kPi, kPi / 64, true)};
    case 3:
      return {angle_axis("theta", 0.0, kPi / 2, kPi / 16, false),
              angle_axis("phi", 0.0, 2 * kPi, kPi / 16, true)};
    case 4:
      return {angle_axis("psi", 0.0, kPi / 2, kPi / 8, false),
              angle_axis("theta", 0.0, kPi, kPi / 8, false),
              angle_axis("phi", 0.0, 2 * kPi, kPi / 8, true)};
    default:
      throw InvalidInput("directions supported for n <= 4 only");
  }
}

std::vector<ParamAxis> euler_axes() {
  return {angle_axis("euler_a", 0.0, 2 * kPi, kPi / 4, true),
          angle_axis("euler_b", 0.0, kPi, kPi / 4, false),
          angle_axis("euler_c", 0.0, 2 * kPi, kPi / 4, true)};
}

ParamAxis offset_axis(std::string name, double lo, double hi, double step, double r) {
  return {std::move(name), lo * r, hi * r, step * r, false, false, 1.0};
}

void no_dilate(double*, double) {}

Point origin(int n) { return Point::Zero(n); }

FamilySearch point_family(int n) {
  FamilySearch f;
  f.name = "point";
  f.build = [n](const double*) { return make_point(origin(n)); };
  f.dilate = no_dilate;
  return f;
}

FamilySearch flat_family(int n, int m) {
  FamilySearch f;
  if (m == 0) return point_family(n);
  f.name = m == 1 ? "line" : (m == n - 1 ? "hyperplane" : "flat");
  f.dilate = no_dilate;
  if (m == n) {
    f.build = [n](const double*) {
      return make_flat(origin(n), Eigen::MatrixXd::Identity(n, n));
    };
    return f;
  }
  f.axes = direction_axes(n);
  if (m == 1) {
    f.build = [n](const double* p) {
      const Point u = unit_vector(n, p);
      return make_flat(origin(n), Eigen::MatrixXd(u));
    };
  } else if (m == n - 1) {
    f.build = [n](const double* p) {
      return make_flat(origin(n), complement_basis(unit_vector(n, p)));
    };
  } else {
    throw InvalidInput(fmt::format("grassmannian({},{}) is not supported", n, m));
  }
  return f;
}

FamilySearch y_family(double r) {
  FamilySearch f;
  f.name = "y_translate";
  f.axes = euler_axes();
  f.axes.push_back(offset_axis("s", 0.0, 2.0, 0.5, r));
  f.axes.push_back(offset_axis("t", 0.0, 2.0, 0.5, r));
  f.budget = 2048;
  f.build = [](const double* p) {
    const Eigen::Matrix3d R = euler_zyz(p[0], p[1], p[2]);
    const Point c = p[3] * y_direction(0) + p[4] * Point(Eigen::Vector3d::UnitZ());
    return y_cone_shape(R, Point(-(R * c)));
  };
  f.dilate = [](double* p, double s) {
    p[3] *= s;
    p[4] *= s;
  };
  return f;
}

FamilySearch t_family(double r) {
  FamilySearch f;
  f.name = "t_translate";
  f.axes = euler_axes();
  f.axes.push_back(offset_axis("a", 0.0, 2.0, 0.5, r));
  f.axes.push_back(offset_axis("b", 0.0, 2.0, 0.5, r));
  f.budget = 2048;
  f.build = [](const double* p) {
    const Eigen::Matrix3d R = euler_zyz(p[0], p[1], p[2]);
    const Point c = p[3] * tetra_vertex(0) + p[4] * tetra_vertex(1);
    return t_cone_shape(R, Point(-(R * c)));
  };
  f.dilate = [](double* p, double s) {
    p[3] *= s;
    p[4] *= s;
  };
  return f;
}

FamilySearch t_spine_family(double r) {
  FamilySearch f;
  f.name = "t_spine";
  f.axes = euler_axes();
  f.axes.push_back(offset_axis("s", 0.0, 2.0, 0.25, r));
  f.budget = 2048;
  f.build = [](const double* p) {
    const Eigen::Matrix3d R = euler_zyz(p[0], p[1], p[2]);
    return t_spine_shape(R, Point(-(R * (p[3] * tetra_vertex(0)))));
  };
  f.dilate = [](double* p, double s) { p[3] *= s; };
  return f;
}

ParamAxis log_scale_axis(double r) {
  return {"log2_lambda", -6.0 + std::log2(r), 6.0 + std::log2(r), 0.5, false, false,
          kLogScaleLip};
}

FamilySearch harmonic_family(int type, double r) {
  FamilySearch f;
  f.name = fmt::format("sigma{}", type);
  switch (type) {
    case 1: f.axes = {angle_axis("theta", 0.0, kPi, kPi / 64, true)}; break;
    case 2: f.axes = {angle_axis("theta", 0.0, kPi / 2, kPi / 64, true)}; break;
    default:
      f.axes = {angle_axis("theta", 0.0, 2 * kPi, kPi / 32, true), log_scale_axis(r)};
  }
  f.build = [type](const double* p) {
    return harmonic_shape(type, p[0], type >= 3 ? std::exp2(p[1]) : 1.0);
  };
  if (type >= 3) {
    f.dilate = [](double* p, double s) { p[1] += std::log2(s); };
  } else {
    f.dilate = no_dilate;
  }
  return f;
}

FamilySearch light_cone_family() {
  FamilySearch f;
  f.name = "light_cone";
  f.axes = direction_axes(4);
  f.build = [](const double* p) { return make_light_cone(origin(4), unit_vector(4, p)); };
  f.dilate = no_dilate;
  return f;
}

// Light cone with unit axis a, translated so that it passes through 0:
// C - c with c = sign * 2^l (B w + a) / sqrt(2), B a basis of a-perp.
Point translated_cone_apex(const double* p) {
  const Point a = unit_vector(4, p);
  const double wang[2] = {p[3], p[4]};
  const Point w = unit_vector(3, wang);
  const Eigen::MatrixXd B = complement_basis(a);
  const double sign = p[5] >= 0.5 ? -1.0 : 1.0;
  const Point c = sign * std::exp2(p[6]) * (B * w + a) / std::sqrt(2.0);
  return -c;
}

FamilySearch translated_cone_family(double r) {
  FamilySearch f;
  f.name = "translated_light_cone";
  f.axes = direction_axes(4);
  f.axes.push_back(angle_axis("omega_theta", 0.0, kPi, kPi / 4, false));
  f.axes.push_back(angle_axis("omega_phi", 0.0, 2 * kPi, kPi / 4, true));
  f.axes.push_back({"nappe", 0.0, 1.0, 1.0, false, true, 0.0});
  f.axes.push_back({"log2_offset", -5.0 + std::log2(r), 6.0 + std::log2(r), 0.5, false, false,
                    kLogScaleLip});
  f.budget = 4096;
  f.build = [](const double* p) {
    return make_light_cone(translated_cone_apex(p), unit_vector(4, p));
  };
  f.dilate = [](double* p, double s) { p[6] += std::log2(s); };
  return f;
}

FamilySearch sphere_stack_family(int n) {
  FamilySearch f;
  f.name = "sphere_stack";
  f.axes = {{"log2_lambda", 0.0, 1.0, 1.0 / 64, true, false, kLogScaleLip}};
  f.build = [n](const double* p) { return make_sphere_stack(origin(n), std::exp2(p[0])); };
  f.dilate = [](double* p, double s) {
    const double v = p[0] + std::log2(s);
    p[0] = v - std::floor(v);
  };
  return f;
}

std::vector<FamilySearch> families_of(const ModelClassId& c, double r) {
  switch (c.kind) {
    case ClassKind::kGrassmannian: return {flat_family(c.n, c.m)};
    case ClassKind::kMinimalCones: return {flat_family(3, 2), y_family(r), t_family(r)};
    case ClassKind::kYCones: return {y_family(r)};
    case ClassKind::kHarmonic:
      return {harmonic_family(1, r), harmonic_family(2, r), harmonic_family(3, r),
              harmonic_family(4, r)};
    case ClassKind::kHarmonicPrime:
      return {harmonic_family(1, r), harmonic_family(2, r), harmonic_family(3, r)};
    case ClassKind::kLightCone: return {light_cone_family()};
    case ClassKind::kUniformSupport:
      return {flat_family(4, 3), light_cone_family(), translated_cone_family(r)};
    case ClassKind::kSphereStack: return {sphere_stack_family(c.n)};
    case ClassKind::kAxesUnion: return {harmonic_family(2, r)};
    case ClassKind::kSingularParts: {
      const ClassKind base = c.args.at(0).kind;
      const ModelClassId& det = c.args.at(1);
      if (base == ClassKind::kMinimalCones && det == ModelClassId::grassmannian(3, 2)) {
        return {flat_family(3, 1), t_spine_family(r)};
      }
      if (base == ClassKind::kYCones && det == ModelClassId::grassmannian(3, 2)) {
        return {flat_family(3, 1)};
      }
      if ((base == ClassKind::kHarmonic || base == ClassKind::kHarmonicPrime ||
           base == ClassKind::kAxesUnion) &&
          det == ModelClassId::grassmannian(2, 1)) {
        return {point_family(2)};
      }
      if ((base == ClassKind::kLightCone || base == ClassKind::kUniformSupport) &&
          det == ModelClassId::grassmannian(4, 3)) {
        return {point_family(4)};
      }
      throw InvalidInput("singular parts not available for " + c.to_string());
    }
  }
  throw InvalidInput("unknown class");
}

}  // namespace

ModelClassId ModelClassId::grassmannian(int n, int m) {
  if (n < 1 || m < 0 || m > n) throw InvalidInput(fmt::format("bad grassmannian({},{})", n, m));
  ModelClassId c;
  c.kind = ClassKind::kGrassmannian;
  c.n = n;
  c.m = m;
  return c;
}

ModelClassId ModelClassId::parse(const std::string& raw) {
  const std::string text = trim(raw);
  const auto open = text.find('(');
  std::string name = text, inner;
  bool has_args = false;
  if (open != std::string::npos) {
    if (text.back() != ')') throw InvalidInput("bad class id '" + raw + "'");
    name = trim(text.substr(0, open));
    inner = text.substr(open + 1, text.size() - open - 2);
    has_args = true;
  }
  const auto args = has_args ? split_args(inner) : std::vector<std::string>{};
  auto need = [&](std::size_t k) {
    if (args.size() != k) throw InvalidInput("wrong argument count in class id '" + raw + "'");
  };
  ModelClassId c;
  if (name == "grassmannian" || name == "G") {
    need(2);
    return grassmannian(parse_int(args[0]), parse_int(args[1]));
  }
  if (name == "singleton") {
    need(1);
    return grassmannian(parse_int(args[0]), 0);
  }
  auto fixed = [&](ClassKind k, int n, int m = 0) {
    if (has_args) throw InvalidInput("class '" + name + "' takes no arguments");
    c.kind = k;
    c.n = n;
    c.m = m;
    return c;
  };
  if (name == "minimal_cones_3_2") return fixed(ClassKind::kMinimalCones, 3, 2);
  if (name == "y_cones_3_2") return fixed(ClassKind::kYCones, 3, 2);
  if (name == "harmonic_2_2") return fixed(ClassKind::kHarmonic, 2, 1);
  if (name == "harmonic_prime_2_2") return fixed(ClassKind::kHarmonicPrime, 2, 1);
  if (name == "axes_union_2d") return fixed(ClassKind::kAxesUnion, 2, 1);
  if (name == "light_cone" || name == "uniform_support") {
    int n = 4;
    if (has_args) {
      need(1);
      n = parse_int(args[0]);
    }
    if (n != 4) throw InvalidInput(name + " is implemented for n = 4 only");
    c.kind = name == "light_cone" ? ClassKind::kLightCone : ClassKind::kUniformSupport;
    c.n = 4;
    c.m = 3;
    return c;
  }
  if (name == "sphere_stack") {
    int n = 2;
    if (has_args) {
      need(1);
      n = parse_int(args[0]);
    }
    if (n != 2 && n != 3) throw InvalidInput("sphere_stack supports n = 2, 3");
    c.kind = ClassKind::kSphereStack;
    c.n = n;
    c.m = n - 1;
    return c;
  }
  if (name == "singular_parts") {
    need(2);
    c.kind = ClassKind::kSingularParts;
    c.args = {parse(args[0]), parse(args[1])};
    c.n = c.args[0].n;
    if (c.args[1].n != c.n) throw InvalidInput("singular_parts classes differ in dimension");
    c.m = analytic_alpha(c);
    families_of(c, 1.0);  // validates the pair
    return c;
  }
  throw InvalidInput("unknown class '" + raw + "'");
}

std::string ModelClassId::to_string() const {
  switch (kind) {
    case ClassKind::kGrassmannian: return fmt::format("grassmannian({},{})", n, m);
    case ClassKind::kMinimalCones: return "minimal_cones_3_2";
    case ClassKind::kYCones: return "y_cones_3_2";
    case ClassKind::kHarmonic: return "harmonic_2_2";
    case ClassKind::kHarmonicPrime: return "harmonic_prime_2_2";
    case ClassKind::kLightCone: return "light_cone(4)";
    case ClassKind::kUniformSupport: return "uniform_support(4)";
    case ClassKind::kSphereStack: return fmt::format("sphere_stack({})", n);
    case ClassKind::kAxesUnion: return "axes_union_2d";
    case ClassKind::kSingularParts:
      return "singular_parts(" + args.at(0).to_string() + "," + args.at(1).to_string() + ")";
  }
  return "?";
}

nlohmann::json to_json(const ModelMember& m) {
  return {{"class", m.cls.to_string()}, {"params", m.params}};
}

ModelMember member_from_json(const nlohmann::json& j) {
  try {
    ModelMember m{ModelClassId::parse(j.at("class").get<std::string>()),
                  j.at("params").get<std::vector<double>>()};
    member_shape(m);  // validates the parameter count
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad member JSON: ") + e.what());
  }
}

std::size_t FamilySearch::product_size() const {
  std::size_t total = 1;
  for (const auto& a : axes) {
    const double span = a.hi - a.lo;
    std::size_t k = std::size_t(std::floor(span / a.step + 1e-9)) + (a.periodic ? 0 : 1);
    total *= std::max<std::size_t>(k, 1);
  }
  return total;
}

SearchSpace search_space(const ModelClassId& c, double r) {
  if (!(r > 0.0)) throw InvalidInput("search radius must be positive");
  SearchSpace s;
  s.cls = c;
  s.families = families_of(c, r);
  return s;
}

ModelMember make_member(const ModelClassId& c, int family, const std::vector<double>& params) {
  const auto fams = families_of(c, 1.0);
  if (family < 0 || family >= int(fams.size())) throw InvalidInput("family index out of range");
  ModelMember m{c, {}};
  if (fams.size() > 1) m.params.push_back(family);
  m.params.insert(m.params.end(), params.begin(), params.end());
  return m;
}

int member_family(const ModelMember& m) {
  const auto fams = families_of(m.cls, 1.0);
  if (fams.size() == 1) return 0;
  if (m.params.empty()) throw InvalidInput("member is missing its family tag");
  const int f = int(std::lround(m.params[0]));
  if (f < 0 || f >= int(fams.size())) throw InvalidInput("family index out of range");
  return f;
}

ShapePtr member_shape(const ModelMember& m) {
  const auto fams = families_of(m.cls, 1.0);
  const int f = member_family(m);
  const std::size_t off = fams.size() > 1 ? 1 : 0;
  if (m.params.size() != off + fams[f].axes.size()) {
    throw InvalidInput(fmt::format("{} family '{}' expects {} parameters", m.cls.to_string(),
                                   fams[f].name, fams[f].axes.size()));
  }
  return fams[f].build(m.params.data() + off);
}

double member_distance(const ModelMember& m, const PointRef& q) {
  check_dim(m.cls.dim(), int(q.size()), "member_distance");
  return member_shape(m)->distance(q);
}

PointCloud sample_member(const ModelMember& m, const Ball& ball, double h) {
  return member_shape(m)->sample_cloud(ball, h);
}

ModelMember dilate_member(const ModelMember& m, double s) {
  if (!(s > 0.0)) throw InvalidInput("dilation factor must be positive");
  const auto fams = families_of(m.cls, 1.0);
  const int f = member_family(m);
  ModelMember out = m;
  fams[f].dilate(out.params.data() + (fams.size() > 1 ? 1 : 0), s);
  return out;
}

std::vector<ModelMember> random_members(const ModelClassId& c, int count, std::uint64_t seed) {
  const auto fams = families_of(c, 1.0);
  std::mt19937_64 rng(seed);
  std::vector<ModelMember> out;
  for (int i = 0; i < count; ++i) {
    const int f = i % int(fams.size());
    std::vector<double> p;
    for (const auto& a : fams[f].axes) {
      if (a.discrete) {
        std::uniform_int_distribution<int> d(int(a.lo), int(a.hi));
        p.push_back(d(rng));
      } else {
        std::uniform_real_distribution<double> d(a.lo, a.hi);
        p.push_back(d(rng));
      }
    }
    out.push_back(make_member(c, f, p));
  }
  return out;
}

int analytic_alpha(const ModelClassId& c) {
  switch (c.kind) {
    case ClassKind::kGrassmannian: return c.m;
    case ClassKind::kMinimalCones:
    case ClassKind::kYCones: return 2;
    case ClassKind::kHarmonic:
    case ClassKind::kHarmonicPrime:
    case ClassKind::kAxesUnion: return 1;
    case ClassKind::kLightCone:
    case ClassKind::kUniformSupport: return 3;
    case ClassKind::kSphereStack: return c.n - 1;
    case ClassKind::kSingularParts: {
      const ClassKind base = c.args.at(0).kind;
      if (base == ClassKind::kMinimalCones || base == ClassKind::kYCones) return 1;
      return 0;
    }
  }
  return 0;
}

CoveringProfile covering_profile(const ModelClassId& c, std::uint64_t seed) {
  const int count = c.kind == ClassKind::kGrassmannian && c.m == 0 ? 1 : 20;
  return fit_covering_profile(c, random_members(c, count, seed), default_profile_grid(analytic_alpha(c)),
                              seed);
}

Point tetra_vertex(int i) {
  static const double v[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  return Eigen::Vector3d(v[i][0], v[i][1], v[i][2]) / std::sqrt(3.0);
}

Point y_direction(int k) {
  const double a = 2.0 * kPi * k / 3.0;
  return Eigen::Vector3d(std::cos(a), std::sin(a), 0.0);
}

const std::vector<std::pair<int, int>>& tetra_edges() {
  static const std::vector<std::pair<int, int>> e = {{0, 1}, {0, 2}, {0, 3},
                                                     {1, 2}, {1, 3}, {2, 3}};
  return e;
}

ShapePtr y_cone_shape(const Eigen::Matrix3d& rot, const Point& apex) {
  std::vector<ShapePtr> parts;
  const Point e3 = rot * Eigen::Vector3d::UnitZ();
  for (int k = 0; k < 3; ++k) {
    parts.push_back(make_wedge(apex, e3, Point(rot * y_direction(k)), kPi));
  }
  return make_union(std::move(parts));
}

ShapePtr t_cone_shape(const Eigen::Matrix3d& rot, const Point& apex) {
  std::vector<ShapePtr> parts;
  const double angle = std::acos(-1.0 / 3.0);
  for (const auto& [i, j] : tetra_edges()) {
    const Point vi = tetra_vertex(i), vj = tetra_vertex(j);
    const Point w = (vj - vi.dot(vj) * vi).normalized();
    parts.push_back(make_wedge(apex, Point(rot * vi), Point(rot * w), angle));
  }
  return make_union(std::move(parts));
}

ShapePtr t_spine_shape(const Eigen::Matrix3d& rot, const Point& apex) {
  std::vector<ShapePtr> parts;
  for (int i = 0; i < 4; ++i) parts.push_back(make_ray(apex, Point(rot * tetra_vertex(i))));
  return make_union(std::move(parts));
}

ShapePtr harmonic_shape(int type, double theta, double lambda) {
  const Point o = origin(2);
  const Point e1(Eigen::Vector2d(std::cos(theta), std::sin(theta)));
  const Point e2(Eigen::Vector2d(-std::sin(theta), std::cos(theta)));
  switch (type) {
    case 1: return make_flat(o, Eigen::MatrixXd(e2));
    case 2: return make_union({make_flat(o, Eigen::MatrixXd(e1)), make_flat(o, Eigen::MatrixXd(e2))});
    case 3:
      return make_union({make_flat(o, Eigen::MatrixXd(e1)),
                         make_flat(Point(-lambda * e1), Eigen::MatrixXd(e2))});
    case 4: return make_hyperbola(lambda, theta);
    default: throw InvalidInput(fmt::format("harmonic type {} not in 1..4", type));
  }
}

std::vector<double> angles_of(const Point& u_in) {
  const int n = int(u_in.size());
  const double norm = u_in.norm();
  if (!(norm > 0.0)) throw InvalidInput("angles_of needs a nonzero vector");
  Point u = u_in / norm;
  auto wrap = [](double a, double period) {
    a = std::fmod(a, period);
    return a < 0.0 ? a + period : a;
  };
  switch (n) {
    case 1: return {};
    case 2: return {wrap(std::atan2(u[1], u[0]), kPi)};
    case 3:
      if (u[2] < 0.0) u = -u;
      return {std::acos(std::clamp(u[2], -1.0, 1.0)), wrap(std::atan2(u[1], u[0]), 2 * kPi)};
    case 4:
      if (u[3] < 0.0) u = -u;
      return {std::acos(std::clamp(u[3], -1.0, 1.0)), std::atan2(std::hypot(u[0], u[1]), u[2]),
              wrap(std::atan2(u[1], u[0]), 2 * kPi)};
    default: throw InvalidInput("angles_of supports n <= 4");
  }
}

}  // namespace lsa
