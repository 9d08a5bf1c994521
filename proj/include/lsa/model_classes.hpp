#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsa/geometry.hpp"
#include "lsa/shapes.hpp"

namespace lsa {

enum class ClassKind {
  kGrassmannian,
  kMinimalCones,
  kYCones,
  kHarmonic,
  kHarmonicPrime,
  kLightCone,
  kUniformSupport,
  kSphereStack,
  kAxesUnion,
  kSingularParts,
};

/// Identifier of a local approximation class. Text forms:
///   grassmannian(n,m)  (alias G(n,m); singleton(n) is G(n,0))
///   minimal_cones_3_2, y_cones_3_2, harmonic_2_2, harmonic_prime_2_2,
///   light_cone(4), uniform_support(4), sphere_stack[(n)], axes_union_2d,
///   singular_parts(<base>,<detector>)
struct ModelClassId {
  ClassKind kind = ClassKind::kGrassmannian;
  int n = 2;
  int m = 1;
  std::vector<ModelClassId> args;  // base, detector for singular parts

  static ModelClassId parse(const std::string& text);
  static ModelClassId grassmannian(int n, int m);
  std::string to_string() const;
  int dim() const { return n; }

  friend bool operator==(const ModelClassId&, const ModelClassId&) = default;
};

/// A member S of a class. When the class has several families the first
/// parameter is the family index; the rest are the family's parameters.
struct ModelMember {
  ModelClassId cls;
  std::vector<double> params;
};

nlohmann::json to_json(const ModelMember& m);
ModelMember member_from_json(const nlohmann::json& j);

/// One search coordinate. Steps are coarse-grid steps; lipschitz bounds the
/// change of the member inside B(0, 1) per unit of the parameter.
struct ParamAxis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  bool periodic = false;  // hi excluded from the grid
  bool discrete = false;  // integer tag, never refined
  double lipschitz = 1.0;
};

struct FamilySearch {
  std::string name;
  std::vector<ParamAxis> axes;
  /// Coarse product grids larger than this are replaced by a Halton set.
  std::size_t budget = 6000;
  /// Builds the member shape from family parameters (no family tag).
  std::function<ShapePtr(const double*)> build;
  /// Rescales family parameters in place so that build(p') = s * build(p).
  std::function<void(double*, double)> dilate;

  std::size_t product_size() const;
};

/// Bounded search description for inf over the class. Offsets and scales
/// are in units of r (the optimizer works on the normalized cloud
/// (A - x) / r, where members are searched at r = 1).
struct SearchSpace {
  ModelClassId cls;
  std::vector<FamilySearch> families;
  int refine_passes = 2;
  double refine_factor = 8.0;
  int refine_top = 3;
  double offset_bound = 2.0;
};

SearchSpace search_space(const ModelClassId& c, double r = 1.0);

/// Member from a family index and family parameters.
ModelMember make_member(const ModelClassId& c, int family, const std::vector<double>& params);
int member_family(const ModelMember& m);

ShapePtr member_shape(const ModelMember& m);
double member_distance(const ModelMember& m, const PointRef& q);
PointCloud sample_member(const ModelMember& m, const Ball& ball, double h);
/// Member equal to s * m.
ModelMember dilate_member(const ModelMember& m, double s);
/// Uniform draws from the search ranges, families taken in turn.
std::vector<ModelMember> random_members(const ModelClassId& c, int count, std::uint64_t seed);

/// Analytic covering exponent of the class members.
int analytic_alpha(const ModelClassId& c);

struct CoveringProfile {
  double alpha = 0.0;
  double C = 1.0;
  double s0 = 1.0;
};

/// Covering profile with alpha from analytic_alpha and C, s0 fitted on
/// random members; throws AuditFailure when the audit rejects the fit.
CoveringProfile covering_profile(const ModelClassId& c, std::uint64_t seed = 1);

// Canonical geometry shared with the generators.
Point tetra_vertex(int i);
/// Unit vector at angle 2*pi*k/3 in the x1x2-plane.
Point y_direction(int k);
/// Tetrahedron edges (i, j) in the fixed order used by the T-cone.
const std::vector<std::pair<int, int>>& tetra_edges();

ShapePtr y_cone_shape(const Eigen::Matrix3d& rot, const Point& apex);
ShapePtr t_cone_shape(const Eigen::Matrix3d& rot, const Point& apex);
ShapePtr t_spine_shape(const Eigen::Matrix3d& rot, const Point& apex);
/// Harmonic zero sets: 1 line {x=0}, 2 cross {xy=0}, 3 {(x+1)y=0},
/// 4 {xy-x-y=0}; types 3 and 4 scaled by lambda, all rotated by theta.
ShapePtr harmonic_shape(int type, double theta, double lambda);

/// Angles for unit_vector(n, .) pointing along +-u (the hemisphere rep).
std::vector<double> angles_of(const Point& u);

}  // namespace lsa
