#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <vector>

#include "lsa/geometry.hpp"

namespace lsa {

/// A closed set with an exact distance function and a windowed sampler.
///
/// sample() appends (row-major) points of the set inside the ball so that
/// every point of set ∩ ball is within about h of an emitted point. Emitted
/// points lie on the set up to rounding.
class Shape {
 public:
  virtual ~Shape() = default;
  virtual int dim() const = 0;
  virtual double distance(const double* q) const = 0;
  virtual void sample(const Ball& ball, double h, std::vector<double>& out) const = 0;

  double distance(const PointRef& q) const;
  PointCloud sample_cloud(const Ball& ball, double h) const;
};

using ShapePtr = std::shared_ptr<const Shape>;

/// origin + span(basis), basis columns orthonormal; zero columns is a point.
ShapePtr make_flat(const Point& origin, const Eigen::MatrixXd& basis);
ShapePtr make_point(const Point& p);
ShapePtr make_segment(const Point& a, const Point& b);
ShapePtr make_ray(const Point& origin, const Point& direction);
/// {apex + rho (cos(phi) e1 + sin(phi) e2) : rho >= 0, 0 <= phi <= angle},
/// angle in (0, pi].
ShapePtr make_wedge(const Point& apex, const Point& e1, const Point& e2, double angle);
/// Sphere of the given radius inside center + span(basis); basis has 2 or
/// 3 orthonormal columns.
ShapePtr make_sphere(const Point& center, double radius, const Eigen::MatrixXd& basis);
/// Light cone in R^4: |t| = rho with t the coordinate along the unit axis.
ShapePtr make_light_cone(const Point& apex, const Point& axis);
/// scale * rot * {(x-1)(y-1) = 1}, both branches (the zero set of xy - x - y).
ShapePtr make_hyperbola(double scale, double angle);
ShapePtr make_polyline(int n, std::vector<double> vertices);
ShapePtr make_union(std::vector<ShapePtr> parts);

/// Graph {(t, f(t))} in R^2 with derivatives for the distance solver.
struct CurveFunction {
  std::function<double(double)> f, df, ddf;
};
ShapePtr make_graph_curve(CurveFunction fn);

/// Graph {(u, v, f(u, v))} in R^3.
struct SurfaceFunction {
  // Returns f and fills the gradient and Hessian (fuu, fuv, fvv).
  std::function<double(double, double, double*, double*)> eval;
  double lipschitz = 1.0;
};
ShapePtr make_graph_surface(SurfaceFunction fn);

// Sampling primitives shared with samplers that are not plain shapes.
void sample_chord(const Point& origin, const Point& dir, double s_lo, double s_hi,
                  const Ball& ball, double h, std::vector<double>& out);
void sample_param_curve(const std::function<void(double, double*)>& curve, int n,
                        double t0, double t1, const Ball& ball, double h,
                        std::vector<double>& out);

/// Rotation helpers. unit_vector maps hemisphere angles to S^{n-1}:
/// n=2 (theta) -> (cos, sin); n=3 (theta, phi) -> polar about e3;
/// n=4 (psi, theta, phi) -> polar about e4. All-zero angles give e_n,
/// except n = 2 where theta = 0 gives e1.
Point unit_vector(int n, const double* angles);
/// Orthonormal basis of the complement of a unit vector (n x (n-1)).
Eigen::MatrixXd complement_basis(const Point& u);
/// Z-Y-Z Euler rotation.
Eigen::Matrix3d euler_zyz(double a, double b, double c);

/// center + scale * S with S = {0} ∪ ⋃_{i∈Z} ∂B(0, 2^i) (dimension of center).
ShapePtr make_sphere_stack(const Point& center, double scale);
ShapePtr make_translated(ShapePtr shape, const Point& offset);

}  // namespace lsa
