#include "lsa/shapes.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lsa {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Appends p when it lies in the ball; rounding overshoot is pulled back.
void emit(std::vector<double>& out, const Point& p, const Ball& ball) {
  const double d = (p - ball.center).norm();
  if (d <= ball.radius) {
    out.insert(out.end(), p.data(), p.data() + p.size());
  } else if (d <= ball.radius * (1.0 + 1e-12)) {
    const Point q = ball.center + (p - ball.center) * (ball.radius / d);
    out.insert(out.end(), q.data(), q.data() + q.size());
  }
}

// Parameter interval of origin + s*dir inside the ball (dir unit).
bool chord_range(const Point& origin, const Point& dir, const Ball& ball, double& lo,
                 double& hi) {
  const Point w = origin - ball.center;
  const double b = dir.dot(w);
  const double disc = b * b - (w.squaredNorm() - ball.radius * ball.radius);
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  lo = -b - sq;
  hi = -b + sq;
  return true;
}

// Real roots of a monic quartic u^4 + c3 u^3 + c2 u^2 + c1 u + c0, polished.
std::vector<double> quartic_candidates(double c3, double c2, double c1, double c0) {
  Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
  comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
  comp(0, 3) = -c0;
  comp(1, 3) = -c1;
  comp(2, 3) = -c2;
  comp(3, 3) = -c3;
  Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
  std::vector<double> out;
  for (int i = 0; i < 4; ++i) {
    double u = es.eigenvalues()[i].real();
    for (int it = 0; it < 8; ++it) {
      const double p = (((u + c3) * u + c2) * u + c1) * u + c0;
      const double dp = ((4.0 * u + 3.0 * c3) * u + 2.0 * c2) * u + c1;
      if (dp == 0.0) break;
      const double step = p / dp;
      if (!std::isfinite(step)) break;
      u -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(u))) break;
    }
    out.push_back(u);
  }
  return out;
}

class FlatShape final : public Shape {
 public:
  FlatShape(Point origin, Eigen::MatrixXd basis) : o_(std::move(origin)), b_(std::move(basis)) {}
  int dim() const override { return int(o_.size()); }

  double distance(const double* q) const override {
    const Point w = ConstPointMap(q, dim()) - o_;
    if (b_.cols() == 0) return w.norm();
    return (w - b_ * (b_.transpose() * w)).norm();
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const int m = int(b_.cols());
    if (m == 0) {
      emit(out, o_, ball);
      return;
    }
    if (m == 1) {
      const Point dir = b_.col(0);
      sample_chord(o_, dir, -kInf, kInf, ball, h, out);
      return;
    }
    const Point w = ball.center - o_;
    const Eigen::VectorXd uc = b_.transpose() * w;
    const double off2 = std::max(0.0, w.squaredNorm() - uc.squaredNorm());
    const double r2 = ball.radius * ball.radius - off2;
    if (r2 < 0.0) return;
    const double rho = std::sqrt(r2);
    // Lattice covering radius equals h; outside points are projected onto
    // the disk, which never increases their distance to disk points.
    const double step = 2.0 * h / std::sqrt(double(m)) * 0.999;
    const int kmax = int(std::ceil((rho + h) / step));
    std::vector<int> idx(m, -kmax);
    Eigen::VectorXd u(m);
    const double lim = (rho + h) * (rho + h);
    for (;;) {
      for (int j = 0; j < m; ++j) u[j] = idx[j] * step;
      const double d2 = u.squaredNorm();
      if (d2 <= lim) {
        Eigen::VectorXd v = u;
        if (d2 > r2) v *= rho / std::sqrt(d2);
        emit(out, Point(o_ + b_ * (uc + v)), ball);
      }
      int j = 0;
      while (j < m && ++idx[j] > kmax) idx[j++] = -kmax;
      if (j == m) break;
    }
    emit(out, o_, ball);
  }

 private:
  Point o_;
  Eigen::MatrixXd b_;
};

class SegmentShape final : public Shape {
 public:
  SegmentShape(Point a, Point dir, double len) : a_(std::move(a)), d_(std::move(dir)), len_(len) {}
  int dim() const override { return int(a_.size()); }
  double distance(const double* q) const override {
    const Point w = ConstPointMap(q, dim()) - a_;
    const double s = std::clamp(w.dot(d_), 0.0, len_);
    return (w - s * d_).norm();
  }
  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    sample_chord(a_, d_, 0.0, len_, ball, h, out);
  }

 private:
  Point a_, d_;
  double len_;
};

class WedgeShape final : public Shape {
 public:
  WedgeShape(Point apex, Point e1, Point e2, double angle)
      : a_(std::move(apex)), e1_(std::move(e1)), e2_(std::move(e2)), phi_(angle),
        c_(std::cos(angle)), s_(std::sin(angle)) {}
  int dim() const override { return int(a_.size()); }

  double in_plane_distance(double u, double v) const {
    const double ang = std::atan2(v, u);
    if (ang >= 0.0 && ang <= phi_) return 0.0;
    if (v == 0.0 && u > 0.0) return 0.0;
    const double d1 = u >= 0.0 ? std::abs(v) : std::hypot(u, v);
    const double t = u * c_ + v * s_;
    const double d2 = t >= 0.0 ? std::abs(u * s_ - v * c_) : std::hypot(u, v);
    return std::min(d1, d2);
  }

  double distance(const double* q) const override {
    const Point w = ConstPointMap(q, dim()) - a_;
    const double u = w.dot(e1_), v = w.dot(e2_);
    const double n2 = (w - u * e1_ - v * e2_).squaredNorm();
    const double d = in_plane_distance(u, v);
    return std::sqrt(n2 + d * d);
  }

  bool inside(double u, double v) const {
    if (u == 0.0 && v == 0.0) return true;
    const double ang = std::atan2(v, u);
    return ang >= 0.0 && ang <= phi_;
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const Point w = ball.center - a_;
    const double uc = w.dot(e1_), vc = w.dot(e2_);
    const double off2 = std::max(0.0, w.squaredNorm() - uc * uc - vc * vc);
    const double r2 = ball.radius * ball.radius - off2;
    if (r2 < 0.0) return;
    const double rho = std::sqrt(r2);
    // Boundary rays, spaced <= h.
    sample_chord(a_, e1_, 0.0, kInf, ball, h, out);
    const Point e3 = c_ * e1_ + s_ * e2_;
    sample_chord(a_, e3, 0.0, kInf, ball, h, out);
    // Arc of the disk boundary inside the wedge.
    if (rho > 0.0) {
      const int na = std::max(8, int(std::ceil(2.0 * kPi * rho / h)));
      for (int k = 0; k < na; ++k) {
        const double t = 2.0 * kPi * k / na;
        const double u = uc + rho * std::cos(t), v = vc + rho * std::sin(t);
        if (inside(u, v)) emit(out, Point(a_ + u * e1_ + v * e2_), ball);
      }
    }
    // Interior lattice with covering radius h/2.
    const double step = h / std::sqrt(2.0) * 0.999;
    const int kmax = int(std::ceil(rho / step));
    for (int i = -kmax; i <= kmax; ++i) {
      for (int j = -kmax; j <= kmax; ++j) {
        const double du = i * step, dv = j * step;
        if (du * du + dv * dv > r2) continue;
        const double u = uc + du, v = vc + dv;
        if (inside(u, v)) emit(out, Point(a_ + u * e1_ + v * e2_), ball);
      }
    }
  }

 private:
  Point a_, e1_, e2_;
  double phi_, c_, s_;
};

// Sphere cap sampler in local 3-D coordinates: sphere radius rho about the
// origin, intersected with the ball (bc, sigma).
template <class Emit>
void sample_cap(double rho, const Eigen::Vector3d& bc, double sigma, double h, Emit&& put) {
  if (rho <= 0.0) {
    if (bc.norm() <= sigma) put(Eigen::Vector3d::Zero());
    return;
  }
  const double d = bc.norm();
  Eigen::Vector3d axis(0, 0, 1);
  double tmax;
  if (d <= 1e-300) {
    if (rho > sigma) return;
    tmax = kPi;
  } else {
    axis = bc / d;
    const double kappa = (rho * rho + d * d - sigma * sigma) / (2.0 * rho * d);
    if (kappa > 1.0) return;
    tmax = kappa <= -1.0 ? kPi : std::acos(kappa);
  }
  Eigen::Vector3d b1 = std::abs(axis.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  b1 = (b1 - b1.dot(axis) * axis).normalized();
  const Eigen::Vector3d b2 = axis.cross(b1);
  const int nt = std::max(1, int(std::ceil(tmax * rho / h)));
  for (int j = 0; j <= nt; ++j) {
    const double th = tmax * j / nt;
    const double ring = rho * std::sin(th);
    const int na = ring <= 0.0 ? 1 : std::max(3, int(std::ceil(2.0 * kPi * ring / h)));
    for (int k = 0; k < na; ++k) {
      const double ph = 2.0 * kPi * k / na;
      put(Eigen::Vector3d(rho * std::cos(th) * axis +
                          ring * (std::cos(ph) * b1 + std::sin(ph) * b2)));
    }
  }
}

class SphereShape final : public Shape {
 public:
  SphereShape(Point c, double rho, Eigen::MatrixXd basis)
      : c_(std::move(c)), rho_(rho), e_(std::move(basis)) {}
  int dim() const override { return int(c_.size()); }

  double distance(const double* q) const override {
    const Point w = ConstPointMap(q, dim()) - c_;
    const Eigen::VectorXd l = e_.transpose() * w;
    const double out2 = std::max(0.0, w.squaredNorm() - l.squaredNorm());
    const double radial = l.norm() - rho_;
    return std::sqrt(out2 + radial * radial);
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const Point w = ball.center - c_;
    const Eigen::VectorXd l = e_.transpose() * w;
    const double off2 = std::max(0.0, w.squaredNorm() - l.squaredNorm());
    const double s2 = ball.radius * ball.radius - off2;
    if (s2 < 0.0) return;
    const double sigma = std::sqrt(s2);
    if (e_.cols() == 2) {
      const double d = l.norm();
      double mid = 0.0, half;
      if (d <= 1e-300) {
        if (rho_ > sigma) return;
        half = kPi;
      } else {
        mid = std::atan2(l[1], l[0]);
        const double kappa = (rho_ * rho_ + d * d - sigma * sigma) / (2.0 * rho_ * d);
        if (kappa > 1.0) return;
        half = kappa <= -1.0 ? kPi : std::acos(kappa);
      }
      const int na = std::max(1, int(std::ceil(2.0 * half * rho_ / h)));
      for (int k = 0; k <= na; ++k) {
        const double t = mid - half + 2.0 * half * k / na;
        emit(out, Point(c_ + rho_ * (std::cos(t) * e_.col(0) + std::sin(t) * e_.col(1))), ball);
      }
      return;
    }
    sample_cap(rho_, Eigen::Vector3d(l), sigma, h,
               [&](const Eigen::Vector3d& p) { emit(out, Point(c_ + e_ * p), ball); });
  }

 private:
  Point c_;
  double rho_;
  Eigen::MatrixXd e_;
};

class LightConeShape final : public Shape {
 public:
  LightConeShape(Point apex, Point axis)
      : v_(std::move(apex)), a_(std::move(axis)), e_(complement_basis(a_)) {}
  int dim() const override { return 4; }

  double distance(const double* q) const override {
    const Point w = ConstPointMap(q, 4) - v_;
    const double t = w.dot(a_);
    const double rho = (w - t * a_).norm();
    return std::abs(rho - std::abs(t)) / std::sqrt(2.0);
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const Point w = ball.center - v_;
    const double tc = w.dot(a_);
    const Eigen::Vector3d yc = e_.transpose() * w;
    const double R = ball.radius;
    // Along a generator, dt moves the point by sqrt(2) dt.
    const int nt = std::max(1, int(std::ceil(2.0 * R * std::sqrt(2.0) / h)));
    std::vector<double> ts;
    for (int j = 0; j <= nt; ++j) ts.push_back(tc - R + 2.0 * R * j / nt);
    if (std::abs(tc) <= R) ts.push_back(0.0);
    for (double t : ts) {
      const double s2 = R * R - (t - tc) * (t - tc);
      if (s2 < 0.0) continue;
      sample_cap(std::abs(t), yc, std::sqrt(s2), h, [&](const Eigen::Vector3d& y) {
        emit(out, Point(v_ + t * a_ + e_ * y), ball);
      });
    }
  }

 private:
  Point v_, a_;
  Eigen::MatrixXd e_;
};

class HyperbolaShape final : public Shape {
 public:
  HyperbolaShape(double scale, double angle)
      : lambda_(scale), c_(std::cos(angle)), s_(std::sin(angle)) {}
  int dim() const override { return 2; }

  // Canonical point for branch sign and parameter tau.
  static void canonical(double sign, double tau, double& x, double& y) {
    const double X = sign * std::sqrt(2.0) * std::cosh(tau);
    const double Y = std::sqrt(2.0) * std::sinh(tau);
    x = 1.0 + (X - Y) / std::sqrt(2.0);
    y = 1.0 + (X + Y) / std::sqrt(2.0);
  }

  double distance(const double* q) const override {
    // Back to canonical coordinates.
    const double qx = (c_ * q[0] + s_ * q[1]) / lambda_;
    const double qy = (-s_ * q[0] + c_ * q[1]) / lambda_;
    // Critical points of |q - (1+u, 1+1/u)|^2 solve
    // u^4 - (qx-1) u^3 + (qy-1) u - 1 = 0.
    double best = kInf;
    for (double u : quartic_candidates(-(qx - 1.0), 0.0, qy - 1.0, -1.0)) {
      if (u == 0.0 || !std::isfinite(u)) continue;
      best = std::min(best, std::hypot(qx - 1.0 - u, qy - 1.0 - 1.0 / u));
    }
    return best * lambda_;
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const double M = (ball.center.norm() + ball.radius) / lambda_;
    const double tau_max = std::asinh((M + std::sqrt(2.0)) / std::sqrt(2.0));
    for (double sign : {-1.0, 1.0}) {
      auto curve = [&](double tau, double* p) {
        double x, y;
        canonical(sign, tau, x, y);
        p[0] = lambda_ * (c_ * x - s_ * y);
        p[1] = lambda_ * (s_ * x + c_ * y);
      };
      sample_param_curve(curve, 2, -tau_max, tau_max, ball, h, out);
    }
  }

 private:
  double lambda_, c_, s_;
};

class PolylineShape final : public Shape {
 public:
  PolylineShape(int n, std::vector<double> v) : n_(n), v_(std::move(v)) {}
  int dim() const override { return n_; }
  std::size_t count() const { return v_.size() / n_; }

  double distance(const double* q) const override {
    double best = kInf;
    for (std::size_t i = 0; i + 1 < count(); ++i) {
      const double* a = v_.data() + i * n_;
      const double* b = a + n_;
      double dd = 0.0, dw = 0.0;
      for (int k = 0; k < n_; ++k) {
        dd += (b[k] - a[k]) * (b[k] - a[k]);
        dw += (q[k] - a[k]) * (b[k] - a[k]);
      }
      const double s = dd > 0.0 ? std::clamp(dw / dd, 0.0, 1.0) : 0.0;
      double d2 = 0.0;
      for (int k = 0; k < n_; ++k) {
        const double t = q[k] - a[k] - s * (b[k] - a[k]);
        d2 += t * t;
      }
      best = std::min(best, d2);
    }
    if (count() == 1) {
      double d2 = 0.0;
      for (int k = 0; k < n_; ++k) d2 += (q[k] - v_[k]) * (q[k] - v_[k]);
      best = d2;
    }
    return std::sqrt(best);
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const double R = ball.radius;
    for (std::size_t i = 0; i + 1 < count(); ++i) {
      const ConstPointMap a(v_.data() + i * n_, n_), b(v_.data() + (i + 1) * n_, n_);
      // Cheap rejection by the segment's bounding sphere.
      const Point mid = 0.5 * (a + b);
      const double half = 0.5 * (b - a).norm();
      if ((mid - ball.center).norm() > R + half) continue;
      const double len = (b - a).norm();
      if (len == 0.0) {
        emit(out, Point(a), ball);
        continue;
      }
      sample_chord(Point(a), Point((b - a) / len), 0.0, len, ball, h, out);
    }
  }

 private:
  int n_;
  std::vector<double> v_;
};

class UnionShape final : public Shape {
 public:
  explicit UnionShape(std::vector<ShapePtr> parts) : parts_(std::move(parts)) {}
  int dim() const override { return parts_.front()->dim(); }
  double distance(const double* q) const override {
    double best = kInf;
    for (const auto& p : parts_) best = std::min(best, p->distance(q));
    return best;
  }
  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    for (const auto& p : parts_) p->sample(ball, h, out);
  }

 private:
  std::vector<ShapePtr> parts_;
};

class GraphCurveShape final : public Shape {
 public:
  explicit GraphCurveShape(CurveFunction fn) : fn_(std::move(fn)) {}
  int dim() const override { return 2; }

  double distance(const double* q) const override {
    const double qx = q[0], qy = q[1];
    auto g = [&](double t) {
      const double dy = fn_.f(t) - qy;
      return (t - qx) * (t - qx) + dy * dy;
    };
    const double d0 = std::abs(qy - fn_.f(qx));
    if (d0 == 0.0) return 0.0;
    // The nearest point has |t - qx| <= d0.
    const int n = 256;
    double best_t = qx, best = g(qx);
    for (int i = 0; i <= n; ++i) {
      const double t = qx - d0 + 2.0 * d0 * i / n;
      const double v = g(t);
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    // Newton polish on g'(t) = 0 within the bracketing cell.
    const double cell = 2.0 * d0 / n;
    double lo = best_t - cell, hi = best_t + cell, t = best_t;
    for (int it = 0; it < 60; ++it) {
      const double f = fn_.f(t), df = fn_.df(t), ddf = fn_.ddf(t);
      const double g1 = (t - qx) + (f - qy) * df;
      const double g2 = 1.0 + df * df + (f - qy) * ddf;
      double nt = g2 > 0.0 ? t - g1 / g2 : 0.5 * (lo + hi);
      if (!(nt > lo && nt < hi)) nt = 0.5 * (lo + hi);
      if (g1 > 0.0) hi = t; else lo = t;
      if (std::abs(nt - t) <= 1e-16 * (1.0 + std::abs(t))) {
        t = nt;
        break;
      }
      t = nt;
    }
    return std::sqrt(std::min(best, g(t)));
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    auto curve = [&](double t, double* p) {
      p[0] = t;
      p[1] = fn_.f(t);
    };
    sample_param_curve(curve, 2, ball.center[0] - ball.radius, ball.center[0] + ball.radius,
                       ball, h, out);
  }

 private:
  CurveFunction fn_;
};

class GraphSurfaceShape final : public Shape {
 public:
  explicit GraphSurfaceShape(SurfaceFunction fn) : fn_(std::move(fn)) {}
  int dim() const override { return 3; }

  double distance(const double* q) const override {
    double g[2], H[3];
    const double f0 = fn_.eval(q[0], q[1], g, H);
    const double d0 = std::abs(q[2] - f0);
    if (d0 == 0.0) return 0.0;
    auto obj = [&](double u, double v) {
      double gg[2], hh[3];
      const double dz = fn_.eval(u, v, gg, hh) - q[2];
      return (u - q[0]) * (u - q[0]) + (v - q[1]) * (v - q[1]) + dz * dz;
    };
    const int n = 12;
    double best = obj(q[0], q[1]);
    std::vector<std::pair<double, std::pair<double, double>>> starts;
    for (int i = -n; i <= n; ++i) {
      for (int j = -n; j <= n; ++j) {
        const double u = q[0] + d0 * i / n, v = q[1] + d0 * j / n;
        if ((u - q[0]) * (u - q[0]) + (v - q[1]) * (v - q[1]) > d0 * d0) continue;
        starts.push_back({obj(u, v), {u, v}});
      }
    }
    std::partial_sort(starts.begin(), starts.begin() + std::min<std::size_t>(4, starts.size()),
                      starts.end());
    for (std::size_t s = 0; s < std::min<std::size_t>(4, starts.size()); ++s) {
      double u = starts[s].second.first, v = starts[s].second.second;
      double cur = starts[s].first;
      for (int it = 0; it < 50; ++it) {
        const double f = fn_.eval(u, v, g, H);
        const double dz = f - q[2];
        const double gu = (u - q[0]) + dz * g[0], gv = (v - q[1]) + dz * g[1];
        const double a = 1.0 + g[0] * g[0] + dz * H[0];
        const double b = g[0] * g[1] + dz * H[1];
        const double c = 1.0 + g[1] * g[1] + dz * H[2];
        const double det = a * c - b * b;
        double su, sv;
        if (det > 0.0 && a > 0.0) {
          su = (c * gu - b * gv) / det;
          sv = (a * gv - b * gu) / det;
        } else {
          su = gu;
          sv = gv;
        }
        double step = 1.0, next = kInf;
        for (int ls = 0; ls < 40; ++ls) {
          next = obj(u - step * su, v - step * sv);
          if (next <= cur) break;
          step *= 0.5;
        }
        if (!(next <= cur)) break;
        u -= step * su;
        v -= step * sv;
        const bool done = cur - next <= 1e-32 + 1e-16 * cur;
        cur = next;
        if (done) break;
      }
      best = std::min(best, cur);
    }
    return std::sqrt(best);
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const double L = fn_.lipschitz;
    const double step = h / std::sqrt(2.0 * (1.0 + L * L));
    const double R = ball.radius;
    const int k = int(std::ceil(R / step));
    double g[2], H[3];
    for (int i = -k; i <= k; ++i) {
      for (int j = -k; j <= k; ++j) {
        const double u = ball.center[0] + i * step, v = ball.center[1] + j * step;
        if ((i * i + j * j) * step * step > R * R) continue;
        emit(out, Point(Eigen::Vector3d(u, v, fn_.eval(u, v, g, H))), ball);
      }
    }
  }

 private:
  SurfaceFunction fn_;
};

}  // namespace

double Shape::distance(const PointRef& q) const {
  check_dim(dim(), int(q.size()), "shape distance");
  const Eigen::VectorXd qq = q;
  return distance(qq.data());
}

PointCloud Shape::sample_cloud(const Ball& ball, double h) const {
  check_dim(dim(), ball.dim(), "shape sample");
  if (!(h > 0.0)) throw InvalidInput("sampling resolution must be positive");
  std::vector<double> out;
  sample(ball, h, out);
  if (out.empty()) return PointCloud::empty(dim(), h, ball);
  return PointCloud(dim(), std::move(out), h, ball);
}

void sample_chord(const Point& origin, const Point& dir, double s_lo, double s_hi,
                  const Ball& ball, double h, std::vector<double>& out) {
  double lo, hi;
  if (!chord_range(origin, dir, ball, lo, hi)) return;
  lo = std::max(lo, s_lo);
  hi = std::min(hi, s_hi);
  if (lo > hi) return;
  const double len = hi - lo;
  const int k = len > 0.0 ? int(std::ceil(len / h)) : 0;
  for (int i = 0; i <= k; ++i) {
    const double s = k == 0 ? lo : lo + len * i / k;
    emit(out, Point(origin + s * dir), ball);
  }
  if (lo < 0.0 && hi > 0.0) emit(out, origin, ball);
}

void sample_param_curve(const std::function<void(double, double*)>& curve, int n,
                        double t0, double t1, const Ball& ball, double h,
                        std::vector<double>& out) {
  std::vector<double> p(n), q(n);
  auto inside = [&](const std::vector<double>& x) {
    double d2 = 0.0;
    for (int k = 0; k < n; ++k) d2 += (x[k] - ball.center[k]) * (x[k] - ball.center[k]);
    return d2 <= ball.radius * ball.radius;
  };
  auto gap = [&](const std::vector<double>& x) {
    double d2 = 0.0;
    for (int k = 0; k < n; ++k) d2 += (x[k] - ball.center[k]) * (x[k] - ball.center[k]);
    return std::sqrt(d2) - ball.radius;
  };
  auto put = [&](const std::vector<double>& x) {
    emit(out, Point(Eigen::Map<const Eigen::VectorXd>(x.data(), n)), ball);
  };
  auto boundary = [&](double a, double b, bool a_in) {
    // Bisect to the crossing and emit its inside end.
    std::vector<double> x(n);
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      curve(m, x.data());
      if (inside(x) == a_in) a = m; else b = m;
    }
    curve(a_in ? a : b, x.data());
    put(x);
  };
  double t = t0;
  curve(t, p.data());
  bool in = inside(p);
  if (in) put(p);
  double dt = (t1 - t0) / 64.0;
  const double target = 0.5 * h;
  while (t < t1) {
    const double want = std::max(target, 0.5 * gap(p));
    double nt;
    for (;;) {
      nt = std::min(t1, t + dt);
      curve(nt, q.data());
      double d2 = 0.0;
      for (int k = 0; k < n; ++k) d2 += (q[k] - p[k]) * (q[k] - p[k]);
      if (std::sqrt(d2) <= want || nt - t <= 1e-15 * (1.0 + std::abs(t))) break;
      dt *= 0.5;
    }
    const bool qin = inside(q);
    if (qin != in) boundary(t, nt, in);
    if (qin) put(q);
    t = nt;
    p = q;
    in = qin;
    dt *= 1.5;
  }
}

ShapePtr make_flat(const Point& origin, const Eigen::MatrixXd& basis) {
  if (basis.cols() > 0) check_dim(int(origin.size()), int(basis.rows()), "flat basis");
  Eigen::MatrixXd b = basis;
  if (b.cols() == 0) b.resize(origin.size(), 0);
  return std::make_shared<FlatShape>(origin, b);
}

ShapePtr make_point(const Point& p) { return make_flat(p, Eigen::MatrixXd(p.size(), 0)); }

ShapePtr make_segment(const Point& a, const Point& b) {
  const double len = (b - a).norm();
  if (len == 0.0) return make_point(a);
  return std::make_shared<SegmentShape>(a, (b - a) / len, len);
}

ShapePtr make_ray(const Point& origin, const Point& direction) {
  return std::make_shared<SegmentShape>(origin, direction.normalized(), kInf);
}

ShapePtr make_wedge(const Point& apex, const Point& e1, const Point& e2, double angle) {
  return std::make_shared<WedgeShape>(apex, e1, e2, angle);
}

ShapePtr make_sphere(const Point& center, double radius, const Eigen::MatrixXd& basis) {
  if (basis.cols() != 2 && basis.cols() != 3) {
    throw InvalidInput("sphere basis must have 2 or 3 columns");
  }
  return std::make_shared<SphereShape>(center, radius, basis);
}

ShapePtr make_light_cone(const Point& apex, const Point& axis) {
  check_dim(4, int(apex.size()), "light cone");
  return std::make_shared<LightConeShape>(apex, axis.normalized());
}

ShapePtr make_hyperbola(double scale, double angle) {
  return std::make_shared<HyperbolaShape>(scale, angle);
}

ShapePtr make_polyline(int n, std::vector<double> vertices) {
  if (vertices.empty() || vertices.size() % n) throw InvalidInput("bad polyline vertices");
  return std::make_shared<PolylineShape>(n, std::move(vertices));
}

ShapePtr make_union(std::vector<ShapePtr> parts) {
  if (parts.empty()) throw InvalidInput("union of no shapes");
  if (parts.size() == 1) return parts.front();
  return std::make_shared<UnionShape>(std::move(parts));
}

ShapePtr make_graph_curve(CurveFunction fn) {
  return std::make_shared<GraphCurveShape>(std::move(fn));
}

ShapePtr make_graph_surface(SurfaceFunction fn) {
  return std::make_shared<GraphSurfaceShape>(std::move(fn));
}

Point unit_vector(int n, const double* a) {
  Point u(n);
  switch (n) {
    case 1:
      u[0] = 1.0;
      break;
    case 2:
      u << std::cos(a[0]), std::sin(a[0]);
      break;
    case 3:
      u << std::sin(a[0]) * std::cos(a[1]), std::sin(a[0]) * std::sin(a[1]), std::cos(a[0]);
      break;
    case 4:
      u << std::sin(a[0]) * std::sin(a[1]) * std::cos(a[2]),
          std::sin(a[0]) * std::sin(a[1]) * std::sin(a[2]), std::sin(a[0]) * std::cos(a[1]),
          std::cos(a[0]);
      break;
    default:
      throw InvalidInput("unit_vector supports n <= 4");
  }
  return u;
}

Eigen::MatrixXd complement_basis(const Point& u) {
  const int n = int(u.size());
  // Householder reflection taking e_n to u; its other columns span u-perp.
  Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
  en[n - 1] = 1.0;
  Eigen::VectorXd v = u - en;
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  const double vv = v.squaredNorm();
  if (vv > 1e-30) H -= 2.0 * v * v.transpose() / vv;
  return H.leftCols(n - 1);
}

Eigen::Matrix3d euler_zyz(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(c, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

namespace {

class SphereStackShape final : public Shape {
 public:
  SphereStackShape(Point c, double scale) : c_(std::move(c)), scale_(scale) {}
  int dim() const override { return int(c_.size()); }

  double distance(const double* q) const override {
    const double rq = (ConstPointMap(q, dim()) - c_).norm();
    if (rq == 0.0) return 0.0;
    const double i = std::floor(std::log2(rq / scale_));
    const double lo = scale_ * std::exp2(i), hi = 2.0 * lo;
    return std::min({rq, std::abs(rq - lo), std::abs(hi - rq)});
  }

  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    const int n = dim();
    if (n != 2 && n != 3) throw InvalidInput("sphere stack sampling supports n = 2, 3");
    emit(out, c_, ball);
    const double d = (ball.center - c_).norm();
    const double lo = std::max(0.25 * h, d - ball.radius);
    const double hi = d + ball.radius;
    if (hi < lo) return;
    const int i0 = int(std::ceil(std::log2(lo / scale_)));
    const int i1 = int(std::floor(std::log2(hi / scale_)));
    const Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);
    for (int i = i0; i <= i1; ++i) {
      SphereShape shell(c_, scale_ * std::exp2(i), basis);
      shell.sample(ball, h, out);
    }
  }

 private:
  Point c_;
  double scale_;
};

class TranslatedShape final : public Shape {
 public:
  TranslatedShape(ShapePtr s, Point offset) : s_(std::move(s)), off_(std::move(offset)) {}
  int dim() const override { return s_->dim(); }
  double distance(const double* q) const override {
    const Point w = ConstPointMap(q, dim()) - off_;
    return s_->distance(w.data());
  }
  void sample(const Ball& ball, double h, std::vector<double>& out) const override {
    std::vector<double> local;
    s_->sample(Ball(ball.center - off_, ball.radius), h, local);
    const int n = dim();
    for (std::size_t i = 0; i < local.size(); i += n) {
      Point p = ConstPointMap(local.data() + i, n) + off_;
      emit(out, p, ball);
    }
  }

 private:
  ShapePtr s_;
  Point off_;
};

}  // namespace

ShapePtr make_sphere_stack(const Point& center, double scale) {
  if (!(scale > 0.0)) throw InvalidInput("sphere stack scale must be positive");
  return std::make_shared<SphereStackShape>(center, scale);
}

ShapePtr make_translated(ShapePtr shape, const Point& offset) {
  if (offset.isZero(0.0)) return shape;
  return std::make_shared<TranslatedShape>(std::move(shape), offset);
}

}  // namespace lsa
