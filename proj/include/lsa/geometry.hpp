#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsa {

using Point = Eigen::VectorXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;
using ConstPointMap = Eigen::Map<const Eigen::VectorXd>;

/// Raised for malformed input: bad dimensions, empty operands, bad ranges.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numeric routine cannot deliver its contract
/// (resolution floor, optimizer failure, audit violation).
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AuditFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed ball: membership is |p - center| <= radius.
struct Ball {
  Point center;
  double radius = 0.0;

  Ball() = default;
  Ball(Point c, double r);

  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const PointRef& p) const;
};

/// Finite sample of a closed set, stored row-major.
///
/// h is the sampling resolution (h = 0 means the cloud is the set itself);
/// window, when present, is the region on which the cloud is a faithful
/// h-net. Exact duplicates are removed on construction, keeping the first
/// occurrence so that input order is otherwise preserved.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(int n, std::vector<double> coords, double h = 0.0,
             std::optional<Ball> window = std::nullopt);

  static PointCloud empty(int n, double h = 0.0,
                          std::optional<Ball> window = std::nullopt);
  static PointCloud from_points(const std::vector<Point>& pts, double h = 0.0,
                                std::optional<Ball> window = std::nullopt);

  int dim() const { return n_; }
  std::size_t size() const { return n_ == 0 ? 0 : coords_.size() / n_; }
  bool is_empty() const { return coords_.empty(); }
  double h() const { return h_; }
  const std::optional<Ball>& window() const { return window_; }

  ConstPointMap point(std::size_t i) const {
    return ConstPointMap(coords_.data() + i * n_, n_);
  }
  const double* data() const { return coords_.data(); }
  const std::vector<double>& coords() const { return coords_; }

  PointCloud with_h(double h) const;
  PointCloud with_window(std::optional<Ball> window) const;

 private:
  struct Unchecked {};
  PointCloud(Unchecked, int n, std::vector<double> coords, double h,
             std::optional<Ball> window);
  friend PointCloud restrict(const PointCloud&, const Ball&);
  friend PointCloud transform(const PointCloud&, const PointRef&, double);

  int n_ = 0;
  std::vector<double> coords_;
  double h_ = 0.0;
  std::optional<Ball> window_;
};

/// Points with |p - center| <= radius; the result's window is the ball.
PointCloud restrict(const PointCloud& cloud, const Ball& ball);

/// (cloud - shift) / scale, with h and window mapped accordingly.
PointCloud transform(const PointCloud& cloud, const PointRef& shift,
                     double scale);

/// Union of clouds of equal dimension; h is the max, window dropped.
PointCloud merge(const std::vector<const PointCloud*>& parts);

void check_dim(int expected, int got, const char* what);

/// Exact nearest-point queries over a cloud (k-d tree).
class NeighborIndex {
 public:
  explicit NeighborIndex(const PointCloud& cloud);
  ~NeighborIndex();
  NeighborIndex(NeighborIndex&&) noexcept;
  NeighborIndex& operator=(NeighborIndex&&) noexcept;

  int dim() const;
  std::size_t size() const;

  double nearest_distance(const PointRef& q) const;
  /// Index into the (deduplicated) source cloud of a nearest point.
  std::size_t nearest_index(const PointRef& q) const;
  /// Squared-distance query against a raw coordinate pointer; no checks.
  double nearest_sq(const double* q) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

NeighborIndex build_index(const PointCloud& cloud);
double nearest_distance(const NeighborIndex& index, const PointRef& q);

/// Linear-scan reference used by tests and as a fallback for tiny clouds.
double nearest_distance_brute(const PointCloud& cloud, const PointRef& q);

// CSV with header x1,...,xn plus a JSON sidecar at <path>.json.
void write_cloud(const PointCloud& cloud, const std::string& csv_path);
PointCloud read_cloud(const std::string& csv_path);
std::string cloud_to_csv(const PointCloud& cloud);

}  // namespace lsa
