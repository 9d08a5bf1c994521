#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lsa/geometry.hpp"

namespace lsa {

namespace {
constexpr std::size_t kLeafSize = 8;
}

// Median-split k-d tree over a private, permuted copy of the coordinates.
struct NeighborIndex::Impl {
  struct Node {
    double split = 0.0;
    int axis = -1;  // -1 marks a leaf
    std::uint32_t begin = 0, end = 0;
    std::uint32_t left = 0, right = 0;
  };

  int n = 0;
  std::vector<double> pts;           // permuted coordinates
  std::vector<std::uint32_t> ids;    // permuted position -> source index
  std::vector<Node> nodes;

  std::uint32_t build(std::uint32_t begin, std::uint32_t end,
                      std::vector<std::uint32_t>& order,
                      const std::vector<double>& src) {
    Node node;
    node.begin = begin;
    node.end = end;
    const std::uint32_t self = static_cast<std::uint32_t>(nodes.size());
    nodes.push_back(node);
    if (end - begin <= kLeafSize) return self;

    int axis = 0;
    double widest = -1.0;
    for (int k = 0; k < n; ++k) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::uint32_t i = begin; i < end; ++i) {
        const double v = src[std::size_t(order[i]) * n + k];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = k;
      }
    }
    if (widest <= 0.0) return self;
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return src[std::size_t(a) * n + axis] < src[std::size_t(b) * n + axis];
                     });
    const double split = src[std::size_t(order[mid]) * n + axis];
    const std::uint32_t l = build(begin, mid, order, src);
    const std::uint32_t r = build(mid, end, order, src);
    nodes[self].axis = axis;
    nodes[self].split = split;
    nodes[self].left = l;
    nodes[self].right = r;
    return self;
  }

  void search(std::uint32_t ni, const double* q, double& best, std::uint32_t& best_id) const {
    const Node& node = nodes[ni];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const double* p = pts.data() + std::size_t(i) * n;
        double d2 = 0.0;
        for (int k = 0; k < n; ++k) {
          const double t = p[k] - q[k];
          d2 += t * t;
        }
        if (d2 < best) {
          best = d2;
          best_id = i;
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::uint32_t near = diff < 0.0 ? node.left : node.right;
    const std::uint32_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, best, best_id);
    if (diff * diff <= best) search(far, q, best, best_id);
  }

  std::pair<double, std::uint32_t> query(const double* q) const {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t id = 0;
    search(0, q, best, id);
    return {best, id};
  }
};

NeighborIndex::NeighborIndex(const PointCloud& cloud) : impl_(std::make_unique<Impl>()) {
  if (cloud.is_empty()) throw InvalidInput("cannot index an empty cloud");
  impl_->n = cloud.dim();
  const std::size_t count = cloud.size();
  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), 0u);
  impl_->nodes.reserve(2 * count / kLeafSize + 2);
  impl_->build(0, static_cast<std::uint32_t>(count), order, cloud.coords());
  const int n = impl_->n;
  impl_->pts.resize(count * n);
  for (std::size_t i = 0; i < count; ++i) {
    std::copy_n(cloud.data() + std::size_t(order[i]) * n, n, impl_->pts.data() + i * n);
  }
  impl_->ids = std::move(order);
}

NeighborIndex::~NeighborIndex() = default;
NeighborIndex::NeighborIndex(NeighborIndex&&) noexcept = default;
NeighborIndex& NeighborIndex::operator=(NeighborIndex&&) noexcept = default;

int NeighborIndex::dim() const { return impl_->n; }
std::size_t NeighborIndex::size() const { return impl_->ids.size(); }

double NeighborIndex::nearest_sq(const double* q) const { return impl_->query(q).first; }

double NeighborIndex::nearest_distance(const PointRef& q) const {
  check_dim(impl_->n, int(q.size()), "nearest_distance");
  const Eigen::VectorXd qq = q;
  return std::sqrt(impl_->query(qq.data()).first);
}

std::size_t NeighborIndex::nearest_index(const PointRef& q) const {
  check_dim(impl_->n, int(q.size()), "nearest_index");
  const Eigen::VectorXd qq = q;
  return impl_->ids[impl_->query(qq.data()).second];
}

NeighborIndex build_index(const PointCloud& cloud) { return NeighborIndex(cloud); }

double nearest_distance(const NeighborIndex& index, const PointRef& q) {
  return index.nearest_distance(q);
}

}  // namespace lsa
