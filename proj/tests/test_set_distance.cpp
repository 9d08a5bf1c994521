#include <gtest/gtest.h>

#include <cmath>

#include "lsa/set_distance.hpp"
#include "lsa/verify.hpp"
#include "test_support.hpp"

namespace lsa {
namespace {

using testing::brute_excess;
using testing::Gen;
using testing::in_ball;
using testing::pt;

PointCloud line_cloud(std::initializer_list<double> xs) {
  return PointCloud(1, std::vector<double>(xs));
}

TEST(ExcessTest, HandComputedValues) {
  const PointCloud a(2, {0.0, 0.0, 3.0, 4.0});
  const PointCloud b(2, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(excess(a, b), 5.0);
  EXPECT_DOUBLE_EQ(excess(b, a), 0.0);
  EXPECT_DOUBLE_EQ(excess(PointCloud::empty(2), b), 0.0);
  EXPECT_THROW(excess(a, PointCloud::empty(2)), InvalidInput);
  EXPECT_THROW(excess(a, line_cloud({0.0})), InvalidInput);
}

TEST(RelativeExcessTest, OnlyPointsInsideTheBallCount) {
  const PointCloud a = line_cloud({0.0, 0.5, 10.0});
  const PointCloud b = line_cloud({0.0});
  EXPECT_DOUBLE_EQ(relative_excess(a, b, pt({0.0}), 1.0).value, 0.5);
  EXPECT_DOUBLE_EQ(relative_excess(a, b, pt({0.0}), 0.25).value, 0.0);
  EXPECT_DOUBLE_EQ(relative_excess(a, b, pt({5.0}), 5.0).value, 10.0 / 5.0);
  EXPECT_THROW(relative_excess(a, b, pt({0.0}), 0.0), InvalidInput);
}

TEST(RelativeExcessTest, SlackFollowsResolutions) {
  const PointCloud a(1, {0.0}, 0.1);
  const PointCloud b(1, {0.0}, 0.3);
  EXPECT_DOUBLE_EQ(relative_excess(a, b, pt({0.0}), 2.0).sampling_slack, 0.3);
  EXPECT_DOUBLE_EQ(relative_excess(line_cloud({0.0}), line_cloud({1.0}), pt({0.0}), 1.0).sampling_slack, 0.0);
}

TEST(WalkupWetsTest, SymmetricMaxOfBothDirections) {
  const PointCloud a = line_cloud({0.0, 0.5});
  const PointCloud b = line_cloud({0.0, 0.9});
  const Point o = pt({0.0});
  const double v = walkup_wets(a, b, o, 1.0).value;
  EXPECT_DOUBLE_EQ(v, 0.4);
  EXPECT_DOUBLE_EQ(walkup_wets(b, a, o, 1.0).value, v);
  EXPECT_THROW(walkup_wets(PointCloud::empty(1), b, o, 1.0), InvalidInput);
}

TEST(RelativeHausdorffTest, UndefinedWhenASetMissesTheBall) {
  EXPECT_THROW(relative_hausdorff(line_cloud({5.0}), line_cloud({0.0}), pt({0.0}), 1.0), InvalidInput);
}

// The canonical two-point pair {0, 1} and {0, 1 + 1/i}: at r = 1 the second
// set loses its far point, at r = 1 + 1/i both are seen.
TEST(RelativeHausdorffTest, MonotonicityFailsByFactorIPlusOne) {
  for (int i : {1, 2, 10, 100}) {
    const double q = 1.0 + 1.0 / i;
    const PointCloud a = line_cloud({0.0, 1.0});
    const PointCloud b = line_cloud({0.0, q});
    const double small = relative_hausdorff(a, b, pt({0.0}), 1.0).value;
    const double large = relative_hausdorff(a, b, pt({0.0}), q).value;
    EXPECT_DOUBLE_EQ(small, 1.0);
    EXPECT_NEAR(large, 1.0 / (i + 1), 1e-15);
    EXPECT_NEAR(small / large, i + 1.0, 1e-12);
  }
}

TEST(WalkupWetsTest, ConvergesAsOneOverIR) {
  for (int i : {1, 3, 50}) {
    for (double r : {2.0, 4.0}) {
      const double v = walkup_wets(line_cloud({0.0, 1.0 + 1.0 / i}), line_cloud({0.0, 1.0}), pt({0.0}), r).value;
      EXPECT_NEAR(v, 1.0 / (i * r), 1e-15);
    }
  }
}

// Property: every distance matches a direct double-loop evaluation.
TEST(SetDistancePropertyTest, MatchesBruteForce) {
  Gen g(101);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = g.integer(1, 3);
    const auto pa = g.points(n, g.integer(1, 12), 2.0);
    const auto pb = g.points(n, g.integer(1, 12), 2.0);
    const PointCloud a = PointCloud::from_points(pa);
    const PointCloud b = PointCloud::from_points(pb);
    const Point x = g.point(n, 1.5);
    const double r = g.log_uniform(0.3, 3.0);
    const auto la = in_ball(pa, x, r);
    const auto lb = in_ball(pb, x, r);

    EXPECT_NEAR(excess(a, b), brute_excess(pa, pb), 1e-12);
    const double ab = brute_excess(la, pb) / r;
    const double ba = brute_excess(lb, pa) / r;
    EXPECT_NEAR(relative_excess(a, b, x, r).value, ab, 1e-12);
    EXPECT_NEAR(walkup_wets(a, b, x, r).value, std::max(ab, ba), 1e-12);
    if (!la.empty() && !lb.empty()) {
      const double want = std::max(brute_excess(la, lb), brute_excess(lb, la)) / r;
      EXPECT_NEAR(relative_hausdorff(a, b, x, r).value, want, 1e-12);
    }
  }
}

// Property: triangle inequality and monotonicity of the plain excess.
TEST(SetDistancePropertyTest, ExcessTriangleAndMonotonicity) {
  Gen g(202);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = g.integer(1, 3);
    const auto pa = g.points(n, g.integer(1, 8), 2.0);
    const auto pb = g.points(n, g.integer(1, 8), 2.0);
    const auto pc = g.points(n, g.integer(1, 8), 2.0);
    const PointCloud a = PointCloud::from_points(pa);
    const PointCloud b = PointCloud::from_points(pb);
    const PointCloud c = PointCloud::from_points(pc);
    EXPECT_LE(excess(a, c), excess(a, b) + excess(b, c) + 1e-12);
    // Enlarging B can only shrink ex(A, B).
    auto pbc = pb;
    pbc.insert(pbc.end(), pc.begin(), pc.end());
    EXPECT_LE(excess(a, PointCloud::from_points(pbc)), excess(a, b) + 1e-12);
  }
}

// Property: for x in B, ex_{x,r}(A, C) <= ex_{x,r}(A, B) + 2 ex_{x,2r}(B, C);
// the Walkup-Wets distance is scale and translation invariant.
TEST(SetDistancePropertyTest, QuasitriangleAndInvariance) {
  Gen g(303);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = g.integer(1, 3);
    const auto pa = g.points(n, g.integer(1, 8), 2.0);
    const auto pb = g.points(n, g.integer(1, 8), 2.0);
    const auto pc = g.points(n, g.integer(1, 8), 2.0);
    const Point x = pb.front();
    const double r = g.log_uniform(0.3, 3.0);
    const PointCloud a = PointCloud::from_points(pa);
    const PointCloud b = PointCloud::from_points(pb);
    const PointCloud c = PointCloud::from_points(pc);
    EXPECT_LE(relative_excess(a, c, x, r).value,
              relative_excess(a, b, x, r).value + 2.0 * relative_excess(b, c, x, 2 * r).value + 1e-12);

    const double s = g.log_uniform(0.1, 10.0);
    const Point y = g.point(n, 5.0);
    const double base = walkup_wets(a, c, x, r).value;
    // transform maps p to (p - y) s.
    const PointCloud ta = transform(a, y, 1.0 / s);
    const PointCloud tc = transform(c, y, 1.0 / s);
    EXPECT_NEAR(walkup_wets(ta, tc, (x - y) * s, s * r).value, base, 1e-9);
  }
}

TEST(VerifyRowsTest, ExactPropertyRowsPass) {
  for (const auto& row : exact_property_rows(7, 200)) {
    EXPECT_TRUE(row.passed()) << row.property << " " << row.repro.dump();
  }
}

}  // namespace
}  // namespace lsa
