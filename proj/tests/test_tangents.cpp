#include <gtest/gtest.h>

#include <cmath>

#include "lsa/set_distance.hpp"
#include "lsa/tangents.hpp"
#include "test_support.hpp"

namespace lsa {
namespace {

using testing::pt;

PointCloud axis_line(int axis, double half_length, double h) {
  std::vector<Point> pts;
  for (double t = -half_length; t <= half_length; t += h) {
    Point p = Point::Zero(2);
    p[axis] = t;
    pts.push_back(p);
  }
  return PointCloud::from_points(pts, h);
}

TEST(BlowUpTest, CircleConvergesToItsTangentLine) {
  const auto circle = make_sampler({{"spec", "circle"}});
  const BlowupTrace tr = blow_up(BlowupSpec::tangent(circle, pt({1.0, 0.0}), Ladder::between(0.25, 1.0 / 256)));
  EXPECT_TRUE(tr.convergent);
  EXPECT_FALSE(tr.partial);
  // (A - x) / r near x = (1, 0) is within r / 2 of the vertical line on B(0, 1).
  const double r_last = tr.steps.back().r;
  const auto d = walkup_wets(tr.terminal(), axis_line(1, 8.0, 1.0 / 256), pt({0.0, 0.0}), 1.0);
  EXPECT_LE(d.value, r_last + d.sampling_slack);
  EXPECT_TRUE(tangent_membership(tr, ModelClassId::grassmannian(2, 1), 0.05));
}

TEST(BlowUpTest, CrossIsItsOwnBlowUp) {
  const auto cross = make_sampler({{"spec", "cross_2d"}});
  const BlowupTrace tr = blow_up(BlowupSpec::tangent(cross, pt({0.0, 0.0}), Ladder::between(1.0, 1.0 / 64)));
  EXPECT_TRUE(tr.convergent);
  for (const auto& row : tr.gaps) {
    for (const auto& g : row) EXPECT_LE(g.value, g.sampling_slack);
  }
  EXPECT_FALSE(tangent_membership(tr, ModelClassId::grassmannian(2, 1), 0.3));
  EXPECT_TRUE(tangent_membership(tr, ModelClassId::parse("harmonic_2_2"), 0.05));
}

TEST(BlowUpTest, SphereStackDoesNotConvergeOffDyadicScales) {
  const auto stack = make_sampler({{"spec", "sphere_stack"}, {"params", {{"n", 2}}}});
  // Ratio 3/4 is not a power of 2, so consecutive blow-ups differ.
  const BlowupTrace tr = blow_up(BlowupSpec::tangent(stack, pt({0.0, 0.0}), Ladder::between(1.0, 0.1, 0.75)));
  EXPECT_FALSE(tr.convergent);
  EXPECT_THROW(tangent_membership(tr, ModelClassId::grassmannian(2, 1), 0.1), InvalidInput);
}

TEST(DirectedBlowUpTest, DirectionsAreRecorded) {
  const auto axes = make_sampler({{"spec", "axes_union_2d"}});
  std::vector<std::pair<Point, double>> seq;
  for (int i = 1; i <= 6; ++i) seq.emplace_back(pt({1.0 / i, 0.0}), 1.0 / (i * i));
  const BlowupTrace tr = directed_blow_up(BlowupSpec::directed(axes, pt({0.0, 0.0}), seq));
  ASSERT_EQ(tr.steps.size(), 6u);
  for (int i = 1; i <= 6; ++i) {
    EXPECT_NEAR(tr.steps[i - 1].direction[0], double(i), 1e-12);
    EXPECT_NEAR(tr.steps[i - 1].direction[1], 0.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(tr.max_direction, 6.0);
  EXPECT_FALSE(tr.bounded);
}

// Bounded directions on a smooth curve: the terminal window equals the
// tangent line translated by -direction.
TEST(DirectedBlowUpTest, BoundedDirectionsTranslateTheTangent) {
  const auto circle = make_sampler({{"spec", "circle"}});
  std::vector<std::pair<Point, double>> seq;
  for (int i = 4; i <= 9; ++i) {
    const double r = std::ldexp(1.0, -i);
    seq.emplace_back(pt({std::cos(1.5 * r), std::sin(1.5 * r)}), r);
  }
  const BlowupTrace tr = directed_blow_up(BlowupSpec::directed(circle, pt({1.0, 0.0}), seq));
  EXPECT_TRUE(tr.bounded);
  ASSERT_FALSE(tr.translate_gaps.empty());
  for (const auto& g : tr.translate_gaps) EXPECT_LE(g.value, 2.0 * g.sampling_slack);
}

TEST(BlowUpTest, RejectsEmptySequences) {
  const auto circle = make_sampler({{"spec", "circle"}});
  BlowupSpec spec = BlowupSpec::tangent(circle, pt({1.0, 0.0}), Ladder::between(0.5, 0.25));
  spec.radii.clear();
  EXPECT_THROW(blow_up(spec), InvalidInput);
}

TEST(DichotomyTest, CrossIsOnTheTPerpBranch) {
  const auto cross = make_sampler({{"spec", "cross_2d"}});
  const auto res = dichotomy_check(*cross, pt({0.0, 0.0}), ModelClassId::grassmannian(2, 1),
                                   ModelClassId::parse("harmonic_2_2"), Ladder::between(0.5, 1.0 / 32));
  EXPECT_EQ(res.verdict, Dichotomy::kTperpBranch);
}

TEST(DichotomyTest, ParabolaIsOnTheTBranch) {
  const auto parabola = make_sampler({{"spec", "graph"}, {"params", {{"function", "parabola"}}}});
  const auto res = dichotomy_check(*parabola, pt({0.0, 0.0}), ModelClassId::grassmannian(2, 1),
                                   ModelClassId::parse("harmonic_2_2"), Ladder::between(0.125, 1.0 / 512));
  EXPECT_EQ(res.verdict, Dichotomy::kTBranch);
}

TEST(DichotomyTest, RejectsEmptyTail) {
  const auto cross = make_sampler({{"spec", "cross_2d"}});
  DichotomyOptions opt;
  opt.tail = 0;
  EXPECT_THROW(dichotomy_check(*cross, pt({0.0, 0.0}), ModelClassId::grassmannian(2, 1),
                               ModelClassId::parse("harmonic_2_2"), Ladder::between(0.5, 0.25), opt),
               InvalidInput);
}

}  // namespace
}  // namespace lsa
