#include <gtest/gtest.h>

#include <cmath>

#include "lsa/dimension.hpp"
#include "lsa/model_classes.hpp"
#include "test_support.hpp"

namespace lsa {
namespace {

using testing::Gen;
using testing::pt;

const char* kClassTexts[] = {
    "G(2,1)",          "grassmannian(3,2)", "singleton(2)",     "minimal_cones_3_2",
    "y_cones_3_2",     "harmonic_2_2",      "harmonic_prime_2_2", "light_cone(4)",
    "uniform_support", "sphere_stack(3)",   "axes_union_2d",    "singular_parts(minimal_cones_3_2,G(3,2))",
};

TEST(ModelClassIdTest, TextRoundTrip) {
  for (const char* t : kClassTexts) {
    const ModelClassId c = ModelClassId::parse(t);
    EXPECT_EQ(ModelClassId::parse(c.to_string()), c) << t;
  }
  EXPECT_EQ(ModelClassId::parse("G(2,1)"), ModelClassId::grassmannian(2, 1));
  EXPECT_EQ(ModelClassId::parse("singleton(3)"), ModelClassId::grassmannian(3, 0));
  EXPECT_EQ(ModelClassId::parse("sphere_stack").n, 2);
}

TEST(ModelClassIdTest, RejectsMalformedText) {
  for (const char* t : {"G(2)", "G(2,3)", "nope", "harmonic_2_2(1)", "light_cone(3)", "sphere_stack(5)",
                        "singular_parts(G(2,1),G(3,2))", "G(2,1"}) {
    EXPECT_THROW(ModelClassId::parse(t), InvalidInput) << t;
  }
}

TEST(AnalyticAlphaTest, MatchesMemberDimension) {
  EXPECT_EQ(analytic_alpha(ModelClassId::parse("G(3,2)")), 2);
  EXPECT_EQ(analytic_alpha(ModelClassId::parse("singleton(2)")), 0);
  EXPECT_EQ(analytic_alpha(ModelClassId::parse("minimal_cones_3_2")), 2);
  EXPECT_EQ(analytic_alpha(ModelClassId::parse("harmonic_2_2")), 1);
  EXPECT_EQ(analytic_alpha(ModelClassId::parse("light_cone(4)")), 3);
  EXPECT_EQ(analytic_alpha(ModelClassId::parse("sphere_stack(3)")), 2);
  EXPECT_EQ(analytic_alpha(ModelClassId::parse("singular_parts(minimal_cones_3_2,G(3,2))")), 1);
}

// Oracle: a line through 0 along u is at distance |q - (q.u) u|; a plane
// with normal u is at distance |q.u|.
TEST(MemberDistanceTest, FlatsMatchProjectionFormula) {
  Gen g(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Point u2 = g.unit(2);
    const ModelMember line = make_member(ModelClassId::grassmannian(2, 1), 0, angles_of(u2));
    const Point q2 = g.point(2, 3.0);
    EXPECT_NEAR(member_distance(line, q2), (q2 - q2.dot(u2) * u2).norm(), 1e-9);

    const Point u3 = g.unit(3);
    const ModelMember plane = make_member(ModelClassId::grassmannian(3, 2), 0, angles_of(u3));
    const Point q3 = g.point(3, 3.0);
    EXPECT_NEAR(member_distance(plane, q3), std::abs(q3.dot(u3)), 1e-9);
  }
}

std::vector<ModelClassId> sampled_classes() {
  std::vector<ModelClassId> out;
  for (const char* t : {"G(2,1)", "G(3,2)", "y_cones_3_2", "minimal_cones_3_2", "harmonic_2_2",
                        "harmonic_prime_2_2", "axes_union_2d", "sphere_stack(2)"}) {
    out.push_back(ModelClassId::parse(t));
  }
  return out;
}

// Property: samples lie on the member, and the sample is an h-net of the
// member near any query point whose nearest member point is inside the ball.
TEST(MemberSamplingTest, SampleIsAnHNetOfTheMember) {
  Gen g(6);
  for (const auto& c : sampled_classes()) {
    const auto members = random_members(c, 6, 9);
    for (const auto& m : members) {
      const double h = c.n == 3 ? 0.05 : 0.01;
      const PointCloud s = sample_member(m, Ball(Point::Zero(c.n), 1.0), h);
      if (s.is_empty()) continue;
      for (std::size_t i = 0; i < s.size(); i += 7) {
        EXPECT_LE(member_distance(m, s.point(i)), 1e-9) << c.to_string();
      }
      for (int q = 0; q < 30; ++q) {
        const Point x = g.point(c.n, 0.6);
        const double d = member_distance(m, x);
        if (d > 0.3) continue;
        EXPECT_LE(nearest_distance_brute(s, x), d + h + 1e-9) << c.to_string();
      }
    }
  }
}

// Property: dilate_member(m, s) is s * m.
TEST(MemberDilationTest, ScalesDistances) {
  Gen g(7);
  for (const auto& c : sampled_classes()) {
    for (const auto& m : random_members(c, 5, 3)) {
      const double s = g.log_uniform(0.25, 4.0);
      const ModelMember ms = dilate_member(m, s);
      for (int q = 0; q < 10; ++q) {
        const Point x = g.point(c.n, 1.0);
        EXPECT_NEAR(member_distance(ms, s * x), s * member_distance(m, x), 1e-9) << c.to_string();
      }
    }
  }
}

TEST(RandomMembersTest, DeterministicPerSeed) {
  const auto c = ModelClassId::parse("harmonic_2_2");
  const auto a = random_members(c, 8, 42);
  const auto b = random_members(c, 8, 42);
  const auto d = random_members(c, 8, 43);
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].params, b[i].params);
  EXPECT_NE(a[0].params, d[0].params);
}

TEST(MemberJsonTest, RoundTrip) {
  for (const auto& m : random_members(ModelClassId::parse("y_cones_3_2"), 3, 1)) {
    const ModelMember back = member_from_json(to_json(m));
    EXPECT_EQ(back.cls, m.cls);
    EXPECT_EQ(back.params, m.params);
  }
}

TEST(CoveringProfileTest, SingletonHasUnitConstant) {
  const CoveringProfile p = covering_profile(ModelClassId::grassmannian(2, 0));
  EXPECT_EQ(p.alpha, 0.0);
  EXPECT_EQ(p.C, 1.0);
}

// Property: the fitted profile bounds fresh members (not used in the fit)
// on the fitting grid.
TEST(CoveringProfileTest, BoundsFreshLineMembers) {
  const auto c = ModelClassId::grassmannian(2, 1);
  const CoveringProfile p = covering_profile(c, 1);
  EXPECT_EQ(p.alpha, 1.0);
  // A diameter of B(0, r) needs about 2 / s balls of radius s r / 2 ... s r.
  EXPECT_GE(p.C, 1.0);
  EXPECT_LE(p.C, 5.0);
  const ProfileGrid grid = default_profile_grid(1);
  for (const auto& m : random_members(c, 10, 777)) {
    for (double s : grid.s) {
      for (double r : grid.r) {
        EXPECT_LE(double(member_covering_count(m, r, s)), p.C * std::pow(s, -p.alpha) + 1e-9);
      }
    }
  }
}

}  // namespace
}  // namespace lsa
