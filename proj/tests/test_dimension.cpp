#include <gtest/gtest.h>

#include <cmath>

#include "lsa/dimension.hpp"
#include "test_support.hpp"

namespace lsa {
namespace {

using testing::Gen;
using testing::pt;

// Oracle: minimum cover by brute force over center subsets.
std::size_t brute_cover(const PointCloud& c, double s) {
  const std::size_t n = c.size();
  std::size_t best = n;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto k = std::size_t(__builtin_popcount(mask));
    if (k >= best) continue;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      bool hit = false;
      for (std::size_t j = 0; j < n && !hit; ++j) {
        hit = (mask >> j & 1u) && (Point(c.point(i)) - Point(c.point(j))).norm() <= s;
      }
      ok = hit;
    }
    if (ok) best = k;
  }
  return best;
}

TEST(CoveringTest, HandCounts) {
  const PointCloud c(1, {0.0, 1.0, 2.0, 3.0});
  EXPECT_EQ(covering_number_exact(c, 1.0), 2u);
  EXPECT_EQ(covering_number_exact(c, 0.5), 4u);
  EXPECT_EQ(covering_number_greedy(c, 10.0).count_greedy, 1u);
  EXPECT_EQ(greedy_count(c, 0.5), 4u);
  std::vector<double> many(21);
  for (int i = 0; i < 21; ++i) many[i] = i;
  EXPECT_THROW(covering_number_exact(PointCloud(1, many), 1.0), InvalidInput);
}

// Property: exact matches the brute oracle, exact <= greedy, and greedy
// centers are s-separated so greedy(s) <= exact(s / 2).
TEST(CoveringPropertyTest, GreedyBracketsExact) {
  Gen g(31);
  for (int trial = 0; trial < 30; ++trial) {
    const PointCloud c = PointCloud::from_points(g.points(2, g.integer(1, 11), 1.0));
    const double s = g.log_uniform(0.1, 1.5);
    const std::size_t ex = covering_number_exact(c, s);
    EXPECT_EQ(ex, brute_cover(c, s)) << trial;
    const CoveringReport gr = covering_number_greedy(c, s);
    EXPECT_LE(ex, gr.count_greedy) << trial;
    EXPECT_LE(gr.count_greedy, covering_number_exact(c, s / 2)) << trial;
    EXPECT_EQ(gr.centers.size(), gr.count_greedy);
    EXPECT_EQ(greedy_count(c, s), gr.count_greedy);
  }
}

TEST(MinkowskiTest, SegmentCloudHasSlopeOne) {
  std::vector<Point> pts;
  for (int i = 0; i <= 4096; ++i) pts.push_back(pt({i / 4096.0, 0.0}));
  const auto e = minkowski_estimate(PointCloud::from_points(pts), 1.0 / 16, 1.0 / 512);
  EXPECT_NEAR(e.slope, 1.0, 0.05);
  EXPECT_EQ(e.scales.size(), e.counts.size());
  EXPECT_GE(e.scales.size(), 4u);
  EXPECT_THROW(minkowski_estimate(PointCloud::from_points(pts), 1.0 / 16, 1.0 / 32), InvalidInput);
}

TEST(MinkowskiTest, SquareAndKochSamplers) {
  const auto sq = make_sampler({{"spec", "box"}, {"params", {{"n", 2}, {"m", 2}}}});
  EXPECT_NEAR(minkowski_estimate(*sq, Ball(pt({0.5, 0.5}), 0.75), 1.0 / 16, 1.0 / 128).slope, 2.0, 0.1);
  const auto koch = make_sampler({{"spec", "koch"}, {"params", {{"angle_deg", 60.0}, {"level", 6}}}});
  const double d = std::log(4.0) / std::log(3.0);
  // Triadic scales match the construction; dyadic ones oscillate more.
  const Ball w(pt({0.5, 0.0}), 0.75);
  EXPECT_NEAR(minkowski_estimate(*koch, w, 1.0 / 9, std::pow(3.0, -5), 1.0 / 3).slope, d, 0.06);
  EXPECT_NEAR(minkowski_estimate(*koch, w, 1.0 / 8, 1.0 / 256, 0.5).slope, d, 0.1);
}

TEST(LemmaTest, LambdaFormulaAndPreconditions) {
  const CoveringProfile p{1.0, 4.0, 0.5};
  EXPECT_DOUBLE_EQ(lemma_lambda(p, 0.1), 0.1 * (2.0 + 2.0 * 4.0 * 1.1));
  const CoveringProfile q{2.0, 9.0, 0.5};
  EXPECT_DOUBLE_EQ(lemma_lambda(q, 0.05), 0.05 * (2.0 + 2.0 * 3.0 * 1.05));
  const auto line = make_sampler({{"spec", "line"}});
  // C^(1/alpha) delta = 4 * 0.2 > s0.
  EXPECT_THROW(verify_covering_lemma(*line, ModelClassId::grassmannian(2, 1), p, 0.2, {{pt({0.0, 0.0}), 1.0}}),
               InvalidInput);
}

TEST(LemmaTest, LinesPassEverywhere) {
  const auto g21 = ModelClassId::grassmannian(2, 1);
  const CoveringProfile prof = covering_profile(g21, 1);
  const auto line = make_sampler({{"spec", "line"}});
  std::vector<std::pair<Point, double>> samples;
  for (double x : {-0.5, 0.0, 0.7}) samples.emplace_back(pt({x, 0.0}), 0.5);
  const LemmaReport rep = verify_covering_lemma(*line, g21, prof, 0.05, samples);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.count("fail"), 0u);
  EXPECT_EQ(rep.bound, std::size_t(std::ceil(std::pow(0.05, -prof.alpha))));
}

// Oracle: the three admissibility conditions evaluated directly.
bool eps0_conditions(const CoveringProfile& p, double e) {
  const double k = std::pow(p.C, 1.0 / p.alpha);
  const double mu = 2.0 + 2.0 * k * (1.0 + 2.0 * e);
  return 2.0 * e * mu <= 0.5 && k * 2.0 * e <= p.s0 && std::log(mu) / std::log(1.0 / (2.0 * e)) <= 0.5;
}

TEST(Epsilon0Test, IsTheLargestAdmissibleValue) {
  for (const CoveringProfile& p : {CoveringProfile{1.0, 2.0, 0.5}, CoveringProfile{2.0, 9.0, 0.1},
                                   CoveringProfile{1.0, 1.0, 0.01}}) {
    const Epsilon0 e = solve_epsilon0(p);
    EXPECT_TRUE(eps0_conditions(p, e.eps0));
    EXPECT_FALSE(eps0_conditions(p, e.eps0 * (1.0 + 1e-9)));
    EXPECT_DOUBLE_EQ(e.C_prime, 2.0 * p.alpha * std::log(e.mu0));
  }
  EXPECT_THROW(solve_epsilon0(CoveringProfile{0.0, 1.0, 1.0}), InvalidInput);
}

TEST(DimBoundTest, InadmissibleEpsIsReported) {
  const CoveringProfile prof{1.0, 2.0, 0.5};
  const auto seg = make_sampler({{"spec", "segment"}});
  DimBoundQuery q;
  q.eps = 0.2;
  q.depth = 2;
  q.points = {pt({0.5, 0.0})};
  q.window = Ball(pt({0.5, 0.0}), 0.75);
  const DimBoundReport rep = dimension_bound_audit(*seg, ModelClassId::grassmannian(2, 1), prof, q);
  EXPECT_FALSE(rep.admissible);
  EXPECT_FALSE(rep.violation.empty());
  EXPECT_FALSE(rep.passed);
  q.eps = 0.6;
  EXPECT_THROW(dimension_bound_audit(*seg, ModelClassId::grassmannian(2, 1), prof, q), InvalidInput);
}

TEST(DimBoundTest, SegmentPassesAtEps0) {
  const CoveringProfile prof{1.0, 2.0, 0.5};
  const auto seg = make_sampler({{"spec", "segment"}});
  DimBoundQuery q;
  q.eps = solve_epsilon0(prof).eps0;
  q.r0 = 0.25;
  q.depth = 3;
  q.points = {pt({0.5, 0.0})};
  q.window = Ball(pt({0.5, 0.0}), 0.75);
  q.est_r_max = 1.0 / 64;
  q.est_r_min = 1.0 / 1024;
  const DimBoundReport rep = dimension_bound_audit(*seg, ModelClassId::grassmannian(2, 1), prof, q);
  EXPECT_TRUE(rep.admissible) << rep.violation;
  EXPECT_TRUE(rep.passed);
  EXPECT_NEAR(rep.estimate.slope, 1.0, 0.05);
}

}  // namespace
}  // namespace lsa
