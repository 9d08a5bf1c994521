#include <gtest/gtest.h>

#include <cmath>

#include "lsa/detection.hpp"
#include "test_support.hpp"

namespace lsa {
namespace {

using testing::pt;

DetectabilityParams synthetic() {
  DetectabilityParams p;
  p.t = ModelClassId::grassmannian(2, 1);
  p.s = ModelClassId::parse("harmonic_2_2");
  p.phi = 0.5;
  p.phi_table = {{0.5, 0.2}, {0.25, 0.1}, {0.125, 0.04}, {0.0625, 0.01}};
  p.phi_linear = 0.2;
  derive_thresholds(p);
  return p;
}

TEST(PhiAtTest, TableLookupAndExtrapolation) {
  const DetectabilityParams p = synthetic();
  EXPECT_DOUBLE_EQ(p.phi_at(0.25), 0.1);
  EXPECT_DOUBLE_EQ(p.phi_at(0.2), 0.1);  // nearest table scale at or above
  EXPECT_DOUBLE_EQ(p.phi_at(0.0625), 0.01);
  EXPECT_DOUBLE_EQ(p.phi_at(0.03), 0.2 * 0.03);  // linear below the table
  EXPECT_DOUBLE_EQ(p.phi_at(0.9), 0.2);           // table max above it
}

// The threshold chain: delta = phi/32, Phi(t) <= delta/4, eps = t delta/32,
// gamma = phi/8, Phi(t') <= gamma/4, beta = (t'/8) gamma, beta~ = min(beta/6, 1/2).
TEST(DeriveThresholdsTest, ChainRelationsHold) {
  const DetectabilityParams p = synthetic();
  EXPECT_DOUBLE_EQ(p.delta, 0.5 / 32);
  EXPECT_DOUBLE_EQ(p.gamma, 0.5 / 8);
  EXPECT_LE(p.phi_at(p.t_scale), p.delta / 4);
  EXPECT_LE(p.phi_at(p.t_prime), p.gamma / 4);
  EXPECT_DOUBLE_EQ(p.epsilon, p.t_scale * p.delta / 32);
  EXPECT_DOUBLE_EQ(p.beta, p.t_prime / 8 * p.gamma);
  EXPECT_DOUBLE_EQ(p.beta_tilde, std::min(p.beta / 6, 0.5));
  EXPECT_NO_THROW(p.validate());
}

TEST(DetectabilityParamsTest, JsonRoundTripAndValidation) {
  const DetectabilityParams p = synthetic();
  const DetectabilityParams q = DetectabilityParams::from_json(p.to_json());
  EXPECT_DOUBLE_EQ(q.beta_tilde, p.beta_tilde);
  EXPECT_EQ(q.phi_table, p.phi_table);
  nlohmann::json bad = p.to_json();
  bad["delta"] = 0.5;
  EXPECT_THROW(DetectabilityParams::from_json(bad), InvalidInput);
  bad = p.to_json();
  bad["epsilon"] = 1.0;
  EXPECT_THROW(DetectabilityParams::from_json(bad), InvalidInput);
  bad = p.to_json();
  bad.erase("phi");
  EXPECT_THROW(DetectabilityParams::from_json(bad), InvalidInput);
  DetectabilityParams z;
  z.phi = 1.5;
  EXPECT_THROW(derive_thresholds(z), InvalidInput);
}

// The cross is the worst harmonic member for lines: phi ~ sqrt(2)/2.
TEST(CalibrationTest, CrossHarmonicAgainstLines) {
  const auto T = ModelClassId::grassmannian(2, 1);
  const auto S = ModelClassId::parse("harmonic_2_2");
  const auto members = random_members(S, 12, 1);
  const DetectabilityParams p = calibrate_detectability(T, S, members);
  EXPECT_NEAR(p.phi, std::sqrt(0.5), 0.01);
  EXPECT_DOUBLE_EQ(p.t_scale, 1.0 / 64);
  EXPECT_DOUBLE_EQ(p.t_prime, 1.0 / 16);
  EXPECT_NEAR(p.beta_tilde, (1.0 / 16) / 8 * (p.phi / 8) / 6, 1e-15);
  EXPECT_NO_THROW(p.validate());
  // The fit is empirical: it holds on the calibration sample only.
  EXPECT_LE(detectability_audit(p, members), 0.0);
}

TEST(CalibrationTest, RejectsForeignMembers) {
  const auto T = ModelClassId::grassmannian(2, 1);
  const auto S = ModelClassId::parse("harmonic_2_2");
  EXPECT_THROW(calibrate_detectability(T, S, random_members(T, 2, 1)), InvalidInput);
  EXPECT_THROW(calibrate_detectability(T, S, {}), InvalidInput);
  EXPECT_THROW(calibrate_detectability(ModelClassId::grassmannian(3, 2), S, random_members(S, 2, 1)),
               InvalidInput);
}

class CrossClassifyTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto S = ModelClassId::parse("harmonic_2_2");
    params_ = new DetectabilityParams(
        calibrate_detectability(ModelClassId::grassmannian(2, 1), S, random_members(S, 12, 1)));
  }
  static void TearDownTestSuite() { delete params_; }
  static DetectabilityParams* params_;
};
DetectabilityParams* CrossClassifyTest::params_ = nullptr;

TEST_F(CrossClassifyTest, OriginSingularArmsFlat) {
  const auto cross = make_sampler({{"spec", "cross_2d"}});
  ClassifyOptions opt;
  opt.approx.tolerance = 1.0 / 32;
  const Ladder l = Ladder::between(0.5, 0.5 / 64);
  const Classification o = classify_point(*cross, pt({0.0, 0.0}), *params_, l, opt);
  EXPECT_EQ(o.label, PointLabel::kSingular);
  EXPECT_GE(o.min_lower, params_->beta_tilde);
  const Classification a = classify_point(*cross, pt({0.5, 0.0}), *params_, l, opt);
  EXPECT_EQ(a.label, PointLabel::kFlat);
  EXPECT_LT(a.min_lower, params_->beta_tilde);
}

TEST_F(CrossClassifyTest, DecomposeSplitsTheGrid) {
  const auto cross = make_sampler({{"spec", "cross_2d"}});
  ClassifyOptions opt;
  opt.approx.tolerance = 1.0 / 32;
  const std::vector<Point> grid = {pt({0.0, 0.0}), pt({0.3, 0.0}), pt({0.0, -0.6}), pt({1.0, 1.0})};
  const Decomposition d = decompose(*cross, grid, *params_, Ladder::between(0.5, 0.5 / 64), opt);
  ASSERT_EQ(d.points.size(), 4u);
  // (1, 1) is off the set: the hypothesis check records an error for it.
  EXPECT_FALSE(d.errors[3].empty());
  EXPECT_EQ(d.singular.size(), 1u);
  EXPECT_EQ(d.flat.size(), 2u);
}

TEST_F(CrossClassifyTest, ImprovingStepOnALineAndTheCross) {
  const auto line = make_sampler({{"spec", "line"}});
  const ImprovingStep ok = improving_step_check(*line, pt({0.0, 0.0}), 0.5, 0.1, 0.05, *params_);
  EXPECT_TRUE(ok.hypothesis);
  EXPECT_EQ(ok.status, "holds");
  const auto cross = make_sampler({{"spec", "cross_2d"}});
  const ImprovingStep un = improving_step_check(*cross, pt({0.0, 0.0}), 0.5, 0.1, 0.05, *params_);
  EXPECT_EQ(un.status, "hypothesis-unmet");
  EXPECT_THROW(improving_step_check(*line, pt({0.0, 0.0}), 0.5, params_->phi, 0.05, *params_), InvalidInput);
}

TEST(SingularUnilateralTest, RejectsEmptyAndForeignInput) {
  const auto cross = make_sampler({{"spec", "cross_2d"}});
  const Ladder l = Ladder::between(0.5, 0.125);
  EXPECT_THROW(singular_unilateral(*cross, {}, ModelClassId::grassmannian(2, 0), l), InvalidInput);
  EXPECT_THROW(singular_unilateral(*cross, {pt({0.0, 0.0})}, ModelClassId::parse("harmonic_2_2"), l),
               InvalidInput);
}

}  // namespace
}  // namespace lsa
