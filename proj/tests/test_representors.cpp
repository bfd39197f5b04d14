#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "shiftgen/errors.hpp"
#include "shiftgen/representors.hpp"

using namespace shiftgen;

namespace {

GaussianSampler br_gauss(double theta) {
  GaussianSampler g;
  g.variogram = {theta, 0.5};
  return g;
}

}  // namespace

TEST(BrownResnick, OriginIsOneOnEveryDraw) {
  FieldConfig cfg;
  cfg.dim_d = 2;
  auto br = std::make_shared<BrownResnick>(cfg, br_gauss(2.0));
  EXPECT_EQ(br->deterministic_origin_norm(), 1.0);
  const PointSet sites = PointSet::line({0.0, 1.0, -0.5});
  auto bound = br->bind(sites);
  Draw d;
  for (int r = 0; r < 200; ++r) {
    auto rng = derive_rng_stream(1, 0, r);
    bound->sample(rng, d);
    EXPECT_EQ(d.values(0, 0), 1.0);
    EXPECT_EQ(d.values(0, 1), 1.0);
    EXPECT_GT(d.values.minCoeff(), 0.0);
    EXPECT_EQ(d.weight, 1.0);
  }
}

TEST(BrownResnick, UnitMarginsAwayFromOrigin) {
  FieldConfig cfg;
  const PointSet sites = PointSet::line({0.5, 1.0, 2.0});
  const auto g = br_gauss(1.0);
  std::vector<MCEstimate> est(3);
  for (int r = 0; r < 100000; ++r) {
    auto rng = derive_rng_stream(4, 0, r);
    const auto p = br_sample(sites, g, cfg, rng);
    for (int i = 0; i < 3; ++i) est[i].add(p.values(i, 0));
  }
  for (const auto& e : est) EXPECT_NEAR(e.mean(), 1.0, 4.0 * e.standard_error());
}

TEST(BrownResnick, ExtendedDrawIsJoint) {
  FieldConfig cfg;
  auto br = std::make_shared<BrownResnick>(cfg, br_gauss(1.0));
  auto bound = br->bind(PointSet::line({0.0, 1.0}));
  Draw d;
  auto rng = derive_rng_stream(3, 0, 0);
  bound->sample_extended(PointSet::line({1.0, 0.0, 2.0}), rng, d);
  ASSERT_EQ(d.values.rows(), 5);
  EXPECT_EQ(d.values(2, 0), d.values(1, 0));
  EXPECT_EQ(d.values(3, 0), 1.0);
}

TEST(ConstantField, AllOnes) {
  FieldConfig cfg;
  cfg.dim_d = 3;
  auto c = std::make_shared<ConstantField>(cfg);
  auto rng = derive_rng_stream(1, 0, 0);
  const auto d = c->sample(PointSet::line({-3.0, 7.0}), rng);
  EXPECT_TRUE((d.values.array() == 1.0).all());
}

TEST(ClusterProfile, RejectsUnnormalizedByDefault) {
  FieldConfig cfg;
  ProfileSpec s;
  s.shape = ProfileShape::gaussian_pdf;
  s.param = 1.0;
  s.scale = 3.0;
  EXPECT_THROW(ClusterProfile(cfg, s), ConfigError);
  s.allow_unnormalized = true;
  EXPECT_NEAR(ClusterProfile(cfg, s).normalization_integral(), 3.0, 1e-9);
}

TEST(ClusterProfile, UnitDensitiesAreNormalizedForAlphaOne) {
  FieldConfig cfg;
  for (auto shape : {ProfileShape::gaussian_pdf, ProfileShape::triangle, ProfileShape::indicator_box}) {
    ProfileSpec s;
    s.shape = shape;
    s.param = 1.7;
    EXPECT_NO_THROW(ClusterProfile(cfg, s)) << to_string(shape);
  }
}

TEST(ClusterProfile, NormalizeMatchesClosedForm) {
  // alpha = 2: integral of phi_sigma^2 is 1 / (2 sigma sqrt(pi)), so c = sqrt(2 sigma sqrt(pi)).
  FieldConfig cfg;
  cfg.alpha = 2.0;
  ProfileSpec s;
  s.param = 0.8;
  s.normalize = true;
  ClusterProfile q(cfg, s);
  const double c = std::sqrt(2.0 * 0.8 * std::sqrt(std::numbers::pi));
  const std::vector<double> origin{0.0};
  EXPECT_NEAR(q.component_value(origin), c / (0.8 * std::sqrt(2.0 * std::numbers::pi)), 1e-9);
  EXPECT_NEAR(q.normalization_integral(), 1.0, 1e-9);
}

TEST(ClusterProfile, TwoDimensionalProduct) {
  FieldConfig cfg;
  cfg.dim_l = 2;
  cfg.dim_d = 2;
  cfg.norm = NormKind::euclidean;
  ProfileSpec s;
  s.shape = ProfileShape::triangle;
  s.param = 2.0;
  s.normalize = true;
  ClusterProfile q(cfg, s);
  // integral of c sqrt(2) tri(x) tri(y) is c sqrt(2)
  const std::vector<double> origin{0.0, 0.0};
  EXPECT_NEAR(q.component_value(origin), (1.0 / std::sqrt(2.0)) * 0.25, 1e-9);
}

TEST(SignedSplit, PositiveAndNegativeParts) {
  Values v(2, 2);
  v << 1.5, -2.0, 0.0, 3.0;
  const Values s = signed_split(v);
  ASSERT_EQ(s.cols(), 4);
  EXPECT_EQ(s(0, 0), 1.5);
  EXPECT_EQ(s(0, 1), 0.0);
  EXPECT_EQ(s(0, 2), 0.0);
  EXPECT_EQ(s(0, 3), 2.0);
  EXPECT_EQ(s(1, 2), 3.0);
}

TEST(ValidateRepresentor, BrownResnickPasses) {
  FieldConfig cfg;
  auto br = std::make_shared<BrownResnick>(cfg, br_gauss(1.0));
  RunOptions o;
  o.master_seed = 2;
  const auto r = validate_representor(*br, 5000, integer_lattice(Window{3.0, 1}), o);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.positive_draws, r.draws);
  EXPECT_EQ(r.margin.standard_error(), 0.0);
}

TEST(ValidateRepresentor, MisnormalizedProfileFailsMargin) {
  FieldConfig cfg;
  ProfileSpec s;
  s.param = 1.0;
  auto q = std::make_shared<ClusterProfile>(cfg, s);
  const auto r = validate_representor(*q, 1000, integer_lattice(Window{2.0, 1}), RunOptions{});
  EXPECT_FALSE(r.margin_pass);
  EXPECT_TRUE(r.positivity_pass);
  EXPECT_EQ(r.to_json().at("verdict"), "fail");
}

TEST(ValidateRepresentor, NeedsEnoughDraws) {
  auto c = std::make_shared<ConstantField>(FieldConfig{});
  EXPECT_THROW(validate_representor(*c, 10, PointSet::line({0.0}), RunOptions{}), ConfigError);
}

TEST(FieldSampler, StackOwnedSamplerIsAContractError) {
  ConstantField c(FieldConfig{});
  EXPECT_THROW(c.bind(PointSet::line({0.0})), ContractError);
}
