#include <gtest/gtest.h>

#include <cmath>

#include "shiftgen/errors.hpp"
#include "shiftgen/representors.hpp"
#include "shiftgen/transforms.hpp"

using namespace shiftgen;

namespace {

/// Z(t) = E^(1 + |t|) with E unit exponential: ||Z(0)|| is random and Theta(1) = E^1 under the
/// tilted law, where E is size-biased (Gamma(2, 1)), so E Theta(1) = 2. `zero_origin` makes
/// Z(0) = 0 on every draw instead.
class PowerField final : public FieldSampler {
 public:
  explicit PowerField(bool zero_origin = false) : FieldSampler(FieldConfig{}), zero_(zero_origin) {}

  std::unique_ptr<BoundField> bind(const PointSet& sites) const override {
    return std::make_unique<Bound>(shared_from_this(), sites, zero_);
  }
  nlohmann::json describe() const override { return {{"kind", "power_test_field"}}; }

 private:
  class Bound final : public BoundField {
   public:
    Bound(std::shared_ptr<const FieldSampler> o, PointSet s, bool zero) : BoundField(std::move(o), std::move(s)), zero_(zero) {}
    void sample(RngStream& rng, Draw& out) const override {
      const double e = rng.exponential();
      out.values.resize(static_cast<Eigen::Index>(sites_.size()), 1);
      for (std::size_t i = 0; i < sites_.size(); ++i) {
        const double t = std::abs(sites_[i][0]);
        out.values(static_cast<Eigen::Index>(i), 0) = (zero_ && t == 0.0) ? 0.0 : std::pow(e, 1.0 + t);
      }
      out.weight = 1.0;
      out.snap = 0.0;
    }

   private:
    bool zero_;
  };

  bool zero_;
};

GaussianSampler br_gauss(double theta) {
  GaussianSampler g;
  g.variogram = {theta, 0.5};
  return g;
}

MCEstimate weighted_mean_at(const FieldSampler& s, const PointSet& sites, std::size_t row, std::size_t n,
                            std::uint64_t seed) {
  auto bound = s.bind(sites);
  MCEstimate e;
  Draw d;
  for (std::size_t r = 0; r < n; ++r) {
    auto rng = derive_rng_stream(seed, 0, r);
    bound->sample(rng, d);
    e.add(d.weight * d.values(static_cast<Eigen::Index>(row), 0));
  }
  return e;
}

}  // namespace

TEST(TiltedSampler, DefaultModes) {
  auto br = std::make_shared<BrownResnick>(FieldConfig{}, br_gauss(1.0));
  EXPECT_EQ(TiltedSampler(br).mode(), TiltMode::exact);
  auto pf = std::make_shared<PowerField>();
  EXPECT_EQ(TiltedSampler(pf).mode(), TiltMode::weighted);
  EXPECT_THROW(TiltedSampler(pf, TiltMode::exact), ConfigError);
  EXPECT_THROW(tilt_mode_from_string("bogus"), ConfigError);
}

TEST(TiltedSampler, ExactModeOnBrownResnickIsIdentity) {
  auto br = std::make_shared<BrownResnick>(FieldConfig{}, br_gauss(1.0));
  auto tilt = std::make_shared<TiltedSampler>(br);
  const PointSet sites = PointSet::line({0.5, 1.0});
  auto a = derive_rng_stream(3, 0, 0);
  auto b = derive_rng_stream(3, 0, 0);
  const auto theta = sample_theta(sites, *tilt, a);
  const auto z = br_sample(sites, br->gaussian(), br->config(), b);
  EXPECT_TRUE(theta.values.isApprox(z.values, 1e-14));
}

TEST(TiltedSampler, SizeBiasedExpectation) {
  const PointSet sites = PointSet::line({1.0});
  auto pf = std::make_shared<PowerField>();
  const auto w = weighted_mean_at(*std::make_shared<TiltedSampler>(pf, TiltMode::weighted), sites, 0, 100000, 5);
  EXPECT_NEAR(w.mean(), 2.0, 4.0 * w.standard_error());
  const auto s = weighted_mean_at(*std::make_shared<TiltedSampler>(pf, TiltMode::sir, 256), sites, 0, 20000, 6);
  // SIR with a finite pool is biased by O(1 / pool)
  EXPECT_NEAR(s.mean(), 2.0, 4.0 * s.standard_error() + 0.02);
}

TEST(TiltedSampler, OriginIsUnitNorm) {
  auto pf = std::make_shared<PowerField>();
  auto t = std::make_shared<TiltedSampler>(pf, TiltMode::sir, 8);
  auto rng = derive_rng_stream(1, 0, 0);
  const auto p = sample_theta(PointSet::line({2.0, 0.0}), *t, rng);
  EXPECT_NEAR(p.values(1, 0), 1.0, 1e-15);
}

TEST(TiltedSampler, DegenerateOrigin) {
  auto pf = std::make_shared<PowerField>(true);
  auto sir = std::make_shared<TiltedSampler>(pf, TiltMode::sir, 4);
  auto rng = derive_rng_stream(1, 0, 0);
  EXPECT_THROW(sample_theta(PointSet::line({1.0}), *sir, rng), DegenerateTilting);
  auto weighted = std::make_shared<TiltedSampler>(pf, TiltMode::weighted);
  double w = -1.0;
  const auto p = sample_theta(PointSet::line({1.0}), *weighted, rng, &w);
  EXPECT_EQ(w, 0.0);
  EXPECT_EQ(p.values(0, 0), 0.0);
}

TEST(Pareto, TailLaw) {
  ParetoMultiplier r(1.5);
  int above = 0;
  const int n = 100000;
  double min_r = 1e300;
  for (int i = 0; i < n; ++i) {
    auto rng = derive_rng_stream(2, 0, i);
    const double x = r(rng);
    min_r = std::min(min_r, x);
    above += x > 2.0;
  }
  const double p = std::pow(2.0, -1.5);
  EXPECT_GT(min_r, 1.0);
  EXPECT_NEAR(static_cast<double>(above) / n, p, 5.0 * std::sqrt(p * (1 - p) / n));
  EXPECT_THROW(ParetoMultiplier(0.0), ConfigError);
}

TEST(TailSampler, OriginNormIsPareto) {
  auto br = std::make_shared<BrownResnick>(FieldConfig{}, br_gauss(1.0));
  auto tail = std::make_shared<TailSampler>(std::make_shared<TiltedSampler>(br));
  int above = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    auto rng = derive_rng_stream(9, 0, i);
    const auto y = sample_tail_Y(PointSet::line({0.0}), *tail, rng);
    EXPECT_GT(y.values(0, 0), 1.0);
    above += y.values(0, 0) > 4.0;
  }
  EXPECT_NEAR(static_cast<double>(above) / n, 0.25, 5.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST(ShiftVariant, Names) {
  for (auto v : {ShiftVariant::zn, ShiftVariant::zn_prime_finiteS, ShiftVariant::zn_boll3,
                 ShiftVariant::zn_prime_boll3b, ShiftVariant::zn_second, ShiftVariant::cluster}) {
    EXPECT_EQ(shift_variant_from_string(to_string(v)), v);
  }
  EXPECT_THROW(shift_variant_from_string("zn_third"), ConfigError);
  EXPECT_TRUE(needs_finite_s(ShiftVariant::zn));
  EXPECT_FALSE(needs_finite_s(ShiftVariant::zn_boll3));
  EXPECT_TRUE(uses_theta(ShiftVariant::zn_second));
  EXPECT_FALSE(uses_theta(ShiftVariant::zn));
}

TEST(ShiftTransform, ClusterVariantNeedsProfile) {
  auto br = std::make_shared<BrownResnick>(FieldConfig{}, br_gauss(1.0));
  EXPECT_THROW(ShiftTransform(br, ShiftDensity::gaussian(4.0, 1), QuadratureRule(Window{8.125, 1}, 0.25),
                              ShiftVariant::cluster),
               ConfigError);
}

TEST(ShiftTransform, UnitMarginAndPositiveS) {
  const FieldConfig cfg;
  auto br = std::make_shared<BrownResnick>(cfg, br_gauss(4.0));
  const QuadratureRule rule(Window{8.125, 1}, 0.25);
  for (auto v : {ShiftVariant::zn, ShiftVariant::zn_prime_finiteS, ShiftVariant::zn_prime_boll3b,
                 ShiftVariant::zn_second}) {
    auto t = std::make_shared<ShiftTransform>(br, ShiftDensity::gaussian(4.0, 1), rule, v);
    auto bound = t->bind(rule.nodes());
    const std::size_t origin = rule.size() / 2;
    MCEstimate margin;
    Draw d;
    std::size_t positive = 0;
    const std::size_t n = 20000;
    for (std::size_t r = 0; r < n; ++r) {
      auto rng = derive_rng_stream(17, 0, r);
      bound->sample(rng, d);
      margin.add(d.weight * d.values(static_cast<Eigen::Index>(origin), 0));
      const auto path = PathSample::make(rule.nodes(), d.values);
      positive += integral_S(path, rule, cfg) > 0.0;
    }
    EXPECT_EQ(positive, n) << to_string(v);
    EXPECT_NEAR(margin.mean(), 1.0, 4.0 * margin.standard_error() + 0.01) << to_string(v);
  }
}

TEST(ShiftTransform, ClusterMargin) {
  const FieldConfig cfg;
  ProfileSpec s;
  s.param = 1.0;
  auto q = std::make_shared<ClusterProfile>(cfg, s);
  auto t = std::make_shared<ShiftTransform>(q, ShiftDensity::gaussian(2.0, 1), QuadratureRule(Window{8.125, 1}, 0.25),
                                            ShiftVariant::cluster);
  auto bound = t->bind(PointSet::line({0.0}));
  MCEstimate m;
  Draw d;
  for (int r = 0; r < 50000; ++r) {
    auto rng = derive_rng_stream(4, 0, r);
    bound->sample(rng, d);
    m.add(d.values(0, 0));
    EXPECT_LE(d.snap, 0.125 + 1e-12);
  }
  EXPECT_NEAR(m.mean(), 1.0, 4.0 * m.standard_error() + 0.01);
}

TEST(ShiftTransform, FiniteSCheck) {
  const FieldConfig cfg;
  RunOptions o;
  o.stream = 3;
  const QuadratureRule rule(Window{8.125, 1}, 0.25);
  auto steep = std::make_shared<BrownResnick>(cfg, br_gauss(4.0));
  auto ok = std::make_shared<ShiftTransform>(steep, ShiftDensity::gaussian(4.0, 1), rule, ShiftVariant::zn_prime_finiteS);
  const auto diag = ok->check_finite_s(1000, o);
  ASSERT_TRUE(diag.has_value());
  EXPECT_TRUE(diag->pass);
  EXPECT_LT(diag->excess, 0.01);

  auto flat = std::make_shared<BrownResnick>(cfg, br_gauss(0.25));
  auto bad = std::make_shared<ShiftTransform>(flat, ShiftDensity::gaussian(4.0, 1), rule, ShiftVariant::zn_prime_finiteS);
  EXPECT_THROW(bad->check_finite_s(1000, o), ConfigError);

  auto other = std::make_shared<ShiftTransform>(flat, ShiftDensity::gaussian(4.0, 1), rule, ShiftVariant::zn_boll3);
  EXPECT_FALSE(other->check_finite_s(1000, o).has_value());
}

TEST(ShiftTransform, DrawsAreReproducible) {
  auto br = std::make_shared<BrownResnick>(FieldConfig{}, br_gauss(4.0));
  auto t = std::make_shared<ShiftTransform>(br, ShiftDensity::gaussian(4.0, 1), QuadratureRule(Window{8.125, 1}, 0.25),
                                            ShiftVariant::zn_boll3);
  auto a = derive_rng_stream(5, 0, 7);
  auto b = derive_rng_stream(5, 0, 7);
  const auto x = transform_zn(PointSet::line({0.0, 1.0}), *t, a);
  const auto y = transform_zn(PointSet::line({0.0, 1.0}), *t, b);
  EXPECT_EQ(x.values, y.values);
}
