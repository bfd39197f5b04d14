#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "shiftgen/errors.hpp"
#include "shiftgen/gaussian_field.hpp"

using namespace shiftgen;

TEST(Variogram, FractionalForm) {
  const VariogramModel m{2.0, 0.25};
  const std::vector<double> h{3.0, 4.0};
  EXPECT_NEAR(m(h), 2.0 * std::sqrt(5.0), 1e-12);
  EXPECT_THROW((VariogramModel{1.0, 1.5}).validate(), ConfigError);
  EXPECT_THROW((VariogramModel{0.0, 0.5}).validate(), ConfigError);
}

TEST(Variogram, PinnedCovariance) {
  const VariogramModel m{1.0, 0.5};
  const std::vector<double> s{1.0}, t{3.0}, o{0.0};
  EXPECT_DOUBLE_EQ(cov_from_variogram(s, t, m), 1.0);  // (1 + 3 - 2) / 2
  EXPECT_DOUBLE_EQ(cov_from_variogram(s, o, m), 0.0);
  EXPECT_DOUBLE_EQ(cov_from_variogram(t, t, m), 3.0);
}

TEST(GaussianFactor, OriginAndDuplicates) {
  GaussianSampler g;
  const PointSet sites = PointSet::line({0.0, 1.0, 1.0, 2.0});
  GaussianFactor f(g, sites);
  EXPECT_EQ(f.distinct().size(), 2u);
  EXPECT_EQ(f.site_rows(), (std::vector<std::ptrdiff_t>{-1, 0, 0, 1}));
  auto rng = derive_rng_stream(1, 0, 0);
  Values v;
  f.sample(rng, 2, v);
  ASSERT_EQ(v.rows(), 4);
  ASSERT_EQ(v.cols(), 2);
  EXPECT_EQ(v(0, 0), 0.0);
  EXPECT_EQ(v(0, 1), 0.0);
  EXPECT_EQ(v(1, 0), v(2, 0));
  EXPECT_EQ(v(1, 1), v(2, 1));
}

TEST(GaussianFactor, EmpiricalCovariance) {
  GaussianSampler g;
  g.variogram = {1.5, 0.35};
  const PointSet sites = PointSet::line({0.5, 1.0, -2.0});
  GaussianFactor f(g, sites);
  const int n = 100000;
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  Values v;
  for (int r = 0; r < n; ++r) {
    auto rng = derive_rng_stream(5, 0, r);
    f.sample(rng, 1, v);
    const Eigen::Vector3d x(v(0, 0), v(1, 0), v(2, 0));
    acc += x * x.transpose();
  }
  acc /= n;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double c = cov_from_variogram(sites[i], sites[j], g.variogram);
      const double sd = std::sqrt((cov_from_variogram(sites[i], sites[i], g.variogram) *
                                       cov_from_variogram(sites[j], sites[j], g.variogram) +
                                   c * c) /
                                  n);
      EXPECT_NEAR(acc(i, j), c, 5.0 * sd) << i << "," << j;
    }
  }
}

TEST(GaussianExtension, JointCovarianceAcrossBlocks) {
  GaussianSampler g;
  g.variogram = {1.0, 0.5};
  auto base = std::make_shared<const GaussianFactor>(g, PointSet::line({1.0, 2.0}));
  const PointSet extra = PointSet::line({0.0, 2.0, 3.0});
  GaussianExtension ext(base, extra);
  const int n = 100000;
  double c13 = 0, c33 = 0, diff = 0;
  Values b, e;
  for (int r = 0; r < n; ++r) {
    auto rng = derive_rng_stream(8, 0, r);
    ext.sample(rng, 1, b, e);
    EXPECT_EQ(e(0, 0), 0.0);
    diff = std::max(diff, std::abs(e(1, 0) - b(1, 0)));
    c13 += b(0, 0) * e(2, 0);
    c33 += e(2, 0) * e(2, 0);
  }
  EXPECT_EQ(diff, 0.0);
  // Cov(W(1), W(3)) = (1 + 3 - 2) / 2 = 1, Var W(3) = 3
  EXPECT_NEAR(c13 / n, 1.0, 5.0 * std::sqrt((1.0 * 3.0 + 1.0) / n));
  EXPECT_NEAR(c33 / n, 3.0, 5.0 * std::sqrt(2.0 * 9.0 / n));
}

TEST(RobustCholesky, JitterRescuesSemidefinite) {
  Eigen::MatrixXd k(2, 2);
  k << 1.0, 1.0, 1.0, 1.0;
  const auto l = robust_cholesky(k, 1e-10);
  EXPECT_NEAR((l * l.transpose() - k).norm(), 0.0, 1e-6);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(robust_cholesky(bad, 1e-10), NumericalError);
}

TEST(SampleGaussian, ShapesFollowSites) {
  auto rng = derive_rng_stream(2, 0, 0);
  const auto p = sample_gaussian(PointSet::line({0.0, 0.25, 0.5}), GaussianSampler{}, 3, rng);
  EXPECT_EQ(p.values.rows(), 3);
  EXPECT_EQ(p.values.cols(), 3);
  EXPECT_TRUE((p.values.row(0).array() == 0.0).all());
}
