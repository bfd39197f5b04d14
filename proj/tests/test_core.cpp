#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "shiftgen/core.hpp"
#include "shiftgen/errors.hpp"

using namespace shiftgen;

TEST(Norms, SupEuclideanL1) {
  const std::vector<double> v{3.0, -4.0};
  EXPECT_DOUBLE_EQ(norm_value(v, NormKind::sup), 4.0);
  EXPECT_DOUBLE_EQ(norm_value(v, NormKind::euclidean), 5.0);
  EXPECT_DOUBLE_EQ(norm_value(v, NormKind::l1), 7.0);
}

TEST(Norms, RejectNonFinite) {
  const std::vector<double> v{1.0, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(norm_value(v, NormKind::sup), ConfigError);
}

TEST(Norms, NamesRoundTrip) {
  for (auto k : {NormKind::sup, NormKind::euclidean, NormKind::l1}) EXPECT_EQ(norm_kind_from_string(to_string(k)), k);
  EXPECT_THROW(norm_kind_from_string("l7"), ConfigError);
}

TEST(FieldConfig, Validation) {
  FieldConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FieldConfig{};
  c.dim_l = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PointSet, OrderAndDuplicates) {
  const PointSet p = PointSet::line({0.0, 1.0, 0.0, 2.0, 1.0});
  EXPECT_EQ(p.size(), 5u);
  EXPECT_DOUBLE_EQ(p[3][0], 2.0);
  EXPECT_EQ(duplicate_indices(p), (std::vector<std::size_t>{2, 4}));
}

TEST(PointSet, ShiftPreservesOrder) {
  const PointSet p(2, {0.0, 0.0, 1.0, 2.0});
  const std::vector<double> h{1.0, -1.0};
  const PointSet s = shift_points(p, h);
  EXPECT_EQ(s, PointSet(2, {-1.0, 1.0, 0.0, 3.0}));
}

TEST(PointSet, UnionMaps) {
  const auto u = union_sites(PointSet::line({0.0, 1.0}), PointSet::line({1.0, 2.0, 0.0}));
  EXPECT_EQ(u.sites, PointSet::line({0.0, 1.0, 2.0}));
  EXPECT_EQ(u.from_a, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(u.from_b, (std::vector<std::size_t>{1, 2, 0}));
}

TEST(SiteTable, FindAndAdd) {
  SiteTable t(1);
  const std::vector<double> a{0.5}, b{1.5};
  EXPECT_EQ(t.add(a), 0u);
  EXPECT_EQ(t.add(b), 1u);
  EXPECT_EQ(t.add(a), 0u);
  EXPECT_EQ(t.find(b), 1);
  const std::vector<double> c{9.0};
  EXPECT_EQ(t.find(c), -1);
}

TEST(PathSample, MakeChecksShapeAndFiniteness) {
  Values v(2, 1);
  v << 1.0, 2.0;
  EXPECT_NO_THROW(PathSample::make(PointSet::line({0.0, 1.0}), v));
  EXPECT_THROW(PathSample::make(PointSet::line({0.0}), v), ConfigError);
  v(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(PathSample::make(PointSet::line({0.0, 1.0}), v), ConfigError);
}

TEST(Window, VolumeAndLattice) {
  const Window w{2.0, 2};
  EXPECT_DOUBLE_EQ(w.volume(), 16.0);
  const std::vector<double> in{2.0, -2.0}, out{2.1, 0.0};
  EXPECT_TRUE(w.contains(in));
  EXPECT_FALSE(w.contains(out));
  EXPECT_EQ(integer_lattice(Window{1.5, 1}), PointSet::line({-1.0, 0.0, 1.0}));
  EXPECT_EQ(integer_lattice(w).size(), 25u);
  EXPECT_THROW((Window{-1.0, 1}).validate(), ConfigError);
}
