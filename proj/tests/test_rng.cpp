#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <set>

#include "shiftgen/rng.hpp"

using namespace shiftgen;

TEST(Philox, DeterministicBlock) {
  const auto a = philox4x32_10({1, 2, 3, 4}, {5, 6});
  const auto b = philox4x32_10({1, 2, 3, 4}, {5, 6});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, philox4x32_10({2, 2, 3, 4}, {5, 6}));
  EXPECT_NE(a, philox4x32_10({1, 2, 3, 4}, {5, 7}));
}

TEST(RngStream, SameTripleSameDraws) {
  auto a = derive_rng_stream(42, 0, 0);
  auto b = derive_rng_stream(42, 0, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform(), y = b.uniform();
    EXPECT_EQ(std::bit_cast<std::uint64_t>(x), std::bit_cast<std::uint64_t>(y));
  }
}

TEST(RngStream, DistinctReplicatesDiffer) {
  auto a = derive_rng_stream(42, 0, 0);
  auto b = derive_rng_stream(42, 0, 1);
  auto c = derive_rng_stream(42, 1, 0);
  auto d = derive_rng_stream(43, 0, 0);
  int same_b = 0, same_c = 0, same_d = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    same_b += x == b();
    same_c += x == c();
    same_d += x == d();
  }
  EXPECT_LT(same_b, 3);
  EXPECT_LT(same_c, 3);
  EXPECT_LT(same_d, 3);
}

TEST(RngStream, UniformRanges) {
  auto r = derive_rng_stream(7, 0, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double v = r.uniform_open();
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(RngStream, MomentsOfNormalAndExponential) {
  auto r = derive_rng_stream(11, 2, 5);
  const int n = 200000;
  double s1 = 0, s2 = 0, e1 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
    e1 += r.exponential();
  }
  // 5 standard errors on each moment
  EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(e1 / n, 1.0, 5.0 / std::sqrt(n));
}

TEST(RngStream, ManyStreamsFirstWordsDistinct) {
  std::set<std::uint32_t> seen;
  for (std::uint64_t rep = 0; rep < 2000; ++rep) {
    auto r = derive_rng_stream(1, 0, rep);
    seen.insert(r());
  }
  EXPECT_GT(seen.size(), 1995u);
}
