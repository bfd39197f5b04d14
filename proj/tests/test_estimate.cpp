#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "oracles.hpp"
#include "shiftgen/estimate.hpp"

using namespace shiftgen;

TEST(MCEstimate, MatchesTwoPassFormulas) {
  const std::vector<double> xs{1.0, 4.0, 2.5, -3.0, 7.25};
  MCEstimate e;
  for (double x : xs) e.add(x);
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(e.mean(), mean, 1e-14);
  EXPECT_NEAR(e.variance(), ss / 4.0, 1e-12);
  EXPECT_NEAR(e.standard_error(), std::sqrt(ss / 4.0 / 5.0), 1e-12);
}

TEST(MCEstimate, MergeEqualsSequential) {
  MCEstimate all, a, b;
  for (int i = 0; i < 100; ++i) {
    const double x = std::sin(i * 0.37) * 3.0 + i * 0.01;
    all.add(x);
    (i < 37 ? a : b).add(x);
  }
  a.merge(b);
  EXPECT_EQ(a.count(), all.count());
  EXPECT_NEAR(a.mean(), all.mean(), 1e-13);
  EXPECT_NEAR(a.m2(), all.m2(), 1e-10);
  MCEstimate empty;
  empty.merge(all);
  EXPECT_EQ(empty.mean(), all.mean());
}

TEST(MCEstimate, SmallSamples) {
  MCEstimate e;
  EXPECT_EQ(e.standard_error(), 0.0);
  e.add(3.0);
  EXPECT_EQ(e.variance(), 0.0);
  EXPECT_EQ(e.standard_error(), 0.0);
}

TEST(Normal, CriticalValuesAndPValues) {
  EXPECT_NEAR(normal_critical_value(0.95), 1.959963984540054, 1e-9);
  EXPECT_NEAR(normal_critical_value(0.99), 2.5758293035489, 1e-9);
  EXPECT_NEAR(two_sided_p_value(1.959963984540054), 0.05, 1e-9);
  EXPECT_NEAR(two_sided_p_value(0.0), 1.0, 1e-12);
  const auto ci = MCEstimate(1.0, 99.0 * 4.0 * 100.0, 100).confidence_interval(0.95);
  EXPECT_NEAR(ci.second - 1.0, 1.959963984540054 * 2.0, 1e-6);
}

TEST(RunReplicates, IndependentOfWorkerCount) {
  auto kernel = [](RngStream& r) { return std::exp(r.normal()); };
  RunOptions o;
  o.master_seed = 9;
  o.chunk = 100;
  const auto one = run_replicates(5000, o, kernel);
  o.workers = 4;
  const auto four = run_replicates(5000, o, kernel);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(one.mean()), std::bit_cast<std::uint64_t>(four.mean()));
  EXPECT_EQ(std::bit_cast<std::uint64_t>(one.m2()), std::bit_cast<std::uint64_t>(four.m2()));
}

TEST(RunReplicates, LognormalMean) {
  RunOptions o;
  o.master_seed = 3;
  const auto e = run_replicates(200000, o, [](RngStream& r) { return std::exp(r.normal() - 0.5); });
  EXPECT_NEAR(e.mean(), 1.0, 4.0 * e.standard_error());
}

TEST(ForEachChunk, RethrowsLowestChunkError) {
  RunOptions o;
  o.chunk = 10;
  o.workers = 3;
  try {
    for_each_chunk(100, o, [](std::size_t c, std::size_t, std::size_t) {
      if (c == 2 || c == 7) throw std::runtime_error("chunk " + std::to_string(c));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "chunk 2");
  }
}
