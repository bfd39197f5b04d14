#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "shiftgen/rng.hpp"

namespace shiftgen {

/// Mergeable Monte Carlo accumulator (Welford updates, Chan et al. pairwise merge).
class MCEstimate {
 public:
  MCEstimate() = default;
  MCEstimate(double mean, double m2, std::size_t n) : mean_(mean), m2_(m2), n_(n) {}

  void add(double x);
  /// Combine with an estimate over disjoint samples. Merge order matters bitwise, so callers
  /// merge in a fixed order.
  void merge(const MCEstimate& other);

  double mean() const { return mean_; }
  double m2() const { return m2_; }
  std::size_t count() const { return n_; }
  /// Unbiased sample variance; 0 for n < 2.
  double variance() const;
  /// sqrt(m2 / (n (n - 1))); 0 for n < 2.
  double standard_error() const;
  /// Two-sided normal-approximation interval at `level`.
  std::pair<double, double> confidence_interval(double level) const;

 private:
  double mean_ = 0.0;
  double m2_ = 0.0;
  std::size_t n_ = 0;
};

/// Two-sided standard-normal critical value for confidence `level` in (0, 1).
double normal_critical_value(double level);
/// Two-sided p-value of a standard-normal statistic.
double two_sided_p_value(double z);

/// Seeding and scheduling for replicate loops.
struct RunOptions {
  std::uint64_t master_seed = 1;
  std::uint32_t stream = 0;  ///< logical lane, see derive_rng_stream
  std::size_t workers = 1;
  std::size_t chunk = 2048;  ///< replicates per scheduling unit; results never depend on workers

  RunOptions with_stream(std::uint32_t s) const {
    RunOptions o = *this;
    o.stream = s;
    return o;
  }
};

/// Runs `body(chunk_index, begin, end)` over fixed chunks of [0, n) on `workers` threads.
/// Chunk boundaries depend only on n and opts.chunk. The first exception (lowest chunk) is
/// rethrown after all workers stop.
void for_each_chunk(std::size_t n, const RunOptions& opts,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n, const RunOptions& opts) {
  return (n + opts.chunk - 1) / opts.chunk;
}

/// Estimate E[kernel] from n replicates; replicate r draws from
/// derive_rng_stream(seed, stream, r). Per-chunk estimates are merged in chunk order.
MCEstimate run_replicates(std::size_t n, const RunOptions& opts,
                          const std::function<double(RngStream&)>& kernel);

}  // namespace shiftgen
