#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace shiftgen {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// A counter-based random stream. Counter words 1..3 identify the stream, word 0 is the block
/// index within it, so distinct (stream, replicate) pairs can never overlap.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t key, std::uint32_t stream, std::uint64_t replicate);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Standard normal (Box-Muller; the second variate is cached).
  double normal();
  /// Unit exponential.
  double exponential();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int next_ = 4;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// Stream for replicate `replicate_index` of logical stream `stream_index` under `master_seed`.
/// Same triple -> same stream; distinct triples -> non-overlapping counter ranges.
RngStream derive_rng_stream(std::uint64_t master_seed, std::uint32_t stream_index,
                            std::uint64_t replicate_index);

}  // namespace shiftgen
