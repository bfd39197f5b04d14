#include "shiftgen/estimate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "shiftgen/errors.hpp"

namespace shiftgen {

void MCEstimate::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void MCEstimate::merge(const MCEstimate& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  m2_ += other.m2_ + delta * delta * (na * nb / n);
  n_ += other.n_;
}

double MCEstimate::variance() const { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

double MCEstimate::standard_error() const {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  return std::sqrt(m2_ / (n * (n - 1.0)));
}

std::pair<double, double> MCEstimate::confidence_interval(double level) const {
  const double half = normal_critical_value(level) * standard_error();
  return {mean_ - half, mean_ + half};
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
}

double two_sided_p_value(double z) {
  if (std::isnan(z)) return 1.0;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

void for_each_chunk(std::size_t n, const RunOptions& opts,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (opts.chunk == 0) throw ConfigError("chunk size must be positive");
  const std::size_t chunks = chunk_count(n, opts);
  if (chunks == 0) return;
  const std::size_t workers = std::clamp<std::size_t>(opts.workers, 1, chunks);

  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks || failed.load()) return;
      const std::size_t begin = c * opts.chunk;
      const std::size_t end = std::min(n, begin + opts.chunk);
      try {
        body(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
        failed.store(true);
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

MCEstimate run_replicates(std::size_t n, const RunOptions& opts,
                          const std::function<double(RngStream&)>& kernel) {
  std::vector<MCEstimate> parts(chunk_count(n, opts));
  for_each_chunk(n, opts, [&](std::size_t c, std::size_t begin, std::size_t end) {
    MCEstimate local;
    for (std::size_t r = begin; r < end; ++r) {
      RngStream rng = derive_rng_stream(opts.master_seed, opts.stream, r);
      local.add(kernel(rng));
    }
    parts[c] = local;
  });
  MCEstimate total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

}  // namespace shiftgen
