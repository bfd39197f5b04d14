#pragma once

#include <optional>
#include <vector>

#include "shiftgen/estimate.hpp"
#include "shiftgen/report.hpp"
#include "shiftgen/sampler.hpp"

namespace shiftgen {

struct DeHaanConfig {
  std::size_t max_terms = 500;
  double stop_quantile = 0.9999;
  /// Bound on sup over sites of ||Z||; estimated by a pilot run when absent.
  std::optional<double> sup_bound_estimate;
  std::size_t pilot_n = 10000;

  void validate() const;
};

struct DeHaanSample {
  PathSample path;
  double truncation_diag = 0.0;  ///< Gamma_last^(-1/alpha) * bound / min accumulated value
  std::size_t terms = 0;
  bool truncation_warning = false;  ///< max_terms reached with diag > 0.05
};

/// Empirical stop_quantile quantile of sup over `sites` of w^(1/alpha) ||Z|| from pilot draws.
double dehaan_pilot_bound(const FieldSampler& rep, const PointSet& sites, const DeHaanConfig& dcfg,
                          const RunOptions& opts);

/// X(t) = max_i Gamma_i^(-1/alpha) Z^(i)(t) componentwise, Gamma_i the arrival times of a unit
/// Poisson process. Weighted draws enter as w^(1/alpha) Z. Values must be nonnegative
/// (ContractError otherwise; wrap signed fields with SignedSplitField). dcfg must carry a bound.
DeHaanSample dehaan_sample(const BoundField& rep, const DeHaanConfig& dcfg, RngStream& rng);
DeHaanSample dehaan_sample(const PointSet& sites, const FieldSampler& rep, const DeHaanConfig& dcfg, RngStream& rng);

struct ExponentQuery {
  PointSet sites;
  std::vector<double> x;

  void validate() const;
};

struct ExponentResult {
  MCEstimate v;
  double fidi_cdf = 1.0;  ///< exp(-V)
};

/// Monte Carlo estimate of V = E[w max_i (||Z(t_i)|| / x_i)^alpha]. Requires n >= 1000.
ExponentResult exponent_estimate(const FieldSampler& rep, const ExponentQuery& q, std::size_t n, const RunOptions& opts);

/// Compares V for rep_a at `sites` (lane 1) against V for rep_b at shift_points(sites, -h)
/// (lane 2) with a Welch test.
IdentityReport stationarity_check(const FieldSampler& rep_a, const FieldSampler& rep_b, const PointSet& sites,
                                  std::span<const double> h, const std::vector<double>& x, std::size_t n,
                                  const RunOptions& opts, double confidence = 0.99);

}  // namespace shiftgen
