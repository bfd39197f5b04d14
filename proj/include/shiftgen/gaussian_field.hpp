#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "shiftgen/core.hpp"
#include "shiftgen/rng.hpp"

namespace shiftgen {

/// Fractional variogram nu(h) = theta * |h|_2^(2 H).
struct VariogramModel {
  double theta = 1.0;
  double hurst = 0.5;

  void validate() const;
  double operator()(std::span<const double> h) const;
  bool operator==(const VariogramModel&) const = default;
};

/// Cov(W(s), W(t)) = (nu(s) + nu(t) - nu(s - t)) / 2 for the field pinned at W(0) = 0.
double cov_from_variogram(std::span<const double> s, std::span<const double> t, const VariogramModel& model);

struct GaussianSampler {
  VariogramModel variogram;
  double jitter = 1e-10;  ///< diagonal regularization, escalated x10 up to 3 times on failure
};

/// Cholesky factor of the pinned covariance at a site set. Sites at the origin are excluded from
/// the matrix and always receive 0; repeated sites share one row.
class GaussianFactor {
 public:
  GaussianFactor(const GaussianSampler& sampler, const PointSet& sites);

  const PointSet& sites() const { return sites_; }
  const GaussianSampler& sampler() const { return sampler_; }
  /// Distinct non-origin sites, i.e. the rows of the factor.
  const PointSet& distinct() const { return distinct_; }
  const Eigen::MatrixXd& lower() const { return lower_; }

  /// One draw of `components` independent copies; out is resized to sites().size() x components.
  void sample(RngStream& rng, int components, Values& out) const;

  /// Maps each site to its distinct row, -1 for the origin.
  const std::vector<std::ptrdiff_t>& site_rows() const { return site_rows_; }

 private:
  GaussianSampler sampler_;
  PointSet sites_;
  PointSet distinct_;
  std::vector<std::ptrdiff_t> site_rows_;
  Eigen::MatrixXd lower_;
};

/// Joint sampling at a factored base set plus extra sites, via the block Cholesky update
/// L = [[L_b, 0], [C, L_e]] with C = K_eb L_b^{-T} and L_e L_e^T = K_ee - C C^T.
class GaussianExtension {
 public:
  GaussianExtension(std::shared_ptr<const GaussianFactor> base, const PointSet& extra);

  /// Fills base_out (base sites) and extra_out (extra sites) from a single joint draw.
  void sample(RngStream& rng, int components, Values& base_out, Values& extra_out) const;

 private:
  std::shared_ptr<const GaussianFactor> base_;
  PointSet extra_;
  // extra site -> (kind, row): kind 0 origin, 1 base distinct row, 2 new row
  std::vector<std::pair<int, std::ptrdiff_t>> extra_rows_;
  Eigen::MatrixXd cross_;  // C
  Eigen::MatrixXd lower_;  // L_e
};

/// One joint draw of the d-dimensional pinned Gaussian field at `sites`.
PathSample sample_gaussian(const PointSet& sites, const GaussianSampler& sampler, int dim_d, RngStream& rng);

/// Lower Cholesky factor of `cov` with jitter escalation; throws NumericalError on failure.
Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& cov, double jitter);

}  // namespace shiftgen
