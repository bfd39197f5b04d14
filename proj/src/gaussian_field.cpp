#include "shiftgen/gaussian_field.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "shiftgen/errors.hpp"

namespace shiftgen {

void VariogramModel::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("variogram theta must be positive");
  if (!(hurst > 0.0 && hurst <= 1.0)) throw ConfigError("variogram hurst must lie in (0, 1]");
}

double VariogramModel::operator()(std::span<const double> h) const {
  double sq = 0.0;
  for (double x : h) sq += x * x;
  if (sq == 0.0) return 0.0;
  if (hurst == 0.5) return theta * std::sqrt(sq);
  if (hurst == 1.0) return theta * sq;
  return theta * std::pow(sq, hurst);
}

double cov_from_variogram(std::span<const double> s, std::span<const double> t, const VariogramModel& model) {
  if (s.size() != t.size()) throw ConfigError("cov_from_variogram: dimension mismatch");
  std::vector<double> diff(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) diff[k] = s[k] - t[k];
  return 0.5 * (model(s) + model(t) - model(diff));
}

Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& cov, double jitter) {
  const Eigen::Index n = cov.rows();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  double j = jitter;
  for (int attempt = 0; attempt <= 3; ++attempt, j *= 10.0) {
    Eigen::MatrixXd a = cov;
    a.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  std::ostringstream msg;
  msg << "Cholesky factorization failed after jitter escalation to " << j / 10.0 << " on a " << n << "x" << n
      << " covariance matrix (minimum eigenvalue estimate " << eig.eigenvalues().minCoeff() << ")";
  throw NumericalError(msg.str());
}

namespace {

Eigen::MatrixXd covariance(const PointSet& a, const PointSet& b, const VariogramModel& model) {
  Eigen::MatrixXd k(a.size(), b.size());
  std::vector<double> nu_a(a.size()), nu_b(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) nu_a[i] = model(a[i]);
  for (std::size_t j = 0; j < b.size(); ++j) nu_b[j] = model(b[j]);
  std::vector<double> diff(static_cast<std::size_t>(a.dim()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      auto p = a[i];
      auto q = b[j];
      for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = p[c] - q[c];
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.5 * (nu_a[i] + nu_b[j] - model(diff));
    }
  }
  return k;
}

}  // namespace

GaussianFactor::GaussianFactor(const GaussianSampler& sampler, const PointSet& sites)
    : sampler_(sampler), sites_(sites), distinct_(sites.dim()) {
  sampler_.variogram.validate();
  if (sampler_.jitter < 0.0) throw ConfigError("jitter must be nonnegative");
  SiteTable table(sites.dim());
  site_rows_.resize(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    site_rows_[i] = is_origin(sites[i]) ? -1 : static_cast<std::ptrdiff_t>(table.add(sites[i]));
  }
  distinct_ = table.sites();
  const Eigen::MatrixXd k = covariance(distinct_, distinct_, sampler_.variogram);
  lower_ = robust_cholesky(k, sampler_.jitter);
}

void GaussianFactor::sample(RngStream& rng, int components, Values& out) const {
  const auto m = static_cast<Eigen::Index>(distinct_.size());
  out.resize(static_cast<Eigen::Index>(sites_.size()), components);
  Eigen::VectorXd z(m);
  Eigen::VectorXd w(m);
  for (int c = 0; c < components; ++c) {
    for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
    w.noalias() = lower_.triangularView<Eigen::Lower>() * z;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const auto r = site_rows_[i];
      out(static_cast<Eigen::Index>(i), c) = r < 0 ? 0.0 : w(r);
    }
  }
}

GaussianExtension::GaussianExtension(std::shared_ptr<const GaussianFactor> base, const PointSet& extra)
    : base_(std::move(base)), extra_(extra) {
  const auto& distinct = base_->distinct();
  SiteTable base_table(distinct.dim());
  base_table.add(distinct);
  SiteTable fresh(distinct.dim());
  extra_rows_.resize(extra.size());
  for (std::size_t i = 0; i < extra.size(); ++i) {
    if (is_origin(extra[i])) {
      extra_rows_[i] = {0, -1};
    } else if (auto r = base_table.find(extra[i]); r >= 0) {
      extra_rows_[i] = {1, r};
    } else {
      extra_rows_[i] = {2, static_cast<std::ptrdiff_t>(fresh.add(extra[i]))};
    }
  }
  const PointSet& added = fresh.sites();
  if (added.empty()) return;
  const auto& model = base_->sampler().variogram;
  const Eigen::MatrixXd k_be = covariance(distinct, added, model);
  const Eigen::MatrixXd k_ee = covariance(added, added, model);
  if (distinct.empty()) {
    cross_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(added.size()), 0);
    lower_ = robust_cholesky(k_ee, base_->sampler().jitter);
    return;
  }
  const Eigen::MatrixXd x = base_->lower().triangularView<Eigen::Lower>().solve(k_be);
  cross_ = x.transpose();
  Eigen::MatrixXd schur = k_ee - cross_ * cross_.transpose();
  schur = 0.5 * (schur + schur.transpose());
  lower_ = robust_cholesky(schur, base_->sampler().jitter);
}

void GaussianExtension::sample(RngStream& rng, int components, Values& base_out, Values& extra_out) const {
  const auto& distinct = base_->distinct();
  const auto& rows = base_->site_rows();
  const auto m = static_cast<Eigen::Index>(distinct.size());
  const auto e = lower_.rows();
  base_out.resize(static_cast<Eigen::Index>(base_->sites().size()), components);
  extra_out.resize(static_cast<Eigen::Index>(extra_.size()), components);
  Eigen::VectorXd zb(m), wb(m), ze(e), we(e);
  for (int c = 0; c < components; ++c) {
    for (Eigen::Index i = 0; i < m; ++i) zb(i) = rng.normal();
    for (Eigen::Index i = 0; i < e; ++i) ze(i) = rng.normal();
    wb.noalias() = base_->lower().triangularView<Eigen::Lower>() * zb;
    if (e > 0) {
      we.noalias() = lower_.triangularView<Eigen::Lower>() * ze;
      if (m > 0) we.noalias() += cross_ * zb;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      base_out(static_cast<Eigen::Index>(i), c) = rows[i] < 0 ? 0.0 : wb(rows[i]);
    }
    for (std::size_t i = 0; i < extra_rows_.size(); ++i) {
      const auto [kind, r] = extra_rows_[i];
      extra_out(static_cast<Eigen::Index>(i), c) = kind == 0 ? 0.0 : (kind == 1 ? wb(r) : we(r));
    }
  }
}

PathSample sample_gaussian(const PointSet& sites, const GaussianSampler& sampler, int dim_d, RngStream& rng) {
  if (dim_d < 1) throw ConfigError("sample_gaussian: dim_d must be >= 1");
  GaussianFactor factor(sampler, sites);
  Values v;
  factor.sample(rng, dim_d, v);
  return PathSample::make(sites, std::move(v));
}

}  // namespace shiftgen
