#pragma once

#include <memory>
#include <string_view>

#include "shiftgen/estimate.hpp"
#include "shiftgen/gaussian_field.hpp"
#include "shiftgen/sampler.hpp"

namespace shiftgen {

/// Log-normal Brown-Resnick representor Z_j(t) = exp(W_j(t) - nu(t) / 2), with W pinned at the
/// origin so that Z(0) = (1, ..., 1) on every draw.
class BrownResnick final : public FieldSampler {
 public:
  BrownResnick(FieldConfig cfg, GaussianSampler gaussian);

  const GaussianSampler& gaussian() const { return gaussian_; }

  std::unique_ptr<BoundField> bind(const PointSet& sites) const override;
  nlohmann::json describe() const override;
  std::optional<double> deterministic_origin_norm() const override;

 private:
  GaussianSampler gaussian_;
};

/// Z(t) = (1, ..., 1) for all t.
class ConstantField final : public FieldSampler {
 public:
  explicit ConstantField(FieldConfig cfg) : FieldSampler(cfg) {}

  std::unique_ptr<BoundField> bind(const PointSet& sites) const override;
  nlohmann::json describe() const override;
  std::optional<double> deterministic_origin_norm() const override;
};

enum class ProfileShape { gaussian_pdf, triangle, indicator_box };

std::string_view to_string(ProfileShape shape);
ProfileShape profile_shape_from_string(std::string_view name);

/// Named built-in profile. `param` is sigma for gaussian_pdf and the width otherwise.
/// The profile is a product over coordinates of the one-dimensional density, times `scale`,
/// replicated across the d components.
struct ProfileSpec {
  ProfileShape shape = ProfileShape::gaussian_pdf;
  double param = 1.0;
  double scale = 1.0;
  bool normalize = false;           ///< rescale so that the integral of ||Q||^alpha is 1
  bool allow_unnormalized = false;  ///< skip the construction-time normalization check
};

/// Deterministic cluster profile Q with integral of ||Q(t)||^alpha over R^l equal to 1.
class ClusterProfile final : public FieldSampler {
 public:
  /// Throws ConfigError when the normalization integral misses 1 by more than 1e-6 (unless
  /// allow_unnormalized).
  ClusterProfile(FieldConfig cfg, ProfileSpec spec);

  const ProfileSpec& spec() const { return spec_; }
  /// Common component value c q(t).
  double component_value(std::span<const double> t) const;
  /// Integral of ||Q(t)||^alpha over R^l, by adaptive quadrature.
  double normalization_integral() const { return integral_; }

  std::unique_ptr<BoundField> bind(const PointSet& sites) const override;
  nlohmann::json describe() const override;

 private:
  double unit_integral_alpha() const;

  ProfileSpec spec_;
  double coefficient_ = 1.0;
  double integral_ = 1.0;
};

/// Splits each component into (max(z, 0), max(-z, 0)); output has 2d columns.
PathSample signed_split(const PathSample& path);
Values signed_split(const Values& values);

/// Adapter exposing the signed split of a base field as a nonnegative 2d-dimensional field
/// (sup norm), as needed by the de Haan construction for signed representors.
class SignedSplitField final : public FieldSampler {
 public:
  explicit SignedSplitField(SamplerPtr base);

  std::unique_ptr<BoundField> bind(const PointSet& sites) const override;
  nlohmann::json describe() const override;
  bool weighted() const override { return base_->weighted(); }

 private:
  SamplerPtr base_;
};

/// One Brown-Resnick draw at `sites`.
PathSample br_sample(const PointSet& sites, const GaussianSampler& g, const FieldConfig& cfg, RngStream& rng);
/// Q evaluated at `sites`.
PathSample cluster_sample(const PointSet& sites, const ClusterProfile& q);

struct ValidationReport {
  MCEstimate margin;  ///< estimate of E ||Z(0)||^alpha
  bool margin_pass = false;
  std::size_t draws = 0;
  std::size_t positive_draws = 0;  ///< draws with sup over the separant of ||Z|| > 0
  bool positivity_pass = false;

  bool pass() const { return margin_pass && positivity_pass; }
  nlohmann::json to_json() const;
};

/// Monte Carlo check of E ||Z(0)||^alpha = 1 (within 4 SE) and of a positive value somewhere on
/// the truncated separant for every draw with positive weight. Requires n >= 1000.
ValidationReport validate_representor(const FieldSampler& rep, std::size_t n, const PointSet& separant,
                                      const RunOptions& opts);

}  // namespace shiftgen
