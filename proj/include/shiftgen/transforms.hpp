#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string_view>

#include "shiftgen/estimate.hpp"
#include "shiftgen/functionals.hpp"
#include "shiftgen/sampler.hpp"

namespace shiftgen {

enum class TiltMode { exact, sir, weighted };

std::string_view to_string(TiltMode mode);
TiltMode tilt_mode_from_string(std::string_view name);

/// The local field Theta = Z / ||Z(0)|| under the measure weighted by ||Z(0)||^alpha.
///   exact:    ||Z(0)|| is deterministic, so the tilt is trivial and Theta = Z / ||Z(0)||.
///   sir:      draw `pool` base paths and resample one with probability prop. to ||Z_i(0)||^alpha.
///   weighted: emit Z / ||Z(0)|| with weight ||Z(0)||^alpha (weight 0 and zero values when
///             ||Z(0)|| = 0).
class TiltedSampler final : public FieldSampler {
 public:
  /// Without a mode, exact is used when the base has a deterministic origin norm, weighted
  /// otherwise. Requesting exact for a base without one is a ConfigError.
  explicit TiltedSampler(SamplerPtr base, std::optional<TiltMode> mode = std::nullopt, int pool = 64);

  TiltMode mode() const { return mode_; }
  int pool() const { return pool_; }
  const SamplerPtr& base() const { return base_; }

  std::unique_ptr<BoundField> bind(const PointSet& sites) const override;
  nlohmann::json describe() const override;
  std::optional<double> deterministic_origin_norm() const override;
  bool weighted() const override { return mode_ == TiltMode::weighted || base_->weighted(); }

 private:
  SamplerPtr base_;
  TiltMode mode_;
  int pool_;
};

/// R = U^(-1/alpha) with U uniform on (0, 1), so R > 1 and P(R > s) = s^(-alpha) for s >= 1.
class ParetoMultiplier {
 public:
  explicit ParetoMultiplier(double alpha);
  double operator()(RngStream& rng) const { return std::pow(rng.uniform_open(), -1.0 / alpha_); }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

/// Tail field Y = R Theta with R independent of Theta. The Pareto draw precedes the Theta draw.
class TailSampler final : public FieldSampler {
 public:
  explicit TailSampler(std::shared_ptr<const TiltedSampler> theta);

  const std::shared_ptr<const TiltedSampler>& theta() const { return theta_; }

  std::unique_ptr<BoundField> bind(const PointSet& sites) const override;
  nlohmann::json describe() const override;
  bool weighted() const override { return theta_->weighted(); }

 private:
  std::shared_ptr<const TiltedSampler> theta_;
};

enum class ShiftVariant { zn, zn_prime_finiteS, zn_boll3, zn_prime_boll3b, zn_second, cluster };

std::string_view to_string(ShiftVariant v);
ShiftVariant shift_variant_from_string(std::string_view name);
/// Variants built from the local field Theta rather than from Z itself.
bool uses_theta(ShiftVariant v);
/// Variants that need S over the window to be finite (checked by finite_s_diagnostic).
bool needs_finite_s(ShiftVariant v);

struct FiniteSDiagnostic {
  double excess = 0.0;  ///< weighted mean of (S_2m - S_m) / S_2m over pilot paths
  std::size_t n = 0;
  bool pass = false;    ///< excess < 1%
  nlohmann::json to_json() const;
};

/// Shift-randomized representors. Each draw samples N ~ gamma, snaps it to the quadrature
/// lattice, and evaluates one base realization jointly at the origin, the (shifted) quadrature
/// nodes and the shifted targets, so the normalizing integral and the output share a draw:
///   zn                ||Z(0)|| / (gamma(N) S(Z))^(1/alpha)        Z(t - N)
///   zn_prime_finiteS  1 / (gamma(N) S(Theta))^(1/alpha)           Theta(t - N)
///   zn_boll3          ||Z(0)|| / S_gamma(B^N Z)^(1/alpha)         Z(t - N)
///   zn_prime_boll3b   1 / S_gamma(B^N Theta)^(1/alpha)            Theta(t - N)
///   zn_second         1 / (int gamma 1{B^N Theta != 0})^(1/alpha) Theta(t - N)
///   cluster           gamma(N)^(-1/alpha)                         Q(t - N)
/// gamma is evaluated at the snapped shift. A zero normalizer raises PositivityViolation.
class ShiftTransform final : public FieldSampler {
 public:
  /// Theta variants wrap a base that is not already a TiltedSampler in one (default mode).
  ShiftTransform(SamplerPtr base, ShiftDensity gamma, QuadratureRule rule, ShiftVariant variant);

  ShiftVariant variant() const { return variant_; }
  const SamplerPtr& source() const { return source_; }
  const ShiftDensity& gamma() const { return gamma_; }
  const QuadratureRule& rule() const { return rule_; }

  std::unique_ptr<BoundField> bind(const PointSet& sites) const override;
  nlohmann::json describe() const override;
  bool weighted() const override { return source_->weighted(); }

  /// Runs finite_s_diagnostic on the source for variants that need it and throws ConfigError
  /// when it fails. Returns nullopt for other variants.
  std::optional<FiniteSDiagnostic> check_finite_s(std::size_t pilot_n, const RunOptions& opts) const;

 private:
  SamplerPtr source_;
  ShiftDensity gamma_;
  QuadratureRule rule_;
  ShiftVariant variant_;
};

/// Pilot comparison of S on the rule's window against S on the doubled window.
FiniteSDiagnostic finite_s_diagnostic(const FieldSampler& source, const QuadratureRule& rule, std::size_t pilot_n,
                                      const RunOptions& opts);

/// One draw of Theta at `sites` (the weight is stored when `weight` is given).
PathSample sample_theta(const PointSet& sites, const TiltedSampler& t, RngStream& rng, double* weight = nullptr);
/// One draw of Y = R Theta at `sites`.
PathSample sample_tail_Y(const PointSet& sites, const TailSampler& y, RngStream& rng, double* weight = nullptr);
/// One draw of the shift transform at `sites`.
PathSample transform_zn(const PointSet& sites, const ShiftTransform& t, RngStream& rng, double* weight = nullptr,
                        double* snap = nullptr);

}  // namespace shiftgen
