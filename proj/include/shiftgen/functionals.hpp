#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "shiftgen/core.hpp"
#include "shiftgen/estimate.hpp"
#include "shiftgen/rng.hpp"

namespace shiftgen {

/// Midpoint rule on W_m with a regular grid of spacing `step`. 2m / step must be an integer.
/// Node k on each axis is (step / 2)(2k + 1 - C) for C cells, so the origin is a node iff C is
/// odd and integer multiples of `step` map nodes onto nodes exactly (for dyadic steps).
class QuadratureRule {
 public:
  QuadratureRule(Window window, double step);

  /// Rule with `cells` cells per axis of width `step`, centred at the origin.
  static QuadratureRule centered(int cells, double step, int dim);

  const Window& window() const { return window_; }
  double step() const { return step_; }
  int cells() const { return cells_; }
  const PointSet& nodes() const { return nodes_; }
  double weight() const { return weight_; }
  std::size_t size() const { return nodes_.size(); }
  bool origin_is_node() const { return cells_ % 2 == 1; }

  /// Rule on the (approximately) doubled window whose nodes contain these nodes.
  QuadratureRule doubled() const;
  /// True when every coordinate of h is an integer multiple of step().
  bool on_lattice(std::span<const double> h) const;

  nlohmann::json to_json() const;

 private:
  Window window_;
  double step_;
  int cells_;
  double weight_;
  PointSet nodes_;
};

/// Shift density gamma on R^l.
class ShiftDensity {
 public:
  enum class Kind { gaussian, uniform_window };

  /// Product of centred normal densities with standard deviation sigma.
  static ShiftDensity gaussian(double sigma, int dim);
  /// Uniform on W_m. Not strictly positive on R^l, so it needs allow_nonpositive.
  static ShiftDensity uniform_window(double half_width, int dim, bool allow_nonpositive);

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  int dim() const { return dim_; }

  double pdf(std::span<const double> t) const;
  /// Per-coordinate inverse CDF of open uniforms.
  std::vector<double> sample(RngStream& rng) const;

  nlohmann::json to_json() const;

 private:
  ShiftDensity(Kind kind, double param, int dim) : kind_(kind), param_(param), dim_(dim) {}

  Kind kind_;
  double param_;
  int dim_;
};

ShiftDensity shift_density_from_json(const nlohmann::json& j, int dim);

/// sum_k w_k gamma(t_k) ||path(t_k)||^alpha (gamma = 1 when absent). Path sites must equal the
/// rule's nodes exactly.
double integral_S(const PathSample& path, const QuadratureRule& rule, const FieldConfig& cfg,
                  const ShiftDensity* gamma = nullptr);
/// Quadrature of 1{||path(t)|| > 1}.
double sojourn_B(const PathSample& path, const QuadratureRule& rule, const FieldConfig& cfg);

/// Uniform-sampling estimator lambda(W_m) / n sum_j W(t_j), t_j uniform on the window.
MCEstimate mc_integral(const std::function<double(std::span<const double>)>& integrand, const Window& window,
                       std::size_t n, RngStream& rng);
/// Same estimator with point j drawn from derive_rng_stream(seed, stream, j), so the result
/// does not depend on the worker count.
MCEstimate mc_integral(const std::function<double(std::span<const double>)>& integrand, const Window& window,
                       std::size_t n, const RunOptions& opts);

/// A functional of a path evaluated through finitely many sites. degree() is the homogeneity
/// degree, or nullopt for non-homogeneous built-ins (capped, site thresholds).
class Functional {
 public:
  virtual ~Functional() = default;

  const FieldConfig& config() const { return cfg_; }
  const PointSet& sites() const { return sites_; }
  virtual std::optional<double> degree() const = 0;
  virtual bool bounded() const = 0;
  virtual nlohmann::json descriptor() const = 0;

  /// rows[i] is the row of `values` holding sites()[i].
  virtual double eval(const Values& values, std::span<const Eigen::Index> rows) const = 0;

  /// Evaluate on a path that contains every required site (ContractError otherwise).
  double operator()(const PathSample& path) const;
  /// Evaluate on values whose rows follow sites() exactly.
  double eval_aligned(const Values& values) const;

 protected:
  Functional(FieldConfig cfg, PointSet sites) : cfg_(cfg), sites_(std::move(sites)) {}

  double norm_at(const Values& values, Eigen::Index row) const { return row_norm(values, row, cfg_.norm); }
  double norm_alpha(const Values& values, Eigen::Index row) const;

  FieldConfig cfg_;
  PointSet sites_;
};

using FunctionalPtr = std::shared_ptr<const Functional>;

/// Builds a built-in functional from its descriptor. Known kinds:
///   weighted_max{sites, coeffs}, weighted_sum{sites, coeffs}, ratio{site, sites, weights},
///   s_gamma_quadrature{rule{half_width, step}, gamma?}, indicator_s_gamma{inner, s_gamma, a},
///   times_s_gamma{inner, s_gamma}, over_s_gamma{inner, s_gamma}, bounded_zero_hom{s, u},
///   threshold{site | of, level}, capped{site, cap}, constant{value}.
/// Unknown kinds or malformed parameters raise ConfigError.
FunctionalPtr builtin_functional(const nlohmann::json& descriptor, const FieldConfig& cfg);

/// Rows of `path` holding `sites`, or ContractError naming the first missing site.
std::vector<Eigen::Index> locate_sites(const PointSet& path_sites, const PointSet& sites);

}  // namespace shiftgen
