#include "shiftgen/functionals.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "shiftgen/errors.hpp"
#include "shiftgen/json_io.hpp"

namespace shiftgen {

// ---------------------------------------------------------------------------------------------
// Quadrature and shift densities

namespace {

int cell_count(double width, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("quadrature step must be positive");
  const double ratio = width / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("window width 2m = " + std::to_string(width) + " is not an integer multiple of step " +
                      std::to_string(step));
  }
  return static_cast<int>(rounded);
}

}  // namespace

QuadratureRule::QuadratureRule(Window window, double step) : window_(window), step_(step) {
  window_.validate();
  cells_ = cell_count(2.0 * window_.half_width, step_);
  weight_ = std::pow(step_, window_.dim);
  const auto total = static_cast<std::size_t>(std::pow(static_cast<double>(cells_), window_.dim) + 0.5);
  if (total > 5'000'000) throw ConfigError("quadrature grid too large (" + std::to_string(total) + " nodes)");

  std::vector<double> axis(static_cast<std::size_t>(cells_));
  for (int k = 0; k < cells_; ++k) axis[static_cast<std::size_t>(k)] = 0.5 * step_ * (2 * k + 1 - cells_);
  nodes_ = PointSet(window_.dim);
  std::vector<int> idx(static_cast<std::size_t>(window_.dim), 0);
  std::vector<double> p(static_cast<std::size_t>(window_.dim));
  for (std::size_t n = 0; n < total; ++n) {
    for (int a = 0; a < window_.dim; ++a) p[static_cast<std::size_t>(a)] = axis[static_cast<std::size_t>(idx[a])];
    nodes_.push_back(p);
    for (int a = window_.dim - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < cells_) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
}

QuadratureRule QuadratureRule::centered(int cells, double step, int dim) {
  if (cells < 1) throw ConfigError("quadrature needs at least one cell");
  return QuadratureRule(Window{0.5 * cells * step, dim}, step);
}

QuadratureRule QuadratureRule::doubled() const {
  const int c = cells_ % 2 == 1 ? 2 * cells_ - 1 : 2 * cells_;
  return centered(c, step_, window_.dim);
}

bool QuadratureRule::on_lattice(std::span<const double> h) const {
  for (double x : h) {
    const double q = x / step_;
    if (q != std::round(q)) return false;
  }
  return true;
}

nlohmann::json QuadratureRule::to_json() const {
  return {{"half_width", window_.half_width}, {"step", step_}};
}

ShiftDensity ShiftDensity::gaussian(double sigma, int dim) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("gaussian shift density needs sigma > 0");
  if (dim < 1) throw ConfigError("shift density dimension must be >= 1");
  return ShiftDensity(Kind::gaussian, sigma, dim);
}

ShiftDensity ShiftDensity::uniform_window(double half_width, int dim, bool allow_nonpositive) {
  if (!allow_nonpositive) {
    throw ConfigError(
        "uniform_window shift density vanishes outside its window (gamma must be strictly positive); "
        "set allow_nonpositive to use it anyway");
  }
  if (!(half_width > 0.0)) throw ConfigError("uniform_window needs half_width > 0");
  return ShiftDensity(Kind::uniform_window, half_width, dim);
}

double ShiftDensity::pdf(std::span<const double> t) const {
  double p = 1.0;
  if (kind_ == Kind::gaussian) {
    const double c = 1.0 / (param_ * std::sqrt(2.0 * std::numbers::pi));
    for (double x : t) p *= c * std::exp(-0.5 * (x / param_) * (x / param_));
    return p;
  }
  for (double x : t) {
    if (std::abs(x) > param_) return 0.0;
    p /= 2.0 * param_;
  }
  return p;
}

std::vector<double> ShiftDensity::sample(RngStream& rng) const {
  std::vector<double> n(static_cast<std::size_t>(dim_));
  if (kind_ == Kind::gaussian) {
    const boost::math::normal_distribution<double> dist(0.0, param_);
    for (auto& x : n) x = boost::math::quantile(dist, rng.uniform_open());
  } else {
    for (auto& x : n) x = param_ * (2.0 * rng.uniform_open() - 1.0);
  }
  return n;
}

nlohmann::json ShiftDensity::to_json() const {
  if (kind_ == Kind::gaussian) return {{"kind", "gaussian"}, {"sigma", param_}};
  return {{"kind", "uniform_window"}, {"half_width", param_}, {"allow_nonpositive", true}};
}

ShiftDensity shift_density_from_json(const nlohmann::json& j, int dim) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("shift density needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") return ShiftDensity::gaussian(j.value("sigma", 1.0), dim);
  if (kind == "uniform_window") {
    return ShiftDensity::uniform_window(j.value("half_width", 1.0), dim, j.value("allow_nonpositive", false));
  }
  throw ConfigError("unknown shift density '" + kind + "' (expected gaussian or uniform_window)");
}

double integral_S(const PathSample& path, const QuadratureRule& rule, const FieldConfig& cfg, const ShiftDensity* gamma) {
  if (!(path.sites == rule.nodes())) throw ContractError("integral_S: path sites differ from the quadrature nodes");
  double s = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double g = gamma ? gamma->pdf(rule.nodes()[k]) : 1.0;
    s += g * std::pow(row_norm(path.values, static_cast<Eigen::Index>(k), cfg.norm), cfg.alpha);
  }
  return rule.weight() * s;
}

double sojourn_B(const PathSample& path, const QuadratureRule& rule, const FieldConfig& cfg) {
  if (!(path.sites == rule.nodes())) throw ContractError("sojourn_B: path sites differ from the quadrature nodes");
  std::size_t above = 0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    if (row_norm(path.values, static_cast<Eigen::Index>(k), cfg.norm) > 1.0) ++above;
  }
  return rule.weight() * static_cast<double>(above);
}

MCEstimate mc_integral(const std::function<double(std::span<const double>)>& integrand, const Window& window,
                       std::size_t n, RngStream& rng) {
  if (n < 1) throw ConfigError("mc_integral needs n >= 1");
  window.validate();
  const double vol = window.volume();
  MCEstimate est;
  std::vector<double> t(static_cast<std::size_t>(window.dim));
  for (std::size_t j = 0; j < n; ++j) {
    for (auto& x : t) x = window.half_width * (2.0 * rng.uniform() - 1.0);
    est.add(vol * integrand(t));
  }
  return est;
}

MCEstimate mc_integral(const std::function<double(std::span<const double>)>& integrand, const Window& window,
                       std::size_t n, const RunOptions& opts) {
  if (n < 1) throw ConfigError("mc_integral needs n >= 1");
  window.validate();
  const double vol = window.volume();
  return run_replicates(n, opts, [&](RngStream& rng) {
    std::vector<double> t(static_cast<std::size_t>(window.dim));
    for (auto& x : t) x = window.half_width * (2.0 * rng.uniform() - 1.0);
    return vol * integrand(t);
  });
}

// ---------------------------------------------------------------------------------------------
// Functionals

std::vector<Eigen::Index> locate_sites(const PointSet& path_sites, const PointSet& sites) {
  if (path_sites.dim() != sites.dim()) throw ContractError("path and functional site dimensions differ");
  SiteTable table(path_sites.dim());
  for (std::size_t i = 0; i < path_sites.size(); ++i) table.add(path_sites[i]);
  std::vector<Eigen::Index> rows(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto r = table.find(sites[i]);
    if (r < 0) throw ContractError("path lacks a site required by the functional: " + point_to_json(sites[i]).dump());
    // SiteTable keeps the first occurrence, which is also a row of path_sites.
    rows[i] = static_cast<Eigen::Index>(r);
  }
  return rows;
}

double Functional::norm_alpha(const Values& values, Eigen::Index row) const {
  const double n = norm_at(values, row);
  return cfg_.alpha == 1.0 ? n : std::pow(n, cfg_.alpha);
}

double Functional::operator()(const PathSample& path) const {
  const auto rows = locate_sites(path.sites, sites_);
  return eval(path.values, rows);
}

double Functional::eval_aligned(const Values& values) const {
  std::vector<Eigen::Index> rows(sites_.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
  return eval(values, rows);
}

namespace {

const nlohmann::json& need(const nlohmann::json& d, const char* key, const std::string& kind) {
  if (!d.contains(key)) throw ConfigError("functional '" + kind + "' needs '" + key + "'");
  return d.at(key);
}

double need_number(const nlohmann::json& d, const char* key, const std::string& kind) {
  const auto& v = need(d, key, kind);
  if (!v.is_number()) throw ConfigError("functional '" + kind + "': '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> number_list(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(what + " must be a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

nlohmann::json point_json(const PointSet& pts, std::size_t i) { return point_to_json(pts[i]); }

/// max_i c_i ||f(t_i)||^alpha or sum_i c_i ||f(t_i)||^alpha.
class WeightedCombination final : public Functional {
 public:
  WeightedCombination(const FieldConfig& cfg, PointSet sites, std::vector<double> coeffs, bool use_max)
      : Functional(cfg, std::move(sites)), coeffs_(std::move(coeffs)), max_(use_max) {
    const char* name = max_ ? "weighted_max" : "weighted_sum";
    if (sites_.empty()) throw ConfigError(std::string(name) + " needs at least one site");
    if (coeffs_.size() != sites_.size()) throw ConfigError(std::string(name) + ": coeffs and sites differ in length");
    for (double c : coeffs_) {
      if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError(std::string(name) + ": coeffs must be finite and >= 0");
    }
  }

  std::optional<double> degree() const override { return cfg_.alpha; }
  bool bounded() const override { return false; }
  nlohmann::json descriptor() const override {
    return {{"kind", max_ ? "weighted_max" : "weighted_sum"}, {"sites", to_json(sites_)}, {"coeffs", coeffs_}};
  }

  double eval(const Values& v, std::span<const Eigen::Index> rows) const override {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double x = coeffs_[i] * norm_alpha(v, rows[i]);
      acc = max_ ? std::max(acc, x) : acc + x;
    }
    return acc;
  }

 private:
  std::vector<double> coeffs_;
  bool max_;
};

/// ||f(s)||^alpha / sum_j q_j ||f(t_j)||^alpha with 0/0 := 0. sites_ = {s} followed by t_j.
class Ratio final : public Functional {
 public:
  Ratio(const FieldConfig& cfg, std::span<const double> s, const PointSet& ts, std::vector<double> weights)
      : Functional(cfg, PointSet(cfg.dim_l)), weights_(std::move(weights)) {
    if (ts.empty()) throw ConfigError("ratio needs a non-empty site list");
    if (weights_.size() != ts.size()) throw ConfigError("ratio: weights and sites differ in length");
    for (double q : weights_) {
      if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("ratio: weights must be finite and >= 0");
    }
    sites_.push_back(s);
    sites_.append(ts);
    bounded_ = false;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (weights_[j] > 0.0 && std::equal(s.begin(), s.end(), ts[j].begin())) bounded_ = true;
    }
  }

  std::optional<double> degree() const override { return 0.0; }
  bool bounded() const override { return bounded_; }
  nlohmann::json descriptor() const override {
    PointSet ts(sites_.dim());
    for (std::size_t i = 1; i < sites_.size(); ++i) ts.push_back(sites_[i]);
    return {{"kind", "ratio"}, {"site", point_json(sites_, 0)}, {"sites", to_json(ts)}, {"weights", weights_}};
  }

  double eval(const Values& v, std::span<const Eigen::Index> rows) const override {
    const double num = norm_alpha(v, rows[0]);
    double den = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) den += weights_[j] * norm_alpha(v, rows[j + 1]);
    if (den == 0.0) return 0.0;
    return num / den;
  }

 private:
  std::vector<double> weights_;
  bool bounded_;
};

/// Midpoint-rule stand-in for S_gamma(f) over the rule's nodes.
class SGamma final : public Functional {
 public:
  SGamma(const FieldConfig& cfg, QuadratureRule rule, std::optional<ShiftDensity> gamma)
      : Functional(cfg, rule.nodes()), rule_(std::move(rule)), gamma_(std::move(gamma)) {
    if (rule_.window().dim != cfg.dim_l) throw ConfigError("s_gamma_quadrature: rule dimension differs from dim_l");
    if (gamma_ && gamma_->dim() != cfg.dim_l) throw ConfigError("s_gamma_quadrature: gamma dimension differs from dim_l");
    weights_.resize(rule_.size());
    for (std::size_t k = 0; k < rule_.size(); ++k) {
      weights_[k] = rule_.weight() * (gamma_ ? gamma_->pdf(rule_.nodes()[k]) : 1.0);
    }
  }

  std::optional<double> degree() const override { return cfg_.alpha; }
  bool bounded() const override { return false; }
  nlohmann::json descriptor() const override {
    nlohmann::json d = {{"kind", "s_gamma_quadrature"}, {"rule", rule_.to_json()}};
    d["gamma"] = gamma_ ? gamma_->to_json() : nlohmann::json(nullptr);
    return d;
  }

  double eval(const Values& v, std::span<const Eigen::Index> rows) const override {
    double s = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) s += weights_[k] * norm_alpha(v, rows[k]);
    return s;
  }

 private:
  QuadratureRule rule_;
  std::optional<ShiftDensity> gamma_;
  std::vector<double> weights_;
};

/// Base for functionals built from child functionals; sites_ is the deduplicated union and
/// maps_[c][i] locates child c's i-th site in sites_.
class Composite : public Functional {
 protected:
  Composite(const FieldConfig& cfg, std::vector<FunctionalPtr> children)
      : Functional(cfg, PointSet(cfg.dim_l)), children_(std::move(children)) {
    SiteTable table(cfg.dim_l);
    for (const auto& c : children_) {
      const auto idx = table.add(c->sites());
      maps_.emplace_back(idx.begin(), idx.end());
    }
    sites_ = table.sites();
  }

  double eval_child(std::size_t c, const Values& v, std::span<const Eigen::Index> rows) const {
    const auto& map = maps_[c];
    std::vector<Eigen::Index> child_rows(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) child_rows[i] = rows[map[i]];
    return children_[c]->eval(v, child_rows);
  }

  std::vector<FunctionalPtr> children_;
  std::vector<std::vector<std::size_t>> maps_;
};

/// Gamma_beta(f) 1{S_gamma(f) = a}, a in {0, inf}.
class IndicatorSGamma final : public Composite {
 public:
  IndicatorSGamma(const FieldConfig& cfg, FunctionalPtr inner, FunctionalPtr s, bool a_is_zero)
      : Composite(cfg, {std::move(inner), std::move(s)}), zero_(a_is_zero) {
    if (!children_[0]->degree()) throw ConfigError("indicator_s_gamma: inner functional must be homogeneous");
  }
  std::optional<double> degree() const override { return children_[0]->degree(); }
  bool bounded() const override { return children_[0]->bounded(); }
  nlohmann::json descriptor() const override {
    return {{"kind", "indicator_s_gamma"},
            {"inner", children_[0]->descriptor()},
            {"s_gamma", children_[1]->descriptor()},
            {"a", zero_ ? nlohmann::json(0) : nlohmann::json("inf")}};
  }
  double eval(const Values& v, std::span<const Eigen::Index> rows) const override {
    const double s = eval_child(1, v, rows);
    const bool hit = zero_ ? s == 0.0 : std::isinf(s);
    return hit ? eval_child(0, v, rows) : 0.0;
  }

 private:
  bool zero_;
};

/// Gamma_beta(f) S_gamma(f) (degree beta + alpha) or Gamma_alpha(f) / S_gamma(f) (degree 0,
/// 0/0 := 0).
class ProductSGamma final : public Composite {
 public:
  ProductSGamma(const FieldConfig& cfg, FunctionalPtr inner, FunctionalPtr s, bool quotient)
      : Composite(cfg, {std::move(inner), std::move(s)}), quotient_(quotient) {
    const auto b = children_[0]->degree();
    if (!b) throw ConfigError("s_gamma composition: inner functional must be homogeneous");
    if (quotient_ && std::abs(*b - cfg.alpha) > 1e-12) {
      throw ConfigError("over_s_gamma: inner functional must have degree alpha");
    }
  }
  std::optional<double> degree() const override { return quotient_ ? 0.0 : *children_[0]->degree() + cfg_.alpha; }
  bool bounded() const override { return false; }
  nlohmann::json descriptor() const override {
    return {{"kind", quotient_ ? "over_s_gamma" : "times_s_gamma"},
            {"inner", children_[0]->descriptor()},
            {"s_gamma", children_[1]->descriptor()}};
  }
  double eval(const Values& v, std::span<const Eigen::Index> rows) const override {
    const double g = eval_child(0, v, rows);
    const double s = eval_child(1, v, rows);
    if (!quotient_) return g * s;
    if (s == 0.0) return 0.0;
    return g / s;
  }

 private:
  bool quotient_;
};

/// ||f(s)|| / (||f(s)|| + ||f(u)||) with 0/0 := 0.
class BoundedZeroHom final : public Functional {
 public:
  BoundedZeroHom(const FieldConfig& cfg, PointSet su) : Functional(cfg, std::move(su)) {}
  std::optional<double> degree() const override { return 0.0; }
  bool bounded() const override { return true; }
  nlohmann::json descriptor() const override {
    return {{"kind", "bounded_zero_hom"}, {"s", point_json(sites_, 0)}, {"u", point_json(sites_, 1)}};
  }
  double eval(const Values& v, std::span<const Eigen::Index> rows) const override {
    const double a = norm_at(v, rows[0]);
    const double b = norm_at(v, rows[1]);
    if (a + b == 0.0) return 0.0;
    return a / (a + b);
  }
};

/// 1{||f(s)|| > level} or 1{G(f) > level} for a degree-0 G.
class Threshold final : public Composite {
 public:
  Threshold(const FieldConfig& cfg, FunctionalPtr of, double level)
      : Composite(cfg, {std::move(of)}), level_(level), site_form_(false) {
    const auto b = children_[0]->degree();
    if (!b || *b != 0.0) throw ConfigError("threshold 'of' must be a degree-0 functional");
  }
  Threshold(const FieldConfig& cfg, std::span<const double> site, double level)
      : Composite(cfg, {}), level_(level), site_form_(true) {
    sites_.push_back(site);
  }

  std::optional<double> degree() const override {
    if (site_form_) return std::nullopt;
    return 0.0;
  }
  bool bounded() const override { return true; }
  nlohmann::json descriptor() const override {
    nlohmann::json d = {{"kind", "threshold"}, {"level", level_}};
    if (site_form_) {
      d["site"] = point_json(sites_, 0);
    } else {
      d["of"] = children_[0]->descriptor();
    }
    return d;
  }
  double eval(const Values& v, std::span<const Eigen::Index> rows) const override {
    const double x = site_form_ ? norm_at(v, rows[0]) : eval_child(0, v, rows);
    return x > level_ ? 1.0 : 0.0;
  }

 private:
  double level_;
  bool site_form_;
};

/// min(||f(s)||, cap).
class Capped final : public Functional {
 public:
  Capped(const FieldConfig& cfg, PointSet s, double cap) : Functional(cfg, std::move(s)), cap_(cap) {
    if (!(cap_ > 0.0) || !std::isfinite(cap_)) throw ConfigError("capped: cap must be positive and finite");
  }
  std::optional<double> degree() const override { return std::nullopt; }
  bool bounded() const override { return true; }
  nlohmann::json descriptor() const override {
    return {{"kind", "capped"}, {"site", point_json(sites_, 0)}, {"cap", cap_}};
  }
  double eval(const Values& v, std::span<const Eigen::Index> rows) const override {
    return std::min(norm_at(v, rows[0]), cap_);
  }

 private:
  double cap_;
};

/// Constant value; degree 0.
class Constant final : public Functional {
 public:
  Constant(const FieldConfig& cfg, double value) : Functional(cfg, PointSet(cfg.dim_l)), value_(value) {
    if (!(value_ >= 0.0) || !std::isfinite(value_)) throw ConfigError("constant: value must be finite and >= 0");
  }
  std::optional<double> degree() const override { return 0.0; }
  bool bounded() const override { return true; }
  nlohmann::json descriptor() const override { return {{"kind", "constant"}, {"value", value_}}; }
  double eval(const Values&, std::span<const Eigen::Index>) const override { return value_; }

 private:
  double value_;
};

FunctionalPtr make_s_gamma(const nlohmann::json& d, const FieldConfig& cfg) {
  if (!d.is_object()) throw ConfigError("s_gamma_quadrature descriptor must be a mapping");
  const std::string kind = d.value("kind", std::string("s_gamma_quadrature"));
  if (kind != "s_gamma_quadrature") throw ConfigError("expected an s_gamma_quadrature descriptor, got '" + kind + "'");
  const auto& r = need(d, "rule", kind);
  QuadratureRule rule(Window{need_number(r, "half_width", kind), cfg.dim_l}, need_number(r, "step", kind));
  std::optional<ShiftDensity> gamma;
  if (d.contains("gamma") && !d.at("gamma").is_null()) gamma = shift_density_from_json(d.at("gamma"), cfg.dim_l);
  return std::make_shared<SGamma>(cfg, std::move(rule), std::move(gamma));
}

}  // namespace

FunctionalPtr builtin_functional(const nlohmann::json& d, const FieldConfig& cfg) {
  if (!d.is_object() || !d.contains("kind") || !d.at("kind").is_string()) {
    throw ConfigError("functional descriptor needs a string 'kind'");
  }
  const auto kind = d.at("kind").get<std::string>();
  const int l = cfg.dim_l;
  try {
    if (kind == "weighted_max" || kind == "weighted_sum") {
      PointSet sites = points_from_json(need(d, "sites", kind), l);
      std::vector<double> coeffs =
          d.contains("coeffs") ? number_list(d.at("coeffs"), kind + " coeffs") : std::vector<double>(sites.size(), 1.0);
      return std::make_shared<WeightedCombination>(cfg, std::move(sites), std::move(coeffs), kind == "weighted_max");
    }
    if (kind == "ratio") {
      const auto s = point_from_json(need(d, "site", kind), l);
      PointSet ts = points_from_json(need(d, "sites", kind), l);
      std::vector<double> w =
          d.contains("weights") ? number_list(d.at("weights"), "ratio weights") : std::vector<double>(ts.size(), 1.0);
      return std::make_shared<Ratio>(cfg, s, ts, std::move(w));
    }
    if (kind == "s_gamma_quadrature") return make_s_gamma(d, cfg);
    if (kind == "indicator_s_gamma") {
      bool zero = true;
      if (d.contains("a")) {
        const auto& a = d.at("a");
        if (a.is_number() && a.get<double>() == 0.0) {
          zero = true;
        } else if ((a.is_string() && a.get<std::string>() == "inf") ||
                   (a.is_number() && std::isinf(a.get<double>()))) {
          zero = false;
        } else {
          throw ConfigError("indicator_s_gamma: 'a' must be 0 or \"inf\"");
        }
      }
      return std::make_shared<IndicatorSGamma>(cfg, builtin_functional(need(d, "inner", kind), cfg),
                                               make_s_gamma(need(d, "s_gamma", kind), cfg), zero);
    }
    if (kind == "times_s_gamma" || kind == "over_s_gamma") {
      return std::make_shared<ProductSGamma>(cfg, builtin_functional(need(d, "inner", kind), cfg),
                                             make_s_gamma(need(d, "s_gamma", kind), cfg), kind == "over_s_gamma");
    }
    if (kind == "bounded_zero_hom") {
      PointSet su(l);
      su.push_back(point_from_json(need(d, "s", kind), l));
      su.push_back(point_from_json(need(d, "u", kind), l));
      return std::make_shared<BoundedZeroHom>(cfg, std::move(su));
    }
    if (kind == "threshold") {
      const double level = need_number(d, "level", kind);
      if (d.contains("site") == d.contains("of")) throw ConfigError("threshold needs exactly one of 'site' or 'of'");
      if (d.contains("site")) return std::make_shared<Threshold>(cfg, point_from_json(d.at("site"), l), level);
      return std::make_shared<Threshold>(cfg, builtin_functional(d.at("of"), cfg), level);
    }
    if (kind == "capped") {
      PointSet s(l);
      s.push_back(point_from_json(need(d, "site", kind), l));
      return std::make_shared<Capped>(cfg, std::move(s), need_number(d, "cap", kind));
    }
    if (kind == "constant") return std::make_shared<Constant>(cfg, d.contains("value") ? need_number(d, "value", kind) : 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("functional '" + kind + "': " + e.what());
  }
  throw ConfigError("unknown functional kind '" + kind +
                    "' (expected weighted_max, weighted_sum, ratio, s_gamma_quadrature, indicator_s_gamma, "
                    "times_s_gamma, over_s_gamma, bounded_zero_hom, threshold, capped or constant)");
}

}  // namespace shiftgen
