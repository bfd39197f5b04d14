#include "shiftgen/representors.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shiftgen/errors.hpp"
#include "shiftgen/json_io.hpp"

namespace shiftgen {

namespace {

double ones_norm(const FieldConfig& cfg) {
  std::vector<double> ones(static_cast<std::size_t>(cfg.dim_d), 1.0);
  return norm_value(ones, cfg.norm);
}

class BoundBrownResnick final : public BoundField {
 public:
  BoundBrownResnick(std::shared_ptr<const FieldSampler> owner, const PointSet& sites, const GaussianSampler& g,
                    int dim_d)
      : BoundField(std::move(owner), sites),
        factor_(std::make_shared<GaussianFactor>(g, sites)),
        half_var_(half_variances(sites, g.variogram)),
        dim_d_(dim_d) {}

  void sample(RngStream& rng, Draw& out) const override {
    factor_->sample(rng, dim_d_, out.values);
    exponentiate(out.values, half_var_, 0);
    out.weight = 1.0;
    out.snap = 0.0;
  }

  void sample_extended(const PointSet& extra, RngStream& rng, Draw& out) const override {
    GaussianExtension ext(factor_, extra);
    Values base, more;
    ext.sample(rng, dim_d_, base, more);
    const auto n = base.rows();
    out.values.resize(n + more.rows(), dim_d_);
    out.values.topRows(n) = base;
    out.values.bottomRows(more.rows()) = more;
    exponentiate(out.values, half_var_, 0);
    exponentiate(out.values, half_variances(extra, factor_->sampler().variogram), n);
    out.weight = 1.0;
    out.snap = 0.0;
  }

 private:
  static std::vector<double> half_variances(const PointSet& sites, const VariogramModel& model) {
    std::vector<double> h(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) h[i] = 0.5 * model(sites[i]);
    return h;
  }

  static void exponentiate(Values& v, const std::vector<double>& half_var, Eigen::Index offset) {
    for (std::size_t i = 0; i < half_var.size(); ++i) {
      const auto r = offset + static_cast<Eigen::Index>(i);
      for (Eigen::Index c = 0; c < v.cols(); ++c) v(r, c) = std::exp(v(r, c) - half_var[i]);
    }
  }

  std::shared_ptr<const GaussianFactor> factor_;
  std::vector<double> half_var_;
  int dim_d_;
};

/// Deterministic field given by a value function; extension is a plain evaluation.
template <class ValueFn>
class BoundDeterministic final : public BoundField {
 public:
  BoundDeterministic(std::shared_ptr<const FieldSampler> owner, const PointSet& sites, int dim_d, ValueFn fn)
      : BoundField(std::move(owner), sites), dim_d_(dim_d), fn_(std::move(fn)) {
    fill(sites_, cached_);
  }

  void sample(RngStream&, Draw& out) const override {
    out.values = cached_;
    out.weight = 1.0;
    out.snap = 0.0;
  }

  void sample_extended(const PointSet& extra, RngStream&, Draw& out) const override {
    Values more;
    fill(extra, more);
    out.values.resize(cached_.rows() + more.rows(), dim_d_);
    out.values.topRows(cached_.rows()) = cached_;
    out.values.bottomRows(more.rows()) = more;
    out.weight = 1.0;
    out.snap = 0.0;
  }

 private:
  void fill(const PointSet& pts, Values& v) const {
    v.resize(static_cast<Eigen::Index>(pts.size()), dim_d_);
    for (std::size_t i = 0; i < pts.size(); ++i) v.row(static_cast<Eigen::Index>(i)).setConstant(fn_(pts[i]));
  }

  int dim_d_;
  ValueFn fn_;
  Values cached_;
};

template <class ValueFn>
std::unique_ptr<BoundField> make_deterministic(std::shared_ptr<const FieldSampler> owner, const PointSet& sites,
                                               int dim_d, ValueFn fn) {
  return std::make_unique<BoundDeterministic<ValueFn>>(std::move(owner), sites, dim_d, std::move(fn));
}

void check_dim(const PointSet& sites, const FieldConfig& cfg) {
  if (sites.dim() != cfg.dim_l) throw ConfigError("site dimension differs from dim_l");
}

}  // namespace

BrownResnick::BrownResnick(FieldConfig cfg, GaussianSampler gaussian) : FieldSampler(cfg), gaussian_(gaussian) {
  gaussian_.variogram.validate();
}

std::unique_ptr<BoundField> BrownResnick::bind(const PointSet& sites) const {
  check_dim(sites, config());
  return std::make_unique<BoundBrownResnick>(self(), sites, gaussian_, config().dim_d);
}

nlohmann::json BrownResnick::describe() const {
  return {{"kind", "brown_resnick"},
          {"variogram", {{"kind", "fractional"}, {"theta", gaussian_.variogram.theta}, {"hurst", gaussian_.variogram.hurst}}},
          {"jitter", gaussian_.jitter}};
}

std::optional<double> BrownResnick::deterministic_origin_norm() const { return ones_norm(config()); }

std::unique_ptr<BoundField> ConstantField::bind(const PointSet& sites) const {
  check_dim(sites, config());
  return make_deterministic(self(), sites, config().dim_d, [](std::span<const double>) { return 1.0; });
}

nlohmann::json ConstantField::describe() const { return {{"kind", "constant"}}; }

std::optional<double> ConstantField::deterministic_origin_norm() const { return ones_norm(config()); }

std::string_view to_string(ProfileShape shape) {
  switch (shape) {
    case ProfileShape::gaussian_pdf:
      return "gaussian_pdf";
    case ProfileShape::triangle:
      return "triangle";
    case ProfileShape::indicator_box:
      return "indicator_box";
  }
  return "gaussian_pdf";
}

ProfileShape profile_shape_from_string(std::string_view name) {
  if (name == "gaussian_pdf") return ProfileShape::gaussian_pdf;
  if (name == "triangle") return ProfileShape::triangle;
  if (name == "indicator_box") return ProfileShape::indicator_box;
  throw ConfigError("unknown profile '" + std::string(name) + "' (expected gaussian_pdf, triangle or indicator_box)");
}

namespace {

double unit_profile(ProfileShape shape, double p, double x) {
  switch (shape) {
    case ProfileShape::gaussian_pdf:
      return std::exp(-0.5 * (x / p) * (x / p)) / (p * std::sqrt(2.0 * std::numbers::pi));
    case ProfileShape::triangle:
      return std::max(0.0, 1.0 - std::abs(x) / p) / p;
    case ProfileShape::indicator_box:
      return std::abs(x) <= 0.5 * p ? 1.0 / p : 0.0;
  }
  return 0.0;
}

}  // namespace

ClusterProfile::ClusterProfile(FieldConfig cfg, ProfileSpec spec) : FieldSampler(cfg), spec_(spec) {
  if (!(spec_.param > 0.0)) throw ConfigError("profile parameter (sigma/width) must be positive");
  if (!(spec_.scale > 0.0)) throw ConfigError("profile scale must be positive");
  const double alpha = config().alpha;
  const double per_unit = std::pow(ones_norm(config()), alpha) * std::pow(unit_integral_alpha(), config().dim_l);
  coefficient_ = spec_.normalize ? std::pow(per_unit, -1.0 / alpha) : spec_.scale;
  integral_ = std::pow(coefficient_, alpha) * per_unit;
  if (!spec_.allow_unnormalized && std::abs(integral_ - 1.0) > 1e-6) {
    throw ConfigError("cluster profile " + std::string(to_string(spec_.shape)) +
                      ": integral of ||Q||^alpha is " + std::to_string(integral_) + ", expected 1 within 1e-6");
  }
}

double ClusterProfile::unit_integral_alpha() const {
  using boost::math::quadrature::gauss_kronrod;
  const double alpha = config().alpha;
  const double p = spec_.param;
  auto f = [&](double x) { return std::pow(unit_profile(spec_.shape, p, x), alpha); };
  switch (spec_.shape) {
    case ProfileShape::gaussian_pdf: {
      const double reach = 40.0 * p / std::sqrt(alpha);
      double total = 0.0;
      const int pieces = 16;
      for (int k = 0; k < pieces; ++k) {
        const double a = -reach + 2.0 * reach * k / pieces;
        const double b = -reach + 2.0 * reach * (k + 1) / pieces;
        total += gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
      }
      return total;
    }
    case ProfileShape::triangle:
      return gauss_kronrod<double, 61>::integrate(f, -p, 0.0, 15, 1e-14) +
             gauss_kronrod<double, 61>::integrate(f, 0.0, p, 15, 1e-14);
    case ProfileShape::indicator_box:
      return gauss_kronrod<double, 61>::integrate(f, -0.5 * p, 0.5 * p, 15, 1e-14);
  }
  return 0.0;
}

double ClusterProfile::component_value(std::span<const double> t) const {
  double v = coefficient_;
  for (double x : t) v *= unit_profile(spec_.shape, spec_.param, x);
  return v;
}

std::unique_ptr<BoundField> ClusterProfile::bind(const PointSet& sites) const {
  check_dim(sites, config());
  auto owner = std::static_pointer_cast<const ClusterProfile>(self());
  return make_deterministic(owner, sites, config().dim_d,
                            [owner](std::span<const double> t) { return owner->component_value(t); });
}

nlohmann::json ClusterProfile::describe() const {
  nlohmann::json profile = {{"shape", std::string(to_string(spec_.shape))}};
  profile[spec_.shape == ProfileShape::gaussian_pdf ? "sigma" : "width"] = spec_.param;
  profile["scale"] = spec_.scale;
  profile["normalize"] = spec_.normalize;
  profile["allow_unnormalized"] = spec_.allow_unnormalized;
  return {{"kind", "cluster_profile"}, {"profile", profile}};
}

Values signed_split(const Values& values) {
  Values out(values.rows(), 2 * values.cols());
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double z = values(i, c);
      out(i, 2 * c) = z > 0.0 ? z : 0.0;
      out(i, 2 * c + 1) = z < 0.0 ? -z : 0.0;
    }
  }
  return out;
}

PathSample signed_split(const PathSample& path) { return PathSample{path.sites, signed_split(path.values)}; }

namespace {

FieldConfig split_config(const FieldConfig& base) {
  FieldConfig cfg = base;
  cfg.dim_d = 2 * base.dim_d;
  cfg.norm = NormKind::sup;
  return cfg;
}

class BoundSplit final : public BoundField {
 public:
  BoundSplit(std::shared_ptr<const FieldSampler> owner, const PointSet& sites, std::unique_ptr<BoundField> base)
      : BoundField(std::move(owner), sites), base_(std::move(base)) {}

  void sample(RngStream& rng, Draw& out) const override {
    base_->sample(rng, out);
    out.values = signed_split(out.values);
  }
  void sample_extended(const PointSet& extra, RngStream& rng, Draw& out) const override {
    base_->sample_extended(extra, rng, out);
    out.values = signed_split(out.values);
  }

 private:
  std::unique_ptr<BoundField> base_;
};

}  // namespace

SignedSplitField::SignedSplitField(SamplerPtr base) : FieldSampler(split_config(base->config())), base_(std::move(base)) {}

std::unique_ptr<BoundField> SignedSplitField::bind(const PointSet& sites) const {
  return std::make_unique<BoundSplit>(self(), sites, base_->bind(sites));
}

nlohmann::json SignedSplitField::describe() const { return {{"kind", "signed_split"}, {"base", base_->describe()}}; }

PathSample br_sample(const PointSet& sites, const GaussianSampler& g, const FieldConfig& cfg, RngStream& rng) {
  auto br = std::make_shared<BrownResnick>(cfg, g);
  Draw d = br->sample(sites, rng);
  return PathSample::make(sites, std::move(d.values));
}

PathSample cluster_sample(const PointSet& sites, const ClusterProfile& q) {
  Values v(static_cast<Eigen::Index>(sites.size()), q.config().dim_d);
  for (std::size_t i = 0; i < sites.size(); ++i) v.row(static_cast<Eigen::Index>(i)).setConstant(q.component_value(sites[i]));
  return PathSample::make(sites, std::move(v));
}

nlohmann::json ValidationReport::to_json() const {
  return {{"margin", shiftgen::to_json(margin)},
          {"margin_pass", margin_pass},
          {"draws", draws},
          {"positive_draws", positive_draws},
          {"positivity_pass", positivity_pass},
          {"verdict", pass() ? "pass" : "fail"}};
}

ValidationReport validate_representor(const FieldSampler& rep, std::size_t n, const PointSet& separant,
                                      const RunOptions& opts) {
  if (n < 1000) throw ConfigError("validate_representor requires n >= 1000");
  const auto& cfg = rep.config();
  PointSet sites = PointSet::origin(cfg.dim_l);
  sites.append(separant);
  auto bound = rep.bind(sites);

  struct Part {
    MCEstimate margin;
    std::size_t positive = 0;
    std::size_t weighted = 0;
  };
  std::vector<Part> parts(chunk_count(n, opts));
  for_each_chunk(n, opts, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Part part;
    Draw d;
    for (std::size_t r = begin; r < end; ++r) {
      RngStream rng = derive_rng_stream(opts.master_seed, opts.stream, r);
      bound->sample(rng, d);
      part.margin.add(d.weight * std::pow(row_norm(d.values, 0, cfg.norm), cfg.alpha));
      if (d.weight > 0.0) {
        ++part.weighted;
        double sup = 0.0;
        for (Eigen::Index i = 1; i < d.values.rows(); ++i) sup = std::max(sup, row_norm(d.values, i, cfg.norm));
        if (sup > 0.0) ++part.positive;
      }
    }
    parts[c] = part;
  });

  ValidationReport report;
  std::size_t weighted = 0;
  for (const auto& p : parts) {
    report.margin.merge(p.margin);
    report.positive_draws += p.positive;
    weighted += p.weighted;
  }
  report.draws = n;
  const double se = report.margin.standard_error();
  const double dev = std::abs(report.margin.mean() - 1.0);
  report.margin_pass = se > 0.0 ? dev <= 4.0 * se : dev <= 1e-9;
  report.positivity_pass = report.positive_draws == weighted && weighted > 0;
  return report;
}

}  // namespace shiftgen
