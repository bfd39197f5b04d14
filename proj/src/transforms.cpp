#include "shiftgen/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "shiftgen/errors.hpp"

namespace shiftgen {

std::string_view to_string(TiltMode mode) {
  switch (mode) {
    case TiltMode::exact:
      return "exact";
    case TiltMode::sir:
      return "sir";
    case TiltMode::weighted:
      return "weighted";
  }
  return "weighted";
}

TiltMode tilt_mode_from_string(std::string_view name) {
  if (name == "exact") return TiltMode::exact;
  if (name == "sir") return TiltMode::sir;
  if (name == "weighted") return TiltMode::weighted;
  throw ConfigError("unknown tilting mode '" + std::string(name) + "' (expected exact, sir or weighted)");
}

namespace {

std::string kind_of(const FieldSampler& s) {
  const auto d = s.describe();
  return d.contains("kind") ? d.at("kind").get<std::string>() : std::string("unknown");
}

/// Copies rows `map` of `src` followed by its trailing `extra` rows into `dst`, scaled.
void gather(const Values& src, const std::vector<std::size_t>& map, Eigen::Index extra_begin, Eigen::Index extra,
            double scale, Values& dst) {
  const auto n = static_cast<Eigen::Index>(map.size());
  dst.resize(n + extra, src.cols());
  for (Eigen::Index i = 0; i < n; ++i) dst.row(i) = scale * src.row(static_cast<Eigen::Index>(map[static_cast<std::size_t>(i)]));
  if (extra > 0) dst.bottomRows(extra) = scale * src.middleRows(extra_begin, extra);
}

class BoundTilted final : public BoundField {
 public:
  BoundTilted(std::shared_ptr<const TiltedSampler> owner, const PointSet& sites)
      : BoundField(owner, sites), tilt_(std::move(owner)) {
    const SiteUnion u = union_sites(sites, PointSet::origin(sites.dim()));
    map_ = u.from_a;
    origin_row_ = static_cast<Eigen::Index>(u.from_b[0]);
    union_size_ = static_cast<Eigen::Index>(u.sites.size());
    base_ = tilt_->base()->bind(u.sites);
  }

  void sample(RngStream& rng, Draw& out) const override { draw(nullptr, rng, out); }
  void sample_extended(const PointSet& extra, RngStream& rng, Draw& out) const override { draw(&extra, rng, out); }

 private:
  void one(const PointSet* extra, RngStream& rng, Draw& d) const {
    if (extra) {
      base_->sample_extended(*extra, rng, d);
    } else {
      base_->sample(rng, d);
    }
  }

  void draw(const PointSet* extra, RngStream& rng, Draw& out) const {
    const auto cfg = tilt_->config();
    const Eigen::Index e = extra ? static_cast<Eigen::Index>(extra->size()) : 0;
    Draw d;
    if (tilt_->mode() != TiltMode::sir) {
      one(extra, rng, d);
      const double n0 = row_norm(d.values, origin_row_, cfg.norm);
      double weight = d.weight;
      if (tilt_->mode() == TiltMode::weighted) weight *= std::pow(n0, cfg.alpha);
      if (n0 == 0.0 || weight == 0.0) {
        if (tilt_->mode() == TiltMode::exact) {
          throw DegenerateTilting("exact tilting of '" + kind_of(*tilt_->base()) + "' met ||Z(0)|| = 0");
        }
        out.values = Values::Zero(static_cast<Eigen::Index>(map_.size()) + e, d.values.cols());
        out.weight = 0.0;
        out.snap = d.snap;
        return;
      }
      gather(d.values, map_, union_size_, e, 1.0 / n0, out.values);
      out.weight = weight;
      out.snap = d.snap;
      return;
    }

    std::vector<Draw> pool(static_cast<std::size_t>(tilt_->pool()));
    std::vector<double> cum(pool.size());
    double total = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      one(extra, rng, pool[i]);
      total += pool[i].weight * std::pow(row_norm(pool[i].values, origin_row_, cfg.norm), cfg.alpha);
      cum[i] = total;
    }
    if (!(total > 0.0)) {
      throw DegenerateTilting("sir tilting: all " + std::to_string(pool.size()) + " pool weights are zero for base '" +
                              kind_of(*tilt_->base()) + "'");
    }
    const double u = rng.uniform() * total;
    const auto pick = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    const Draw& d2 = pool[std::min(pick, pool.size() - 1)];
    const double n0 = row_norm(d2.values, origin_row_, cfg.norm);
    gather(d2.values, map_, union_size_, e, 1.0 / n0, out.values);
    out.weight = 1.0;
    out.snap = d2.snap;
  }

  std::shared_ptr<const TiltedSampler> tilt_;
  std::unique_ptr<BoundField> base_;
  std::vector<std::size_t> map_;
  Eigen::Index origin_row_ = 0;
  Eigen::Index union_size_ = 0;
};

}  // namespace

TiltedSampler::TiltedSampler(SamplerPtr base, std::optional<TiltMode> mode, int pool)
    : FieldSampler(base->config()), base_(std::move(base)), pool_(pool) {
  const bool deterministic = base_->deterministic_origin_norm().has_value();
  mode_ = mode.value_or(deterministic && !base_->weighted() ? TiltMode::exact : TiltMode::weighted);
  if (mode_ == TiltMode::exact && (!deterministic || base_->weighted())) {
    throw ConfigError("exact tilting needs a base with deterministic ||Z(0)|| (got '" + kind_of(*base_) + "')");
  }
  if (mode_ == TiltMode::exact && !(*base_->deterministic_origin_norm() > 0.0)) {
    throw ConfigError("exact tilting needs ||Z(0)|| > 0");
  }
  if (pool_ < 1) throw ConfigError("sir pool size must be >= 1");
}

std::unique_ptr<BoundField> TiltedSampler::bind(const PointSet& sites) const {
  return std::make_unique<BoundTilted>(std::static_pointer_cast<const TiltedSampler>(self()), sites);
}

nlohmann::json TiltedSampler::describe() const {
  nlohmann::json d = {{"kind", "tilted"}, {"mode", std::string(to_string(mode_))}, {"base", base_->describe()}};
  if (mode_ == TiltMode::sir) d["pool"] = pool_;
  return d;
}

std::optional<double> TiltedSampler::deterministic_origin_norm() const {
  if (mode_ == TiltMode::weighted) return std::nullopt;
  return 1.0;
}

ParetoMultiplier::ParetoMultiplier(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0)) throw ConfigError("Pareto multiplier needs alpha > 0");
}

namespace {

class BoundTail final : public BoundField {
 public:
  BoundTail(std::shared_ptr<const TailSampler> owner, const PointSet& sites)
      : BoundField(owner, sites), pareto_(owner->config().alpha), theta_(owner->theta()->bind(sites)) {}

  void sample(RngStream& rng, Draw& out) const override {
    const double r = pareto_(rng);
    theta_->sample(rng, out);
    out.values *= r;
  }
  void sample_extended(const PointSet& extra, RngStream& rng, Draw& out) const override {
    const double r = pareto_(rng);
    theta_->sample_extended(extra, rng, out);
    out.values *= r;
  }

 private:
  ParetoMultiplier pareto_;
  std::unique_ptr<BoundField> theta_;
};

}  // namespace

TailSampler::TailSampler(std::shared_ptr<const TiltedSampler> theta) : FieldSampler(theta->config()), theta_(std::move(theta)) {}

std::unique_ptr<BoundField> TailSampler::bind(const PointSet& sites) const {
  return std::make_unique<BoundTail>(std::static_pointer_cast<const TailSampler>(self()), sites);
}

nlohmann::json TailSampler::describe() const { return {{"kind", "tail"}, {"theta", theta_->describe()}}; }

std::string_view to_string(ShiftVariant v) {
  switch (v) {
    case ShiftVariant::zn:
      return "zn";
    case ShiftVariant::zn_prime_finiteS:
      return "zn_prime_finiteS";
    case ShiftVariant::zn_boll3:
      return "zn_boll3";
    case ShiftVariant::zn_prime_boll3b:
      return "zn_prime_boll3b";
    case ShiftVariant::zn_second:
      return "zn_second";
    case ShiftVariant::cluster:
      return "cluster";
  }
  return "zn";
}

ShiftVariant shift_variant_from_string(std::string_view name) {
  for (auto v : {ShiftVariant::zn, ShiftVariant::zn_prime_finiteS, ShiftVariant::zn_boll3, ShiftVariant::zn_prime_boll3b,
                 ShiftVariant::zn_second, ShiftVariant::cluster}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError("unknown transform variant '" + std::string(name) +
                    "' (expected zn, zn_prime_finiteS, zn_boll3, zn_prime_boll3b, zn_second or cluster)");
}

bool uses_theta(ShiftVariant v) {
  return v == ShiftVariant::zn_prime_finiteS || v == ShiftVariant::zn_prime_boll3b || v == ShiftVariant::zn_second;
}

bool needs_finite_s(ShiftVariant v) { return v == ShiftVariant::zn || v == ShiftVariant::zn_prime_finiteS; }

nlohmann::json FiniteSDiagnostic::to_json() const {
  return {{"excess", excess}, {"n", n}, {"pass", pass}, {"threshold", 0.01}};
}

namespace {

bool needs_shifted_nodes(ShiftVariant v) {
  return v == ShiftVariant::zn_boll3 || v == ShiftVariant::zn_prime_boll3b || v == ShiftVariant::zn_second;
}

class BoundShift final : public BoundField {
 public:
  BoundShift(std::shared_ptr<const ShiftTransform> owner, const PointSet& sites)
      : BoundField(owner, sites), t_(std::move(owner)) {
    const auto& rule = t_->rule();
    const int l = t_->config().dim_l;
    // The cluster profile is deterministic, so the origin alone is enough as a base.
    const SiteUnion u = t_->variant() == ShiftVariant::cluster ? union_sites(PointSet::origin(l), PointSet(l))
                                                               : union_sites(PointSet::origin(l), rule.nodes());
    node_rows_.assign(u.from_b.begin(), u.from_b.end());
    base_size_ = static_cast<Eigen::Index>(u.sites.size());
    base_ = t_->source()->bind(u.sites);
    gamma_weights_.resize(rule.size());
    for (std::size_t k = 0; k < rule.size(); ++k) gamma_weights_[k] = rule.weight() * t_->gamma().pdf(rule.nodes()[k]);
  }

  void sample(RngStream& rng, Draw& out) const override { draw(sites_, rng, out); }

  void sample_extended(const PointSet& extra, RngStream& rng, Draw& out) const override {
    PointSet all = sites_;
    all.append(extra);
    draw(all, rng, out);
  }

 private:
  [[noreturn]] void positivity(const std::string& what) const {
    throw PositivityViolation(std::string(to_string(t_->variant())) + ": " + what +
                              "; the integral is positive almost surely, so this points to window truncation or a "
                              "too coarse quadrature step");
  }

  void draw(const PointSet& targets, RngStream& rng, Draw& out) const {
    const auto& cfg = t_->config();
    const auto& rule = t_->rule();
    const ShiftVariant v = t_->variant();
    const double step = rule.step();

    std::vector<double> n = t_->gamma().sample(rng);
    double snap = 0.0;
    for (auto& x : n) {
      const double s = step * std::round(x / step);
      snap = std::max(snap, std::abs(x - s));
      x = s;
    }
    const double gamma_n = t_->gamma().pdf(n);

    PointSet ext(cfg.dim_l);
    if (needs_shifted_nodes(v)) ext.append(shift_points(rule.nodes(), n));
    const Eigen::Index target_begin = base_size_ + static_cast<Eigen::Index>(ext.size());
    ext.append(shift_points(targets, n));

    Draw d;
    base_->sample_extended(ext, rng, d);
    const auto m = static_cast<Eigen::Index>(targets.size());
    out.snap = std::max(snap, d.snap);
    out.weight = d.weight;
    if (d.weight == 0.0) {
      out.values = Values::Zero(m, d.values.cols());
      return;
    }

    const double a = cfg.alpha;
    auto pw = [a](double x) { return a == 1.0 ? x : std::pow(x, a); };
    const double origin_norm = row_norm(d.values, 0, cfg.norm);
    double factor = 1.0;
    switch (v) {
      case ShiftVariant::zn:
      case ShiftVariant::zn_prime_finiteS: {
        double s = 0.0;
        for (auto r : node_rows_) s += pw(row_norm(d.values, static_cast<Eigen::Index>(r), cfg.norm));
        s *= rule.weight();
        if (!(s > 0.0)) positivity("S over the window is 0");
        const double lead = v == ShiftVariant::zn ? origin_norm : 1.0;
        if (v == ShiftVariant::zn && !(origin_norm > 0.0)) positivity("||Z(0)|| = 0 but zn needs it positive");
        factor = lead / std::pow(gamma_n * s, 1.0 / a);
        break;
      }
      case ShiftVariant::zn_boll3:
      case ShiftVariant::zn_prime_boll3b:
      case ShiftVariant::zn_second: {
        double s = 0.0;
        for (std::size_t k = 0; k < gamma_weights_.size(); ++k) {
          const double z = row_norm(d.values, base_size_ + static_cast<Eigen::Index>(k), cfg.norm);
          s += gamma_weights_[k] * (v == ShiftVariant::zn_second ? (z > 1e-300 ? 1.0 : 0.0) : pw(z));
        }
        if (!(s > 0.0)) positivity("the gamma-weighted integral of the shifted path is 0");
        const double lead = v == ShiftVariant::zn_boll3 ? origin_norm : 1.0;
        if (v == ShiftVariant::zn_boll3 && !(origin_norm > 0.0)) positivity("||Z(0)|| = 0 but zn_boll3 needs it positive");
        factor = lead / std::pow(s, 1.0 / a);
        break;
      }
      case ShiftVariant::cluster:
        if (!(gamma_n > 0.0)) positivity("gamma(N) = 0");
        factor = std::pow(gamma_n, -1.0 / a);
        break;
    }
    out.values = factor * d.values.middleRows(target_begin, m);
  }

  std::shared_ptr<const ShiftTransform> t_;
  std::unique_ptr<BoundField> base_;
  std::vector<std::size_t> node_rows_;
  Eigen::Index base_size_ = 0;
  std::vector<double> gamma_weights_;
};

}  // namespace

ShiftTransform::ShiftTransform(SamplerPtr base, ShiftDensity gamma, QuadratureRule rule, ShiftVariant variant)
    : FieldSampler(base->config()), gamma_(std::move(gamma)), rule_(std::move(rule)), variant_(variant) {
  const auto& cfg = base->config();
  if (gamma_.dim() != cfg.dim_l) throw ConfigError("shift density dimension differs from dim_l");
  if (rule_.window().dim != cfg.dim_l) throw ConfigError("quadrature dimension differs from dim_l");
  if (uses_theta(variant_) && !std::dynamic_pointer_cast<const TiltedSampler>(base)) {
    base = std::make_shared<TiltedSampler>(std::move(base));
  }
  if (variant_ == ShiftVariant::cluster && kind_of(*base) != "cluster_profile") {
    throw ConfigError("the cluster variant needs a cluster_profile base");
  }
  source_ = std::move(base);
}

std::unique_ptr<BoundField> ShiftTransform::bind(const PointSet& sites) const {
  if (sites.dim() != config().dim_l) throw ConfigError("site dimension differs from dim_l");
  return std::make_unique<BoundShift>(std::static_pointer_cast<const ShiftTransform>(self()), sites);
}

nlohmann::json ShiftTransform::describe() const {
  return {{"kind", "shift_transform"},
          {"variant", std::string(to_string(variant_))},
          {"gamma", gamma_.to_json()},
          {"rule", rule_.to_json()},
          {"source", source_->describe()}};
}

std::optional<FiniteSDiagnostic> ShiftTransform::check_finite_s(std::size_t pilot_n, const RunOptions& opts) const {
  if (!needs_finite_s(variant_)) return std::nullopt;
  auto diag = finite_s_diagnostic(*source_, rule_, pilot_n, opts);
  if (!diag.pass) {
    throw ConfigError(std::string(to_string(variant_)) + " needs S finite on the window: S on the doubled window exceeds "
                      "S on the window by " + std::to_string(100.0 * diag.excess) + "% (limit 1%); enlarge half_width");
  }
  return diag;
}

FiniteSDiagnostic finite_s_diagnostic(const FieldSampler& source, const QuadratureRule& rule, std::size_t pilot_n,
                                      const RunOptions& opts) {
  if (pilot_n < 1) throw ConfigError("finite-S pilot needs n >= 1");
  const QuadratureRule big = rule.doubled();
  const auto inner = locate_sites(big.nodes(), rule.nodes());
  std::vector<char> is_inner(big.size(), 0);
  for (auto r : inner) is_inner[static_cast<std::size_t>(r)] = 1;
  auto bound = source.bind(big.nodes());
  const auto& cfg = source.config();

  struct Part {
    double num = 0.0;
    double den = 0.0;
  };
  std::vector<Part> parts(chunk_count(pilot_n, opts));
  for_each_chunk(pilot_n, opts, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Part p;
    Draw d;
    for (std::size_t r = begin; r < end; ++r) {
      RngStream rng = derive_rng_stream(opts.master_seed, opts.stream, r);
      bound->sample(rng, d);
      if (d.weight == 0.0) continue;
      double s_in = 0.0, s_all = 0.0;
      for (std::size_t k = 0; k < big.size(); ++k) {
        const double z = std::pow(row_norm(d.values, static_cast<Eigen::Index>(k), cfg.norm), cfg.alpha);
        s_all += z;
        if (is_inner[k]) s_in += z;
      }
      const double excess = s_all > 0.0 ? (s_all - s_in) / s_all : 0.0;
      p.num += d.weight * excess;
      p.den += d.weight;
    }
    parts[c] = p;
  });
  double num = 0.0, den = 0.0;
  for (const auto& p : parts) {
    num += p.num;
    den += p.den;
  }
  FiniteSDiagnostic diag;
  diag.n = pilot_n;
  diag.excess = den > 0.0 ? num / den : 0.0;
  diag.pass = diag.excess < 0.01;
  return diag;
}

PathSample sample_theta(const PointSet& sites, const TiltedSampler& t, RngStream& rng, double* weight) {
  Draw d = t.sample(sites, rng);
  if (weight) *weight = d.weight;
  return PathSample::make(sites, std::move(d.values));
}

PathSample sample_tail_Y(const PointSet& sites, const TailSampler& y, RngStream& rng, double* weight) {
  Draw d = y.sample(sites, rng);
  if (weight) *weight = d.weight;
  return PathSample::make(sites, std::move(d.values));
}

PathSample transform_zn(const PointSet& sites, const ShiftTransform& t, RngStream& rng, double* weight, double* snap) {
  Draw d = t.sample(sites, rng);
  if (weight) *weight = d.weight;
  if (snap) *snap = d.snap;
  return PathSample::make(sites, std::move(d.values));
}

}  // namespace shiftgen
