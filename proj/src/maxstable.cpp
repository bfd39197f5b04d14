#include "shiftgen/maxstable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shiftgen/errors.hpp"
#include "shiftgen/json_io.hpp"

namespace shiftgen {

void DeHaanConfig::validate() const {
  if (max_terms < 1) throw ConfigError("dehaan.max_terms must be >= 1");
  if (!(stop_quantile > 0.0 && stop_quantile < 1.0)) throw ConfigError("dehaan.stop_quantile must lie in (0, 1)");
  if (sup_bound_estimate && !(*sup_bound_estimate > 0.0)) throw ConfigError("dehaan.sup_bound_estimate must be > 0");
  if (pilot_n < 1) throw ConfigError("dehaan.pilot_n must be >= 1");
}

namespace {

/// Scale factor folding a tilting weight into an alpha-homogeneous use of the path.
double weight_scale(double w, double alpha) { return w == 1.0 ? 1.0 : std::pow(w, 1.0 / alpha); }

double sup_norm_scaled(const Draw& d, const FieldConfig& cfg) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < d.values.rows(); ++i) s = std::max(s, row_norm(d.values, i, cfg.norm));
  return s * weight_scale(d.weight, cfg.alpha);
}

}  // namespace

double dehaan_pilot_bound(const FieldSampler& rep, const PointSet& sites, const DeHaanConfig& dcfg,
                          const RunOptions& opts) {
  dcfg.validate();
  auto bound = rep.bind(sites);
  std::vector<double> sups(dcfg.pilot_n);
  for_each_chunk(dcfg.pilot_n, opts, [&](std::size_t, std::size_t begin, std::size_t end) {
    Draw d;
    for (std::size_t r = begin; r < end; ++r) {
      RngStream rng = derive_rng_stream(opts.master_seed, opts.stream, r);
      bound->sample(rng, d);
      sups[r] = sup_norm_scaled(d, rep.config());
    }
  });
  std::sort(sups.begin(), sups.end());
  const auto k = std::min(sups.size() - 1, static_cast<std::size_t>(std::ceil(dcfg.stop_quantile * sups.size())));
  const double b = sups[k];
  if (!(b > 0.0)) throw NumericalError("de Haan pilot: sup of ||Z|| is zero on all pilot draws");
  return b;
}

DeHaanSample dehaan_sample(const BoundField& rep, const DeHaanConfig& dcfg, RngStream& rng) {
  if (!dcfg.sup_bound_estimate) throw ConfigError("dehaan_sample needs sup_bound_estimate (run the pilot)");
  const double bound = *dcfg.sup_bound_estimate;
  const double alpha = rep.config().alpha;

  Values x;
  double gamma = 0.0;
  double diag = 0.0;
  std::size_t terms = 0;
  Draw d;
  while (true) {
    gamma += rng.exponential();
    const double scale = std::pow(gamma, -1.0 / alpha);
    if (terms > 0) {
      const double lowest = x.minCoeff();
      diag = lowest > 0.0 ? scale * bound / lowest : std::numeric_limits<double>::infinity();
      if (diag < 1.0 || terms >= dcfg.max_terms) break;
    }
    rep.sample(rng, d);
    if ((d.values.array() < 0.0).any()) {
      throw ContractError("de Haan construction needs nonnegative representor values; wrap signed fields with signed_split");
    }
    const double s = scale * weight_scale(d.weight, alpha);
    if (terms == 0) {
      x = s * d.values;
    } else {
      x = x.cwiseMax(s * d.values);
    }
    ++terms;
  }
  DeHaanSample out{PathSample::make(rep.sites(), std::move(x)), diag, terms, false};
  out.truncation_warning = terms >= dcfg.max_terms && diag > 0.05;
  return out;
}

DeHaanSample dehaan_sample(const PointSet& sites, const FieldSampler& rep, const DeHaanConfig& dcfg, RngStream& rng) {
  return dehaan_sample(*rep.bind(sites), dcfg, rng);
}

void ExponentQuery::validate() const {
  if (sites.empty()) throw ConfigError("exponent query needs at least one site");
  if (x.size() != sites.size()) throw ConfigError("exponent query: thresholds and sites differ in length");
  for (double xi : x) {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw ConfigError("exponent query thresholds must be positive");
  }
}

ExponentResult exponent_estimate(const FieldSampler& rep, const ExponentQuery& q, std::size_t n, const RunOptions& opts) {
  if (n < 1000) throw ConfigError("exponent_estimate needs n >= 1000");
  q.validate();
  const auto& cfg = rep.config();
  auto bound = rep.bind(q.sites);
  std::vector<double> inv_x(q.x.size());
  for (std::size_t i = 0; i < q.x.size(); ++i) inv_x[i] = 1.0 / q.x[i];
  ExponentResult res;
  res.v = run_replicates(n, opts, [&](RngStream& rng) {
    Draw d;
    bound->sample(rng, d);
    if (d.weight == 0.0) return 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < inv_x.size(); ++i) {
      m = std::max(m, row_norm(d.values, static_cast<Eigen::Index>(i), cfg.norm) * inv_x[i]);
    }
    return d.weight * std::pow(m, cfg.alpha);
  });
  res.fidi_cdf = std::exp(-res.v.mean());
  return res;
}

IdentityReport stationarity_check(const FieldSampler& rep_a, const FieldSampler& rep_b, const PointSet& sites,
                                  std::span<const double> h, const std::vector<double>& x, std::size_t n,
                                  const RunOptions& opts, double confidence) {
  if (h.size() != static_cast<std::size_t>(sites.dim())) throw ConfigError("shift h must have dim_l coordinates");
  IdentityReport r;
  r.identity = "stationarity";
  r.functional = {{"kind", "exponent"}, {"sites", to_json(sites)}, {"x", x}};
  r.h.assign(h.begin(), h.end());
  r.n = n;
  r.confidence = confidence;
  r.seed = opts.master_seed;
  r.workers = opts.workers;
  r.left_source = rep_a.describe();
  r.right_source = rep_b.describe();
  std::vector<double> minus_h(h.begin(), h.end());
  for (auto& v : minus_h) v = -v;
  r.left = exponent_estimate(rep_a, ExponentQuery{sites, x}, n, opts.with_stream(1)).v;
  r.right = exponent_estimate(rep_b, ExponentQuery{shift_points(sites, minus_h), x}, n, opts.with_stream(2)).v;
  welch_verdict(r);
  return r;
}

}  // namespace shiftgen
