#include "shiftgen/verify.hpp"

#include <algorithm>
#include <cmath>

#include "shiftgen/errors.hpp"
#include "shiftgen/transforms.hpp"

namespace shiftgen {

std::string_view to_string(IdentityKind k) {
  switch (k) {
    case IdentityKind::boll:
      return "boll";
    case IdentityKind::boll22:
      return "boll22";
    case IdentityKind::do20:
      return "do20";
    case IdentityKind::tyy:
      return "tyy";
  }
  return "boll";
}

IdentityKind identity_kind_from_string(std::string_view name) {
  for (auto k : {IdentityKind::boll, IdentityKind::boll22, IdentityKind::do20, IdentityKind::tyy}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown identity '" + std::string(name) + "' (expected boll, boll22, do20 or tyy)");
}

const QuadratureRule* find_quadrature_rule(const FieldSampler& s) {
  if (auto* t = dynamic_cast<const ShiftTransform*>(&s)) return &t->rule();
  if (auto* t = dynamic_cast<const TiltedSampler*>(&s)) return find_quadrature_rule(*t->base());
  if (auto* t = dynamic_cast<const TailSampler*>(&s)) return find_quadrature_rule(*t->theta());
  return nullptr;
}

namespace {

struct SideResult {
  MCEstimate est;
  double max_snap = 0.0;
  std::size_t zero_weight = 0;
};

/// E[w * summand(values)] over n replicates of `source` at `sites`.
SideResult run_side(const FieldSampler& source, const PointSet& sites, std::size_t n, const RunOptions& opts,
                    const std::function<double(const Values&)>& summand) {
  auto bound = source.bind(sites);
  std::vector<SideResult> parts(chunk_count(n, opts));
  for_each_chunk(n, opts, [&](std::size_t c, std::size_t begin, std::size_t end) {
    SideResult p;
    Draw d;
    for (std::size_t r = begin; r < end; ++r) {
      RngStream rng = derive_rng_stream(opts.master_seed, opts.stream, r);
      bound->sample(rng, d);
      p.max_snap = std::max(p.max_snap, d.snap);
      if (d.weight == 0.0) {
        ++p.zero_weight;
        p.est.add(0.0);
        continue;
      }
      p.est.add(d.weight * summand(d.values));
    }
    parts[c] = p;
  });
  SideResult out;
  for (const auto& p : parts) {
    out.est.merge(p.est);
    out.max_snap = std::max(out.max_snap, p.max_snap);
    out.zero_weight += p.zero_weight;
  }
  return out;
}

/// Sample kurtosis m4 / m2^2 of the values.
double kurtosis(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d2 = (x - mean) * (x - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(v.size());
  m4 /= static_cast<double>(v.size());
  return m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
}

PointSet with_point(const PointSet& base, std::span<const double> p) {
  PointSet out = base;
  out.push_back(p);
  return out;
}

}  // namespace

IdentityReport verify_identity(const IdentitySpec& spec, const RunOptions& opts) {
  if (!spec.functional || !spec.left || !spec.right) throw ConfigError("identity spec needs a functional and both sources");
  const auto& cfg = spec.left->config();
  const double alpha = cfg.alpha;
  const int l = cfg.dim_l;
  if (!(spec.right->config().alpha == alpha) || spec.right->config().dim_l != l) {
    throw ConfigError("left and right sources have different alpha or dim_l");
  }
  if (static_cast<int>(spec.h.size()) != l) throw ConfigError("shift h must have dim_l coordinates");
  if (spec.n < 2) throw ConfigError("identity check needs n >= 2");
  if (!(spec.confidence > 0.0 && spec.confidence < 1.0)) throw ConfigError("confidence must lie in (0, 1)");

  const auto deg = spec.functional->degree();
  const char* name = to_string(spec.kind).data();
  switch (spec.kind) {
    case IdentityKind::boll:
      if (!deg || std::abs(*deg - alpha) > 1e-12) {
        throw ConfigError(std::string(name) + " needs a functional of degree alpha = " + std::to_string(alpha));
      }
      break;
    case IdentityKind::boll22:
    case IdentityKind::do20:
      if (!deg || *deg != 0.0) throw ConfigError(std::string(name) + " needs a functional of degree 0");
      break;
    case IdentityKind::tyy:
      if (!(spec.x > 0.0) || !std::isfinite(spec.x)) throw ConfigError("tyy needs x > 0");
      break;
  }
  for (const auto* src : {spec.left.get(), spec.right.get()}) {
    if (const auto* rule = find_quadrature_rule(*src); rule && !rule->on_lattice(spec.h)) {
      throw ConfigError("shift h is not on the quadrature lattice (step " + std::to_string(rule->step()) + ")");
    }
  }

  IdentityReport r;
  r.identity = std::string(name);
  r.functional = spec.functional->descriptor();
  r.h = spec.h;
  if (spec.kind == IdentityKind::tyy) r.x = spec.x;
  r.n = spec.n;
  r.confidence = spec.confidence;
  r.seed = opts.master_seed;
  r.workers = opts.workers;
  r.left_source = spec.left->describe();
  r.right_source = spec.right->describe();

  int side_index = 0;
  for (const auto* src : {spec.left.get(), spec.right.get()}) {
    if (const auto* t = dynamic_cast<const ShiftTransform*>(src)) {
      if (auto diag = t->check_finite_s(spec.pilot_n, opts.with_stream(3))) {
        r.diagnostics[side_index == 0 ? "left_finite_s" : "right_finite_s"] = diag->to_json();
      }
    }
    ++side_index;
  }

  const Functional& f = *spec.functional;
  const PointSet& logical = f.sites();
  const auto m = static_cast<Eigen::Index>(logical.size());
  const PointSet shifted = shift_points(logical, spec.h);
  std::vector<double> minus_h = spec.h;
  for (auto& v : minus_h) v = -v;
  const std::vector<double> zero(static_cast<std::size_t>(l), 0.0);
  auto pw = [alpha](double v) { return alpha == 1.0 ? v : std::pow(v, alpha); };
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;

  PointSet left_sites(l), right_sites(l);
  std::function<double(const Values&)> left_fn, right_fn;
  double right_factor = 1.0;
  const double x = spec.x;
  switch (spec.kind) {
    case IdentityKind::boll:
      left_sites = logical;
      right_sites = shifted;
      left_fn = [&](const Values& v) { return f.eval(v, idx); };
      right_fn = left_fn;
      break;
    case IdentityKind::boll22:
      left_sites = with_point(logical, spec.h);
      right_sites = with_point(shifted, zero);
      left_fn = [&, m](const Values& v) { return pw(row_norm(v, m, cfg.norm)) * f.eval(v, idx); };
      right_fn = left_fn;
      break;
    case IdentityKind::do20:
      left_sites = with_point(logical, spec.h);
      right_sites = with_point(shifted, minus_h);
      left_fn = [&, m](const Values& v) { return pw(row_norm(v, m, cfg.norm)) * f.eval(v, idx); };
      right_fn = [&, m](const Values& v) {
        return row_norm(v, m, cfg.norm) > 1e-300 ? f.eval(v, idx) : 0.0;
      };
      break;
    case IdentityKind::tyy:
      left_sites = with_point(shifted, minus_h);
      right_sites = with_point(logical, spec.h);
      left_fn = [&, m, x](const Values& v) {
        if (!(x * row_norm(v, m, cfg.norm) > 1.0)) return 0.0;
        const Values scaled = x * v;
        return f.eval(scaled, idx);
      };
      right_fn = [&, m, x](const Values& v) {
        return row_norm(v, m, cfg.norm) > x ? f.eval(v, idx) : 0.0;
      };
      right_factor = pw(x);
      break;
  }

  bool heavy = false;
  if (spec.kind == IdentityKind::tyy && !f.bounded()) {
    const std::size_t pn = std::min<std::size_t>(spec.n, std::max<std::size_t>(spec.pilot_n, 1000));
    auto bound = spec.right->bind(right_sites);
    std::vector<double> vals(pn);
    const RunOptions popts = opts.with_stream(4);
    for_each_chunk(pn, popts, [&](std::size_t, std::size_t begin, std::size_t end) {
      Draw d;
      for (std::size_t i = begin; i < end; ++i) {
        RngStream rng = derive_rng_stream(popts.master_seed, popts.stream, i);
        bound->sample(rng, d);
        vals[i] = d.weight == 0.0 ? 0.0 : d.weight * right_fn(d.values);
      }
    });
    const double k = kurtosis(vals);
    r.diagnostics["pilot_kurtosis"] = k;
    heavy = !(k <= 100.0);
  }

  const SideResult left = run_side(*spec.left, left_sites, spec.n, opts.with_stream(1), left_fn);
  SideResult right = run_side(*spec.right, right_sites, spec.n, opts.with_stream(2), right_fn);
  r.left = left.est;
  r.right = right_factor == 1.0 ? right.est
                                : MCEstimate(right_factor * right.est.mean(), right_factor * right_factor * right.est.m2(),
                                             right.est.count());
  r.diagnostics["max_snap"] = std::max(left.max_snap, right.max_snap);
  r.diagnostics["left_zero_weight"] = left.zero_weight;
  r.diagnostics["right_zero_weight"] = right.zero_weight;
  welch_verdict(r);
  if (heavy) {
    r.verdict = Verdict::inconclusive;
    r.diagnostics["unbounded_functional"] = "pilot kurtosis above 100; verdict withheld";
  }
  return r;
}

}  // namespace shiftgen
