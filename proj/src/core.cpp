#include "shiftgen/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shiftgen/errors.hpp"

namespace shiftgen {

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::sup:
      return "sup";
    case NormKind::euclidean:
      return "euclidean";
    case NormKind::l1:
      return "l1";
  }
  return "sup";
}

NormKind norm_kind_from_string(std::string_view name) {
  if (name == "sup") return NormKind::sup;
  if (name == "euclidean") return NormKind::euclidean;
  if (name == "l1") return NormKind::l1;
  throw ConfigError("unknown norm '" + std::string(name) + "' (expected sup, euclidean or l1)");
}

void FieldConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive and finite");
  if (dim_d < 1) throw ConfigError("dim_d must be >= 1");
  if (dim_l < 1) throw ConfigError("dim_l must be >= 1");
}

double norm_value(std::span<const double> v, NormKind kind) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ConfigError("norm_value: non-finite component");
  }
  switch (kind) {
    case NormKind::sup: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
    case NormKind::euclidean: {
      // scaled to avoid overflow for large entries
      double scale = 0.0;
      for (double x : v) scale = std::max(scale, std::abs(x));
      if (scale == 0.0) return 0.0;
      double s = 0.0;
      for (double x : v) s += (x / scale) * (x / scale);
      return scale * std::sqrt(s);
    }
    case NormKind::l1: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
  }
  return 0.0;
}

double row_norm(const Values& values, Eigen::Index i, NormKind kind) {
  if (values.cols() == 1) return std::abs(values(i, 0));
  switch (kind) {
    case NormKind::sup:
      return values.row(i).cwiseAbs().maxCoeff();
    case NormKind::euclidean:
      return values.row(i).stableNorm();
    case NormKind::l1:
      return values.row(i).cwiseAbs().sum();
  }
  return 0.0;
}

PointSet::PointSet(int dim) : dim_(dim) {
  if (dim < 1) throw ConfigError("PointSet dimension must be >= 1");
}

PointSet::PointSet(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim < 1) throw ConfigError("PointSet dimension must be >= 1");
  if (coords_.size() % static_cast<std::size_t>(dim) != 0) {
    throw ConfigError("PointSet coordinate count is not a multiple of the dimension");
  }
}

PointSet PointSet::line(std::initializer_list<double> xs) { return PointSet(1, std::vector<double>(xs)); }

PointSet PointSet::line(std::span<const double> xs) {
  return PointSet(1, std::vector<double>(xs.begin(), xs.end()));
}

PointSet PointSet::origin(int dim) {
  return PointSet(dim, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
}

void PointSet::push_back(std::span<const double> p) {
  if (static_cast<int>(p.size()) != dim_) throw ConfigError("PointSet::push_back: dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

void PointSet::append(const PointSet& other) {
  if (other.dim_ != dim_) throw ConfigError("PointSet::append: dimension mismatch");
  coords_.insert(coords_.end(), other.coords_.begin(), other.coords_.end());
}

bool is_origin(std::span<const double> p) {
  return std::all_of(p.begin(), p.end(), [](double x) { return x == 0.0; });
}

std::vector<std::size_t> duplicate_indices(const PointSet& pts) {
  SiteTable table(pts.dim());
  std::vector<std::size_t> dups;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (table.find(pts[i]) >= 0) {
      dups.push_back(i);
    } else {
      table.add(pts[i]);
    }
  }
  return dups;
}

PointSet shift_points(const PointSet& pts, std::span<const double> h) {
  if (static_cast<int>(h.size()) != pts.dim()) throw ConfigError("shift_points: dimension mismatch");
  std::vector<double> out = pts.coords();
  const auto l = h.size();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= h[i % l];
  return PointSet(pts.dim(), std::move(out));
}

SiteTable::SiteTable(int dim) : sites_(dim) {}

std::size_t SiteTable::add(std::span<const double> p) {
  std::vector<double> key(p.begin(), p.end());
  for (double& x : key) x += 0.0;  // -0.0 -> +0.0
  auto [it, inserted] = index_.try_emplace(std::move(key), sites_.size());
  if (inserted) sites_.push_back(p);
  return it->second;
}

std::vector<std::size_t> SiteTable::add(const PointSet& pts) {
  std::vector<std::size_t> rows(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) rows[i] = add(pts[i]);
  return rows;
}

std::ptrdiff_t SiteTable::find(std::span<const double> p) const {
  std::vector<double> key(p.begin(), p.end());
  for (double& x : key) x += 0.0;
  auto it = index_.find(key);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

SiteUnion union_sites(const PointSet& a, const PointSet& b) {
  if (a.dim() != b.dim()) throw ConfigError("union_sites: dimension mismatch");
  SiteTable table(a.dim());
  SiteUnion u{PointSet(a.dim()), {}, {}};
  u.from_a = table.add(a);
  u.from_b = table.add(b);
  u.sites = table.sites();
  return u;
}

PathSample PathSample::make(PointSet sites, Values values) {
  if (static_cast<std::size_t>(values.rows()) != sites.size()) {
    throw ConfigError("PathSample: row count differs from site count");
  }
  if (!values.allFinite()) throw ConfigError("PathSample: non-finite value");
  return PathSample{std::move(sites), std::move(values)};
}

void Window::validate() const {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("window half_width must be positive");
  if (dim < 1) throw ConfigError("window dimension must be >= 1");
}

double Window::volume() const { return std::pow(2.0 * half_width, dim); }

bool Window::contains(std::span<const double> p) const {
  return std::all_of(p.begin(), p.end(), [this](double x) { return std::abs(x) <= half_width; });
}

PointSet integer_lattice(const Window& w) {
  w.validate();
  const auto k = static_cast<long>(std::floor(w.half_width));
  const long side = 2 * k + 1;
  long total = 1;
  for (int j = 0; j < w.dim; ++j) total *= side;
  PointSet pts(w.dim);
  std::vector<double> p(static_cast<std::size_t>(w.dim));
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int j = 0; j < w.dim; ++j) {
      p[static_cast<std::size_t>(j)] = static_cast<double>(rem % side - k);
      rem /= side;
    }
    pts.push_back(p);
  }
  return pts;
}

}  // namespace shiftgen
