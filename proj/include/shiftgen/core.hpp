#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace shiftgen {

/// Field values at a finite set of sites: one row per site, one column per component.
using Values = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class NormKind { sup, euclidean, l1 };

std::string_view to_string(NormKind kind);
NormKind norm_kind_from_string(std::string_view name);

/// Global field configuration: homogeneity index, value and parameter dimensions, norm on R^d.
struct FieldConfig {
  double alpha = 1.0;
  int dim_d = 1;
  int dim_l = 1;
  NormKind norm = NormKind::sup;

  /// Throws ConfigError unless alpha > 0, dim_d >= 1 and dim_l >= 1.
  void validate() const;
  bool operator==(const FieldConfig&) const = default;
};

/// Norm of a finite vector in R^d. Throws ConfigError on non-finite input.
double norm_value(std::span<const double> v, NormKind kind);
inline double norm_value(std::span<const double> v, const FieldConfig& cfg) {
  return norm_value(v, cfg.norm);
}

/// Norm of row `i` of `values`, without the finiteness check (hot path).
double row_norm(const Values& values, Eigen::Index i, NormKind kind);

/// Ordered list of points in R^l. Index identity is part of the contract: samplers return rows
/// in exactly this order. Duplicates are allowed.
class PointSet {
 public:
  explicit PointSet(int dim = 1);
  PointSet(int dim, std::vector<double> coords);

  /// One-dimensional convenience constructor.
  static PointSet line(std::initializer_list<double> xs);
  static PointSet line(std::span<const double> xs);
  /// The origin of R^l as a one-point set.
  static PointSet origin(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  void push_back(std::span<const double> p);
  void append(const PointSet& other);
  const std::vector<double>& coords() const { return coords_; }

  bool operator==(const PointSet&) const = default;

 private:
  int dim_;
  std::vector<double> coords_;
};

bool is_origin(std::span<const double> p);

/// Indices i such that point i equals (exactly) some earlier point.
std::vector<std::size_t> duplicate_indices(const PointSet& pts);

/// {t_i - h}, order preserved. Evaluating a field at the result yields B^h Z at `pts`.
PointSet shift_points(const PointSet& pts, std::span<const double> h);

/// Deduplicating site accumulator keyed on exact coordinate equality.
class SiteTable {
 public:
  explicit SiteTable(int dim);
  /// Row of `p` in the table, inserting it if new.
  std::size_t add(std::span<const double> p);
  /// Rows of every point of `pts`, in order.
  std::vector<std::size_t> add(const PointSet& pts);
  /// Row of `p`, or -1 when absent.
  std::ptrdiff_t find(std::span<const double> p) const;
  const PointSet& sites() const { return sites_; }

 private:
  PointSet sites_;
  std::map<std::vector<double>, std::size_t> index_;
};

struct SiteUnion {
  PointSet sites;
  std::vector<std::size_t> from_a;  ///< row in `sites` of each point of a
  std::vector<std::size_t> from_b;  ///< row in `sites` of each point of b
};

/// Deduplicated union (a's points first, then b's new points) with index maps.
SiteUnion union_sites(const PointSet& a, const PointSet& b);

/// A finite realization: values(i, :) = Z(sites[i]).
struct PathSample {
  PointSet sites;
  Values values;

  /// Throws ConfigError if row count differs from site count or any entry is non-finite.
  static PathSample make(PointSet sites, Values values);
};

/// The cube W_m = [-m, m]^l.
struct Window {
  double half_width = 1.0;
  int dim = 1;

  void validate() const;
  double volume() const;
  bool contains(std::span<const double> p) const;
};

/// Integer lattice points of a window (default truncation of the separant).
PointSet integer_lattice(const Window& w);

}  // namespace shiftgen
