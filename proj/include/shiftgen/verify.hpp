#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "shiftgen/estimate.hpp"
#include "shiftgen/functionals.hpp"
#include "shiftgen/report.hpp"
#include "shiftgen/sampler.hpp"

namespace shiftgen {

/// boll:   E F(Z) = E F(B^h Zhat)                                   (F of degree alpha)
/// boll22: E ||Z(h)||^a G(Z) = E ||Zhat(0)||^a G(B^h Zhat)          (G of degree 0)
/// do20:   E ||Theta(h)||^a G(Theta) = E 1{Theta(-h) != 0} G(B^h Theta)   (degree 0)
/// tyy:    E G(x B^h Y) 1{x ||Y(-h)|| > 1} = x^a E G(Y) 1{||Y(h)|| > x}  (any nonnegative G)
enum class IdentityKind { boll, boll22, do20, tyy };

std::string_view to_string(IdentityKind k);
IdentityKind identity_kind_from_string(std::string_view name);

struct IdentitySpec {
  IdentityKind kind = IdentityKind::boll;
  FunctionalPtr functional;
  std::vector<double> h;
  double x = 1.0;  ///< tyy only
  SamplerPtr left;
  SamplerPtr right;
  std::size_t n = 100000;
  double confidence = 0.99;
  std::size_t pilot_n = 2000;  ///< finite-S and kurtosis pilots
};

/// Paired Monte Carlo comparison of both sides on independent lanes (left 1, right 2, pilots 3
/// and 4). Degree mismatches, off-lattice shifts and failing finite-S pilots are ConfigErrors.
IdentityReport verify_identity(const IdentitySpec& spec, const RunOptions& opts);

/// Quadrature rule of the first shift transform found in a sampler chain, if any.
const QuadratureRule* find_quadrature_rule(const FieldSampler& s);

}  // namespace shiftgen
