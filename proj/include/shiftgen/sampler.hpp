#pragma once

#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "shiftgen/core.hpp"
#include "shiftgen/rng.hpp"

namespace shiftgen {

/// One realization at a bound site set.
struct Draw {
  Values values;       ///< rows follow the bound site order
  double weight = 1.0; ///< tilting weight; expectations are E[weight * F(values)]
  double snap = 0.0;   ///< |N - snapped N| when a random shift was applied
};

class FieldSampler;

/// A sampler specialised to a fixed site set (factorizations and lookups cached).
/// Sampling is const and thread-safe; all randomness comes from the caller's stream.
class BoundField {
 public:
  virtual ~BoundField() = default;

  const PointSet& sites() const { return sites_; }
  const FieldConfig& config() const;
  virtual void sample(RngStream& rng, Draw& out) const = 0;

  /// One joint realization at sites() followed by `extra`: rows [0, n) are the bound sites and
  /// rows [n, n + extra.size()) the extra points. The default rebinds the owner at the union.
  virtual void sample_extended(const PointSet& extra, RngStream& rng, Draw& out) const;

 protected:
  BoundField(std::shared_ptr<const FieldSampler> owner, PointSet sites)
      : owner_(std::move(owner)), sites_(std::move(sites)) {}

  std::shared_ptr<const FieldSampler> owner_;
  PointSet sites_;
};

/// Evaluates one joint realization of a random field at any finite point set. Bound fields keep
/// their sampler alive, so samplers must be owned by a std::shared_ptr.
class FieldSampler : public std::enable_shared_from_this<FieldSampler> {
 public:
  explicit FieldSampler(FieldConfig cfg) : cfg_(cfg) { cfg_.validate(); }
  virtual ~FieldSampler() = default;

  const FieldConfig& config() const { return cfg_; }

  virtual std::unique_ptr<BoundField> bind(const PointSet& sites) const = 0;
  /// Structured descriptor, echoed into reports.
  virtual nlohmann::json describe() const = 0;

  /// Value of ||Z(0)|| when it is the same on every draw.
  virtual std::optional<double> deterministic_origin_norm() const { return std::nullopt; }
  /// True when draws may carry weights other than 1.
  virtual bool weighted() const { return false; }

  /// Convenience: one draw at `sites`.
  Draw sample(const PointSet& sites, RngStream& rng) const;

 protected:
  /// shared_from_this() with a ContractError when the sampler is not shared-owned.
  std::shared_ptr<const FieldSampler> self() const;

 private:
  FieldConfig cfg_;
};

inline const FieldConfig& BoundField::config() const { return owner_->config(); }

using SamplerPtr = std::shared_ptr<const FieldSampler>;

}  // namespace shiftgen
