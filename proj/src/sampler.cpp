#include "shiftgen/sampler.hpp"

#include "shiftgen/errors.hpp"

namespace shiftgen {

void BoundField::sample_extended(const PointSet& extra, RngStream& rng, Draw& out) const {
  const SiteUnion u = union_sites(sites_, extra);
  auto joint = owner_->bind(u.sites);
  Draw tmp;
  joint->sample(rng, tmp);
  const auto n = sites_.size();
  out.values.resize(static_cast<Eigen::Index>(n + extra.size()), tmp.values.cols());
  for (std::size_t i = 0; i < n; ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = tmp.values.row(static_cast<Eigen::Index>(u.from_a[i]));
  }
  for (std::size_t i = 0; i < extra.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(n + i)) = tmp.values.row(static_cast<Eigen::Index>(u.from_b[i]));
  }
  out.weight = tmp.weight;
  out.snap = tmp.snap;
}

Draw FieldSampler::sample(const PointSet& sites, RngStream& rng) const {
  Draw d;
  bind(sites)->sample(rng, d);
  return d;
}

std::shared_ptr<const FieldSampler> FieldSampler::self() const {
  auto p = weak_from_this().lock();
  if (!p) throw ContractError("field samplers must be owned by a std::shared_ptr (use std::make_shared)");
  return p;
}

}  // namespace shiftgen
