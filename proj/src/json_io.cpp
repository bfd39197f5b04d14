#include "shiftgen/json_io.hpp"

#include "shiftgen/errors.hpp"

namespace shiftgen {

nlohmann::json point_to_json(std::span<const double> p) {
  if (p.size() == 1) return p[0];
  return nlohmann::json(std::vector<double>(p.begin(), p.end()));
}

nlohmann::json to_json(const PointSet& pts) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) arr.push_back(point_to_json(pts[i]));
  return arr;
}

std::vector<double> point_from_json(const nlohmann::json& j, int dim) {
  if (j.is_number()) {
    if (dim != 1) throw ConfigError("scalar point given but dim_l = " + std::to_string(dim));
    return {j.get<double>()};
  }
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError("point must be an array of " + std::to_string(dim) + " numbers");
  }
  std::vector<double> p;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError("point coordinates must be numbers");
    p.push_back(x.get<double>());
  }
  return p;
}

PointSet points_from_json(const nlohmann::json& j, int dim) {
  if (!j.is_array()) throw ConfigError("site list must be an array");
  PointSet pts(dim);
  for (const auto& p : j) pts.push_back(point_from_json(p, dim));
  return pts;
}

nlohmann::json to_json(const FieldConfig& cfg) {
  return {{"alpha", cfg.alpha}, {"dim_d", cfg.dim_d}, {"dim_l", cfg.dim_l}, {"norm", std::string(to_string(cfg.norm))}};
}

nlohmann::json to_json(const MCEstimate& e) {
  return {{"mean", e.mean()}, {"se", e.standard_error()}, {"n", e.count()}};
}

}  // namespace shiftgen
