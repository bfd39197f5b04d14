#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "shiftgen/core.hpp"
#include "shiftgen/estimate.hpp"

namespace shiftgen {

/// Points as JSON: plain numbers when l = 1, coordinate arrays otherwise.
nlohmann::json to_json(const PointSet& pts);
nlohmann::json point_to_json(std::span<const double> p);
/// Accepts numbers (l = 1 only) or arrays of length l.
PointSet points_from_json(const nlohmann::json& j, int dim);
std::vector<double> point_from_json(const nlohmann::json& j, int dim);

nlohmann::json to_json(const FieldConfig& cfg);
/// {mean, se, n}
nlohmann::json to_json(const MCEstimate& e);

}  // namespace shiftgen
