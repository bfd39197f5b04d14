#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "shiftgen/estimate.hpp"
#include "shiftgen/functionals.hpp"
#include "shiftgen/gaussian_field.hpp"
#include "shiftgen/sampler.hpp"

namespace shiftgen {

/// A parsed experiment config. YAML is converted to JSON; `lines` maps JSON pointers to the
/// 1-based source line of each node so schema errors can point at the file.
struct LoadedConfig {
  nlohmann::json doc = nlohmann::json::object();
  std::string source_name;
  std::map<std::string, int> lines;
  std::vector<std::string> overrides;
};

LoadedConfig load_config_text(const std::string& text, const std::string& source_name);
LoadedConfig load_config_file(const std::string& path);

/// Applies `dotted.key=value`; the value is parsed as a YAML scalar or flow collection.
void apply_override(LoadedConfig& cfg, const std::string& assignment);

/// Rejects unknown keys and unknown kinds (ConfigError naming the file, line and key).
void validate_config(const LoadedConfig& cfg);

/// The config with every default materialized for `command`, plus the recorded overrides.
/// Resolving a resolved config is the identity.
nlohmann::json resolve_config(const LoadedConfig& cfg, std::string_view command);

/// Shared experiment settings taken from a resolved config.
struct Experiment {
  FieldConfig field;
  GaussianSampler gaussian;
  double half_width = 8.125;
  double step = 0.25;
  nlohmann::json shift_density;
  RunOptions run;
  std::size_t n = 100000;

  Window window() const { return Window{half_width, field.dim_l}; }
  QuadratureRule rule() const { return QuadratureRule(window(), step); }
  ShiftDensity gamma() const;
};

Experiment experiment_from(const nlohmann::json& resolved);

/// Builds a sampler from a source node (kinds brown_resnick, constant, cluster_profile, theta,
/// tail, transform, signed_split).
SamplerPtr build_source(const nlohmann::json& node, const Experiment& ex);

/// JSON scalar or list to a point of dimension `dim` (a bare number is accepted for any dim
/// only when dim == 1).
std::vector<double> vector_from_json(const nlohmann::json& j, int dim, const std::string& what);

}  // namespace shiftgen
