#include "shiftgen/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "shiftgen/errors.hpp"
#include "shiftgen/representors.hpp"
#include "shiftgen/transforms.hpp"

namespace shiftgen {

namespace {

using nlohmann::json;

json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size()) return v;
  }
  {
    double v = 0.0;
    const char* b = s.data();
    if (!s.empty() && s[0] == '+') ++b;
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size()) return v;
  }
  if (s == ".inf" || s == ".Inf" || s == "+.inf") return std::numeric_limits<double>::infinity();
  return s;
}

json yaml_to_json(const YAML::Node& node, const std::string& ptr, std::map<std::string, int>& lines) {
  if (node.Mark().line >= 0) lines[ptr.empty() ? "/" : ptr] = node.Mark().line + 1;
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      std::size_t i = 0;
      for (const auto& child : node) arr.push_back(yaml_to_json(child, ptr + "/" + std::to_string(i++), lines));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (obj.contains(key)) {
          throw ConfigError("line " + std::to_string(kv.first.Mark().line + 1) + ": duplicate key '" + key + "'");
        }
        lines[ptr + "/" + key] = kv.first.Mark().line + 1;
        obj[key] = yaml_to_json(kv.second, ptr + "/" + key, lines);
        lines[ptr + "/" + key] = kv.first.Mark().line + 1;
      }
      return obj;
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------------------------------------
// Schema

class Checker {
 public:
  explicit Checker(const LoadedConfig& cfg) : cfg_(cfg) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    std::string where = cfg_.source_name;
    std::string p = ptr;
    while (true) {
      auto it = cfg_.lines.find(p.empty() ? "/" : p);
      if (it != cfg_.lines.end()) {
        where += ":" + std::to_string(it->second);
        break;
      }
      const auto slash = p.rfind('/');
      if (slash == std::string::npos || p.empty()) break;
      p = p.substr(0, slash);
    }
    throw ConfigError(where + ": " + msg + " (at " + (ptr.empty() ? "/" : ptr) + ")");
  }

  void keys(const json& node, const std::string& ptr, const std::set<std::string>& allowed) const {
    if (!node.is_object()) fail(ptr, "expected a mapping");
    for (const auto& [k, v] : node.items()) {
      if (!allowed.count(k)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(ptr + "/" + k, "unknown key '" + k + "' (allowed: " + list + ")");
      }
    }
  }

  std::string kind(const json& node, const std::string& ptr) const {
    if (!node.is_object()) fail(ptr, "expected a mapping with a 'kind'");
    if (!node.contains("kind") || !node.at("kind").is_string()) fail(ptr, "missing string key 'kind'");
    return node.at("kind").get<std::string>();
  }

  void top(const json& doc) const {
    keys(doc, "", {"field", "variogram", "gaussian", "window", "shift_density", "mc", "representor", "simulate",
                   "exponent", "transform", "verify", "integrate", "validate", "overrides"});
    if (doc.contains("field")) keys(doc["field"], "/field", {"alpha", "dim_d", "dim_l", "norm"});
    if (doc.contains("variogram")) keys(doc["variogram"], "/variogram", {"theta", "hurst"});
    if (doc.contains("gaussian")) keys(doc["gaussian"], "/gaussian", {"jitter"});
    if (doc.contains("window")) keys(doc["window"], "/window", {"half_width", "step"});
    if (doc.contains("shift_density")) density(doc["shift_density"], "/shift_density");
    if (doc.contains("mc")) keys(doc["mc"], "/mc", {"n", "master_seed", "workers", "chunk"});
    if (doc.contains("representor")) source(doc["representor"], "/representor");
    if (doc.contains("simulate")) {
      keys(doc["simulate"], "/simulate", {"sites", "n", "dehaan"});
      if (doc["simulate"].contains("dehaan")) {
        keys(doc["simulate"]["dehaan"], "/simulate/dehaan", {"max_terms", "stop_quantile", "sup_bound_estimate", "pilot_n"});
      }
    }
    if (doc.contains("exponent")) keys(doc["exponent"], "/exponent", {"sites", "x"});
    if (doc.contains("transform")) {
      keys(doc["transform"], "/transform", {"variant", "sites", "n_paths", "separant", "pilot_n"});
    }
    if (doc.contains("verify")) {
      const auto& v = doc["verify"];
      keys(v, "/verify", {"identity", "functional", "h", "x", "left", "right", "confidence", "pilot_n"});
      if (v.contains("functional")) functional(v["functional"], "/verify/functional");
      if (v.contains("left")) source(v["left"], "/verify/left");
      if (v.contains("right")) source(v["right"], "/verify/right");
    }
    if (doc.contains("integrate")) {
      keys(doc["integrate"], "/integrate", {"integrand", "half_width"});
      if (doc["integrate"].contains("integrand")) integrand(doc["integrate"]["integrand"], "/integrate/integrand");
    }
    if (doc.contains("validate")) keys(doc["validate"], "/validate", {"separant"});
    if (doc.contains("overrides") && !doc["overrides"].is_array()) fail("/overrides", "expected a list");
  }

  void density(const json& node, const std::string& ptr) const {
    const auto k = kind(node, ptr);
    if (k == "gaussian") {
      keys(node, ptr, {"kind", "sigma"});
    } else if (k == "uniform_window") {
      keys(node, ptr, {"kind", "half_width", "allow_nonpositive"});
    } else {
      fail(ptr + "/kind", "unknown shift density '" + k + "' (expected gaussian or uniform_window)");
    }
  }

  void source(const json& node, const std::string& ptr) const {
    const auto k = kind(node, ptr);
    if (k == "brown_resnick") {
      keys(node, ptr, {"kind", "variogram", "jitter"});
      if (node.contains("variogram")) keys(node["variogram"], ptr + "/variogram", {"theta", "hurst"});
    } else if (k == "constant") {
      keys(node, ptr, {"kind"});
    } else if (k == "cluster_profile") {
      keys(node, ptr, {"kind", "profile"});
      if (node.contains("profile")) {
        keys(node["profile"], ptr + "/profile", {"shape", "sigma", "width", "scale", "normalize", "allow_unnormalized"});
      }
    } else if (k == "theta" || k == "tail") {
      keys(node, ptr, {"kind", "base", "mode", "pool"});
      if (node.contains("base")) source(node["base"], ptr + "/base");
    } else if (k == "transform") {
      keys(node, ptr, {"kind", "base", "variant", "shift_density", "window"});
      if (node.contains("base")) source(node["base"], ptr + "/base");
      if (node.contains("shift_density")) density(node["shift_density"], ptr + "/shift_density");
      if (node.contains("window")) keys(node["window"], ptr + "/window", {"half_width", "step"});
    } else if (k == "signed_split") {
      keys(node, ptr, {"kind", "base"});
      if (node.contains("base")) source(node["base"], ptr + "/base");
    } else {
      fail(ptr + "/kind", "unknown source kind '" + k +
                              "' (expected brown_resnick, constant, cluster_profile, theta, tail, transform or signed_split)");
    }
  }

  void functional(const json& node, const std::string& ptr) const {
    const auto k = kind(node, ptr);
    static const std::map<std::string, std::set<std::string>> schema = {
        {"weighted_max", {"kind", "sites", "coeffs"}},
        {"weighted_sum", {"kind", "sites", "coeffs"}},
        {"ratio", {"kind", "site", "sites", "weights"}},
        {"s_gamma_quadrature", {"kind", "rule", "gamma"}},
        {"indicator_s_gamma", {"kind", "inner", "s_gamma", "a"}},
        {"times_s_gamma", {"kind", "inner", "s_gamma"}},
        {"over_s_gamma", {"kind", "inner", "s_gamma"}},
        {"bounded_zero_hom", {"kind", "s", "u"}},
        {"threshold", {"kind", "site", "of", "level"}},
        {"capped", {"kind", "site", "cap"}},
        {"constant", {"kind", "value"}},
    };
    auto it = schema.find(k);
    if (it == schema.end()) fail(ptr + "/kind", "unknown functional kind '" + k + "'");
    keys(node, ptr, it->second);
    if (node.contains("inner")) functional(node["inner"], ptr + "/inner");
    if (node.contains("of")) functional(node["of"], ptr + "/of");
    if (node.contains("s_gamma")) {
      json sg = node["s_gamma"];
      if (sg.is_object() && !sg.contains("kind")) sg["kind"] = "s_gamma_quadrature";
      functional(sg, ptr + "/s_gamma");
    }
    if (node.contains("rule")) keys(node["rule"], ptr + "/rule", {"half_width", "step"});
    if (node.contains("gamma") && !node["gamma"].is_null()) density(node["gamma"], ptr + "/gamma");
  }

  void integrand(const json& node, const std::string& ptr) const {
    const auto k = kind(node, ptr);
    if (k == "gaussian_pdf") {
      keys(node, ptr, {"kind", "sigma"});
    } else if (k == "indicator") {
      keys(node, ptr, {"kind", "lower", "upper"});
    } else if (k == "constant") {
      keys(node, ptr, {"kind", "value"});
    } else {
      fail(ptr + "/kind", "unknown integrand '" + k + "' (expected gaussian_pdf, indicator or constant)");
    }
  }

 private:
  const LoadedConfig& cfg_;
};

/// Fills missing keys of `target` from `defaults` (one level).
void fill(json& target, const json& defaults) {
  if (!target.is_object()) target = json::object();
  for (const auto& [k, v] : defaults.items()) {
    if (!target.contains(k)) target[k] = v;
  }
}

double num(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError(where + "." + key + " must be a number");
  return j.at(key).get<double>();
}

std::uint64_t count(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + " is required");
  const auto& v = j.at(key);
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(where + "." + key + " must be a nonnegative integer");
}

}  // namespace

LoadedConfig load_config_text(const std::string& text, const std::string& source_name) {
  LoadedConfig cfg;
  cfg.source_name = source_name;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.mark.line + 1) + ": YAML syntax error: " + e.msg);
  }
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError(source_name + ": the top level must be a mapping");
  try {
    cfg.doc = yaml_to_json(root, "", cfg.lines);
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ":" + e.what());
  }
  if (cfg.doc.contains("overrides") && cfg.doc["overrides"].is_array()) {
    for (const auto& o : cfg.doc["overrides"]) {
      if (o.is_string()) cfg.overrides.push_back(o.get<std::string>());
    }
  }
  return cfg;
}

LoadedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str(), path);
}

void apply_override(LoadedConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    std::map<std::string, int> ignore;
    value = yaml_to_json(YAML::Load(text), "", ignore);
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + assignment + "': cannot parse value: " + e.msg);
  }
  json* node = &cfg.doc;
  std::string ptr;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override '" + assignment + "': '" + ptr + "' is not a mapping");
      *node = json::object();
    }
    ptr += "/" + key;
    cfg.lines.erase(ptr);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
  cfg.overrides.push_back(assignment);
}

void validate_config(const LoadedConfig& cfg) { Checker(cfg).top(cfg.doc); }

nlohmann::json resolve_config(const LoadedConfig& cfg, std::string_view command) {
  json doc = cfg.doc;
  fill(doc["field"], {{"alpha", 1.0}, {"dim_d", 1}, {"dim_l", 1}, {"norm", "sup"}});
  fill(doc["variogram"], {{"theta", 1.0}, {"hurst", 0.5}});
  fill(doc["gaussian"], {{"jitter", 1e-10}});
  fill(doc["window"], {{"half_width", 8.125}, {"step", 0.25}});
  if (!doc.contains("shift_density") || !doc["shift_density"].is_object()) {
    doc["shift_density"] = {{"kind", "gaussian"}, {"sigma", 4.0}};
  } else if (doc["shift_density"].value("kind", "") == "gaussian") {
    fill(doc["shift_density"], {{"sigma", 1.0}});
  } else if (doc["shift_density"].value("kind", "") == "uniform_window") {
    fill(doc["shift_density"], {{"half_width", 1.0}, {"allow_nonpositive", false}});
  }
  fill(doc["mc"], {{"n", 100000}, {"master_seed", 1}, {"workers", 1}, {"chunk", 2048}});
  if (!doc.contains("representor") || doc["representor"].is_null()) doc["representor"] = {{"kind", "brown_resnick"}};

  const json origin_site = json::array({0});
  if (command == "simulate-maxstable") {
    fill(doc["simulate"], {{"sites", json::array({0, 1})}, {"n", 100}, {"dehaan", json::object()}});
    fill(doc["simulate"]["dehaan"], {{"max_terms", 500}, {"stop_quantile", 0.9999}, {"pilot_n", 10000}});
  } else if (command == "exponent") {
    fill(doc["exponent"], {{"sites", json::array({0, 1})}});
    if (!doc["exponent"].contains("x")) doc["exponent"]["x"] = std::vector<double>(doc["exponent"]["sites"].size(), 1.0);
  } else if (command == "transform") {
    fill(doc["transform"], {{"variant", "zn_prime_finiteS"}, {"sites", json::array({0, 1})}, {"n_paths", 100},
                            {"pilot_n", 2000}});
  } else if (command == "verify") {
    fill(doc["verify"], {{"identity", "boll"},
                         {"functional", {{"kind", "weighted_max"}, {"sites", json::array({0, 1})}, {"coeffs", {1.0, 1.0}}}},
                         {"h", 0},
                         {"x", 1.0},
                         {"confidence", 0.99},
                         {"pilot_n", 2000}});
    if (!doc["verify"].contains("left")) doc["verify"]["left"] = doc["representor"];
    if (!doc["verify"].contains("right")) doc["verify"]["right"] = doc["verify"]["left"];
  } else if (command == "integrate") {
    fill(doc["integrate"], {{"integrand", {{"kind", "gaussian_pdf"}, {"sigma", 1.0}}}, {"half_width", 4.0}});
  } else if (command == "validate") {
    fill(doc["validate"], {{"separant", nullptr}});
  }
  doc["overrides"] = cfg.overrides;
  return doc;
}

ShiftDensity Experiment::gamma() const { return shift_density_from_json(shift_density, field.dim_l); }

Experiment experiment_from(const nlohmann::json& r) {
  Experiment ex;
  const auto& f = r.at("field");
  ex.field.alpha = num(f, "alpha", "field");
  ex.field.dim_d = static_cast<int>(count(f, "dim_d", "field"));
  ex.field.dim_l = static_cast<int>(count(f, "dim_l", "field"));
  if (!f.at("norm").is_string()) throw ConfigError("field.norm must be a string");
  ex.field.norm = norm_kind_from_string(f.at("norm").get<std::string>());
  ex.field.validate();
  ex.gaussian.variogram.theta = num(r.at("variogram"), "theta", "variogram");
  ex.gaussian.variogram.hurst = num(r.at("variogram"), "hurst", "variogram");
  ex.gaussian.variogram.validate();
  ex.gaussian.jitter = num(r.at("gaussian"), "jitter", "gaussian");
  ex.half_width = num(r.at("window"), "half_width", "window");
  ex.step = num(r.at("window"), "step", "window");
  ex.shift_density = r.at("shift_density");
  const auto& mc = r.at("mc");
  ex.n = count(mc, "n", "mc");
  ex.run.master_seed = count(mc, "master_seed", "mc");
  ex.run.workers = count(mc, "workers", "mc");
  ex.run.chunk = count(mc, "chunk", "mc");
  if (ex.run.workers < 1) throw ConfigError("mc.workers must be >= 1");
  if (ex.run.chunk < 1) throw ConfigError("mc.chunk must be >= 1");
  return ex;
}

SamplerPtr build_source(const nlohmann::json& node, const Experiment& ex) {
  if (!node.is_object() || !node.contains("kind")) throw ConfigError("source needs a 'kind'");
  const auto kind = node.at("kind").get<std::string>();
  auto base_of = [&]() -> SamplerPtr {
    if (!node.contains("base")) return std::make_shared<BrownResnick>(ex.field, ex.gaussian);
    return build_source(node.at("base"), ex);
  };
  auto mode_of = [&]() -> std::optional<TiltMode> {
    if (!node.contains("mode")) return std::nullopt;
    return tilt_mode_from_string(node.at("mode").get<std::string>());
  };
  const int pool = node.contains("pool") ? static_cast<int>(count(node, "pool", kind)) : 64;

  if (kind == "brown_resnick") {
    GaussianSampler g = ex.gaussian;
    if (node.contains("variogram")) {
      const auto& v = node.at("variogram");
      if (v.contains("theta")) g.variogram.theta = num(v, "theta", "variogram");
      if (v.contains("hurst")) g.variogram.hurst = num(v, "hurst", "variogram");
    }
    if (node.contains("jitter")) g.jitter = num(node, "jitter", kind);
    return std::make_shared<BrownResnick>(ex.field, g);
  }
  if (kind == "constant") return std::make_shared<ConstantField>(ex.field);
  if (kind == "cluster_profile") {
    ProfileSpec spec;
    const json p = node.value("profile", json::object());
    spec.shape = profile_shape_from_string(p.value("shape", std::string("gaussian_pdf")));
    const char* param = spec.shape == ProfileShape::gaussian_pdf ? "sigma" : "width";
    spec.param = p.contains(param) ? num(p, param, "profile") : 1.0;
    spec.scale = p.contains("scale") ? num(p, "scale", "profile") : 1.0;
    spec.normalize = p.value("normalize", false);
    spec.allow_unnormalized = p.value("allow_unnormalized", false);
    return std::make_shared<ClusterProfile>(ex.field, spec);
  }
  if (kind == "theta") return std::make_shared<TiltedSampler>(base_of(), mode_of(), pool);
  if (kind == "tail") {
    SamplerPtr base = base_of();
    auto theta = std::dynamic_pointer_cast<const TiltedSampler>(base);
    if (!theta) theta = std::make_shared<TiltedSampler>(base, mode_of(), pool);
    return std::make_shared<TailSampler>(theta);
  }
  if (kind == "transform") {
    if (!node.contains("variant")) throw ConfigError("transform source needs a 'variant'");
    Experiment local = ex;
    if (node.contains("shift_density")) local.shift_density = node.at("shift_density");
    if (node.contains("window")) {
      const auto& w = node.at("window");
      if (w.contains("half_width")) local.half_width = num(w, "half_width", "window");
      if (w.contains("step")) local.step = num(w, "step", "window");
    }
    return std::make_shared<ShiftTransform>(base_of(), local.gamma(), local.rule(),
                                            shift_variant_from_string(node.at("variant").get<std::string>()));
  }
  if (kind == "signed_split") return std::make_shared<SignedSplitField>(base_of());
  throw ConfigError("unknown source kind '" + kind + "'");
}

std::vector<double> vector_from_json(const nlohmann::json& j, int dim, const std::string& what) {
  if (j.is_number()) {
    if (dim != 1) throw ConfigError(what + " must be a list of " + std::to_string(dim) + " numbers");
    return {j.get<double>()};
  }
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(what + " must be a list of " + std::to_string(dim) + " numbers");
  }
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(what + " must contain numbers only");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace shiftgen
