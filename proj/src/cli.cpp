#include "shiftgen/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>

#include "shiftgen/config.hpp"
#include "shiftgen/errors.hpp"
#include "shiftgen/json_io.hpp"
#include "shiftgen/maxstable.hpp"
#include "shiftgen/representors.hpp"
#include "shiftgen/transforms.hpp"
#include "shiftgen/verify.hpp"

namespace shiftgen {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

struct Context {
  std::string command;
  json config;
  Experiment ex;
  std::filesystem::path out_dir;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  bool fail_on_inconclusive = false;
};

json envelope(const Context& c) {
  return {{"command", c.command}, {"config", c.config}, {"seed", c.ex.run.master_seed}, {"workers", c.ex.run.workers}};
}

void write_json(const Context& c, const json& report) {
  const auto path = c.out_dir / (c.command + ".json");
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << report.dump(2) << '\n';
  *c.out << report.dump(2) << '\n';
}

std::ofstream open_csv(const Context& c, const std::string& name, const std::string& header) {
  const auto path = c.out_dir / name;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << "# config: " << c.config.dump() << '\n';
  f << "# seed: " << c.ex.run.master_seed << '\n';
  f << header << '\n';
  return f;
}

std::string csv_header(const std::string& first, int l, int d, const std::vector<std::string>& tail) {
  std::string h = first;
  for (int i = 1; i <= l; ++i) h += ",t_" + std::to_string(i);
  for (int i = 1; i <= d; ++i) h += ",x_" + std::to_string(i);
  for (const auto& t : tail) h += "," + t;
  return h;
}

void csv_row(std::ostream& f, std::size_t rep, std::span<const double> t, const Values& v, Eigen::Index row,
             const std::vector<double>& tail) {
  f << rep;
  for (double x : t) f << ',' << fmt(x);
  for (Eigen::Index c = 0; c < v.cols(); ++c) f << ',' << fmt(v(row, c));
  for (double x : tail) f << ',' << fmt(x);
  f << '\n';
}

PointSet sites_from(const json& j, int l, const std::string& what) {
  try {
    return points_from_json(j, l);
  } catch (const ConfigError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

int cmd_simulate(Context& c) {
  const auto& blk = c.config.at("simulate");
  const auto rep = build_source(c.config.at("representor"), c.ex);
  const PointSet sites = sites_from(blk.at("sites"), c.ex.field.dim_l, "simulate.sites");
  const std::size_t n = blk.at("n").get<std::size_t>();
  const auto& dh = blk.at("dehaan");
  DeHaanConfig dcfg;
  dcfg.max_terms = dh.at("max_terms").get<std::size_t>();
  dcfg.stop_quantile = dh.at("stop_quantile").get<double>();
  dcfg.pilot_n = dh.at("pilot_n").get<std::size_t>();
  if (dh.contains("sup_bound_estimate") && !dh.at("sup_bound_estimate").is_null()) {
    dcfg.sup_bound_estimate = dh.at("sup_bound_estimate").get<double>();
  }
  dcfg.validate();
  const bool piloted = !dcfg.sup_bound_estimate;
  if (piloted) dcfg.sup_bound_estimate = dehaan_pilot_bound(*rep, sites, dcfg, c.ex.run.with_stream(3));

  auto bound = rep->bind(sites);
  std::vector<std::optional<DeHaanSample>> samples(n);
  const RunOptions opts = c.ex.run.with_stream(0);
  for_each_chunk(n, opts, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      RngStream rng = derive_rng_stream(opts.master_seed, opts.stream, r);
      samples[r] = dehaan_sample(*bound, dcfg, rng);
    }
  });

  auto csv = open_csv(c, "maxstable.csv", csv_header("replicate", c.ex.field.dim_l, rep->config().dim_d, {"truncation_diag"}));
  std::size_t warnings = 0;
  double max_diag = 0.0, terms = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& s = *samples[r];
    for (std::size_t i = 0; i < sites.size(); ++i) {
      csv_row(csv, r, sites[i], s.path.values, static_cast<Eigen::Index>(i), {s.truncation_diag});
    }
    warnings += s.truncation_warning ? 1 : 0;
    max_diag = std::max(max_diag, s.truncation_diag);
    terms += static_cast<double>(s.terms);
  }
  json report = envelope(c);
  report["representor"] = rep->describe();
  report["result"] = {{"paths", n}, {"csv", "maxstable.csv"}};
  report["diagnostics"] = {{"sup_bound_estimate", *dcfg.sup_bound_estimate},
                           {"sup_bound_from_pilot", piloted},
                           {"truncation_warnings", warnings},
                           {"max_truncation_diag", max_diag},
                           {"mean_terms", n ? terms / static_cast<double>(n) : 0.0}};
  if (warnings) *c.err << "warning: " << warnings << " paths hit max_terms with truncation diagnostic > 0.05\n";
  write_json(c, report);
  return exit_ok;
}

int cmd_exponent(Context& c) {
  const auto& blk = c.config.at("exponent");
  const auto rep = build_source(c.config.at("representor"), c.ex);
  ExponentQuery q{sites_from(blk.at("sites"), c.ex.field.dim_l, "exponent.sites"), {}};
  if (!blk.at("x").is_array()) throw ConfigError("exponent.x must be a list");
  for (const auto& v : blk.at("x")) q.x.push_back(v.get<double>());
  const auto res = exponent_estimate(*rep, q, c.ex.n, c.ex.run.with_stream(0));
  json report = envelope(c);
  report["representor"] = rep->describe();
  report["result"] = {{"V", to_json(res.v)}, {"fidi_cdf", res.fidi_cdf}};
  write_json(c, report);
  return exit_ok;
}

int cmd_transform(Context& c) {
  const auto& blk = c.config.at("transform");
  const auto base = build_source(c.config.at("representor"), c.ex);
  const auto variant = shift_variant_from_string(blk.at("variant").get<std::string>());
  const auto t = std::make_shared<ShiftTransform>(base, c.ex.gamma(), c.ex.rule(), variant);
  const auto finite_s = t->check_finite_s(blk.at("pilot_n").get<std::size_t>(), c.ex.run.with_stream(3));

  const PointSet sites = sites_from(blk.at("sites"), c.ex.field.dim_l, "transform.sites");
  const std::size_t n_paths = blk.at("n_paths").get<std::size_t>();
  auto bound = t->bind(sites);
  std::vector<Draw> draws(n_paths);
  const RunOptions opts = c.ex.run.with_stream(0);
  for_each_chunk(n_paths, opts, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      RngStream rng = derive_rng_stream(opts.master_seed, opts.stream, r);
      bound->sample(rng, draws[r]);
    }
  });
  auto csv = open_csv(c, "transform.csv",
                      csv_header("replicate", c.ex.field.dim_l, t->config().dim_d, {"weight", "snap_error"}));
  double max_snap = 0.0;
  for (std::size_t r = 0; r < n_paths; ++r) {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      csv_row(csv, r, sites[i], draws[r].values, static_cast<Eigen::Index>(i), {draws[r].weight, draws[r].snap});
    }
    max_snap = std::max(max_snap, draws[r].snap);
  }

  const PointSet separant = blk.contains("separant") && !blk.at("separant").is_null()
                                ? sites_from(blk.at("separant"), c.ex.field.dim_l, "transform.separant")
                                : integer_lattice(c.ex.window());
  const auto val = validate_representor(*t, c.ex.n, separant, c.ex.run.with_stream(1));
  json report = envelope(c);
  report["transform"] = t->describe();
  report["result"] = {{"paths", n_paths}, {"csv", "transform.csv"}, {"validation", val.to_json()}};
  report["diagnostics"] = {{"max_snap", max_snap}};
  if (finite_s) report["diagnostics"]["finite_s"] = finite_s->to_json();
  write_json(c, report);
  return val.pass() ? exit_ok : exit_fail;
}

int cmd_verify(Context& c) {
  const auto& blk = c.config.at("verify");
  IdentitySpec spec;
  spec.kind = identity_kind_from_string(blk.at("identity").get<std::string>());
  spec.functional = builtin_functional(blk.at("functional"), c.ex.field);
  spec.h = vector_from_json(blk.at("h"), c.ex.field.dim_l, "verify.h");
  spec.x = blk.at("x").get<double>();
  spec.left = build_source(blk.at("left"), c.ex);
  spec.right = build_source(blk.at("right"), c.ex);
  spec.n = c.ex.n;
  spec.confidence = blk.at("confidence").get<double>();
  spec.pilot_n = blk.at("pilot_n").get<std::size_t>();
  const IdentityReport r = verify_identity(spec, c.ex.run);
  json report = r.to_json();
  report["command"] = c.command;
  report["config"] = c.config;
  write_json(c, report);
  if (r.verdict == Verdict::fail) return exit_fail;
  if (r.verdict == Verdict::inconclusive) {
    *c.err << "verdict inconclusive: standard errors too large relative to the means\n";
    return c.fail_on_inconclusive ? exit_fail : exit_ok;
  }
  return exit_ok;
}

int cmd_integrate(Context& c) {
  const auto& blk = c.config.at("integrate");
  const auto& g = blk.at("integrand");
  const auto kind = g.at("kind").get<std::string>();
  std::function<double(std::span<const double>)> fn;
  if (kind == "gaussian_pdf") {
    const double s = g.value("sigma", 1.0);
    if (!(s > 0.0)) throw ConfigError("integrand sigma must be > 0");
    const double k = 1.0 / (s * std::sqrt(2.0 * std::numbers::pi));
    fn = [s, k](std::span<const double> t) {
      double p = 1.0;
      for (double x : t) p *= k * std::exp(-0.5 * (x / s) * (x / s));
      return p;
    };
  } else if (kind == "indicator") {
    const double lo = g.value("lower", 0.0), hi = g.value("upper", 1.0);
    fn = [lo, hi](std::span<const double> t) {
      for (double x : t) {
        if (x < lo || x > hi) return 0.0;
      }
      return 1.0;
    };
  } else if (kind == "constant") {
    const double v = g.value("value", 1.0);
    fn = [v](std::span<const double>) { return v; };
  } else {
    throw ConfigError("unknown integrand '" + kind + "'");
  }
  const Window w{blk.at("half_width").get<double>(), c.ex.field.dim_l};
  const auto est = mc_integral(fn, w, c.ex.n, c.ex.run.with_stream(0));
  json report = envelope(c);
  report["result"] = to_json(est);
  write_json(c, report);
  return exit_ok;
}

int cmd_validate(Context& c) {
  const auto& blk = c.config.at("validate");
  const auto rep = build_source(c.config.at("representor"), c.ex);
  const PointSet separant = blk.contains("separant") && !blk.at("separant").is_null()
                                ? sites_from(blk.at("separant"), c.ex.field.dim_l, "validate.separant")
                                : integer_lattice(c.ex.window());
  const auto val = validate_representor(*rep, c.ex.n, separant, c.ex.run.with_stream(0));
  json report = envelope(c);
  report["representor"] = rep->describe();
  report["result"] = val.to_json();
  write_json(c, report);
  return val.pass() ? exit_ok : exit_fail;
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shift-generated representors: simulation and identity checks"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out_dir = ".";
  bool fail_on_inconclusive = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate-maxstable", "de Haan series paths to CSV"},
      {"exponent", "exponent functional V and exp(-V)"},
      {"transform", "shift-transformed paths to CSV plus a normalization check"},
      {"verify", "paired Monte Carlo check of a functional identity"},
      {"integrate", "uniform-sampling Monte Carlo integral"},
      {"validate", "normalization and positivity check of a representor"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "YAML config file")->required();
    sub->add_option("--set", sets, "override a config key: dotted.key=value (repeatable)");
    sub->add_option("--seed", seed, "master seed (overrides mc.master_seed)");
    sub->add_option("--workers", workers, "worker threads (overrides mc.workers)");
    sub->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    if (name == "verify") sub->add_flag("--fail-on-inconclusive", fail_on_inconclusive, "exit 1 on inconclusive");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  Context c;
  c.command = app.get_subcommands().front()->get_name();
  c.out = &out;
  c.err = &err;
  c.fail_on_inconclusive = fail_on_inconclusive;
  try {
    LoadedConfig cfg = load_config_file(config_path);
    for (const auto& s : sets) apply_override(cfg, s);
    if (seed) apply_override(cfg, "mc.master_seed=" + std::to_string(*seed));
    if (workers) apply_override(cfg, "mc.workers=" + std::to_string(*workers));
    validate_config(cfg);
    c.config = resolve_config(cfg, c.command);
    c.ex = experiment_from(c.config);
    c.out_dir = out_dir;
    std::filesystem::create_directories(c.out_dir);

    if (c.command == "simulate-maxstable") return cmd_simulate(c);
    if (c.command == "exponent") return cmd_exponent(c);
    if (c.command == "transform") return cmd_transform(c);
    if (c.command == "verify") return cmd_verify(c);
    if (c.command == "integrate") return cmd_integrate(c);
    return cmd_validate(c);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const PositivityViolation& e) {
    err << "positivity violation: " << e.what() << '\n';
    return exit_config;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_fail;
  }
}

}  // namespace shiftgen
