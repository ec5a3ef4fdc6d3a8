#pragma once

// JSON run configuration. Every field is checked on load, and failures name
// the offending key path (e.g. "params.d").

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nlfb/classify.hpp"
#include "nlfb/dynamics.hpp"
#include "nlfb/error.hpp"
#include "nlfb/growth.hpp"
#include "nlfb/kernels.hpp"

namespace nlfb {

using json = nlohmann::json;

struct KernelSpec {
  KernelFamily family = KernelFamily::CompactQuadratic;
  double sigma = 1.0;
  Kernel make() const { return Kernel(family, sigma); }
};

struct GrowthSpec {
  GrowthFamily family = GrowthFamily::Hill;
  double alpha = 2.0;
  double z_max = 100.0;  // upper end of the validation grid
  GrowthLaw make() const { return GrowthLaw(family, alpha); }
};

/// Classify thresholds; unset fields fall back to the model-derived defaults.
struct ClassifySpec {
  std::optional<double> L_spread;
  std::optional<double> eps_vanish;
  std::optional<double> hold_time;
  std::optional<double> band;
  std::optional<double> bound_slack;
  std::optional<double> lstar_slack;
  double t_max = 1000.0;
  bool early_stop = false;  // stop `simulate` runs once the verdict is settled
};

struct EigenSpec {
  int n = 401;
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> lengths;  // centered intervals of these lengths
  double lstar_tol = 1e-10;
  bool write_phi = false;
};

struct MuStarSpec {
  double tol = 0.01;
  double mu_lo = 1e-3;
  double mu_hi = 1.0;
};

struct OdeSpec {
  double u0 = 0.01;
  double v0 = 0.01;
  double t_end = 200.0;
  double dt = 0.01;
};

struct AppConfig {
  KernelSpec kernel;
  GrowthSpec growth;
  ModelParams params;
  InitialData initial;
  RunConfig run;
  ClassifySpec classify;
  EigenSpec eigen;
  MuStarSpec mustar;
  SweepSpec sweep;
  OdeSpec ode;
  std::string output_dir = "out";
  int workers = 1;
  json source;  // the parsed document, for hashing

  template <DispersalKernel K, InfectionLaw G>
  ClassifyConfig classify_config(const K& k, const G& g) const {
    return classify_config_with(critical_length_if_any(k, params, g, eigen.n, eigen.lstar_tol));
  }

  ClassifyConfig classify_config_with(std::optional<double> lstar) const {
    ClassifyConfig cfg = default_classify_config(params, lstar);
    if (classify.L_spread) cfg.L_spread = *classify.L_spread;
    if (classify.eps_vanish) cfg.eps_vanish = *classify.eps_vanish;
    if (classify.hold_time) cfg.hold_time = *classify.hold_time;
    if (classify.band) cfg.band = *classify.band;
    if (classify.bound_slack) cfg.bound_slack = *classify.bound_slack;
    if (classify.lstar_slack) cfg.lstar_slack = *classify.lstar_slack;
    cfg.t_max = classify.t_max;
    return cfg;
  }
};

namespace config_detail {

inline Error field_error(const std::string& path, const std::string& what) {
  return Error(ErrorKind::InvalidArgument, "config field '" + path + "': " + what);
}

/// Reads fields of one object and rejects keys it never asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw field_error(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string key(const std::string& name) const {
    return path_.empty() ? name : path_ + "." + name;
  }

  bool has(const std::string& name) {
    seen_.insert(name);
    return j_.contains(name);
  }

  const json& raw(const std::string& name) {
    seen_.insert(name);
    return j_.at(name);
  }

  void number(const std::string& name, double& out) {
    if (!has(name)) return;
    const auto& v = j_.at(name);
    if (!v.is_number()) throw field_error(key(name), "must be a number");
    out = v.get<double>();
  }

  void number(const std::string& name, std::optional<double>& out) {
    if (!has(name)) return;
    double x = 0.0;
    number(name, x);
    out = x;
  }

  void integer(const std::string& name, int& out) {
    if (!has(name)) return;
    const auto& v = j_.at(name);
    if (!v.is_number_integer()) throw field_error(key(name), "must be an integer");
    out = v.get<int>();
  }

  void boolean(const std::string& name, bool& out) {
    if (!has(name)) return;
    const auto& v = j_.at(name);
    if (!v.is_boolean()) throw field_error(key(name), "must be a boolean");
    out = v.get<bool>();
  }

  void string(const std::string& name, std::string& out) {
    if (!has(name)) return;
    const auto& v = j_.at(name);
    if (!v.is_string()) throw field_error(key(name), "must be a string");
    out = v.get<std::string>();
  }

  void numbers(const std::string& name, std::vector<double>& out) {
    if (!has(name)) return;
    const auto& v = j_.at(name);
    if (!v.is_array()) throw field_error(key(name), "must be an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw field_error(key(name), "must be an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  std::optional<Section> child(const std::string& name) {
    if (!has(name)) return std::nullopt;
    return Section(j_.at(name), key(name));
  }

  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!seen_.count(k)) throw field_error(key(k), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void positive(const std::string& path, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw field_error(path, "must be > 0");
}

template <class Fn>
auto rethrow_as_field(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw field_error(path, e.what());
  }
}

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace config_detail

/// Builds and validates an AppConfig from a parsed document.
inline AppConfig config_from_json(const json& doc) {
  using config_detail::field_error;
  using config_detail::positive;
  using config_detail::Section;
  AppConfig cfg;
  cfg.source = doc;
  Section root(doc, "");

  if (auto s = root.child("kernel")) {
    std::string family = std::string(to_string(cfg.kernel.family));
    s->string("family", family);
    cfg.kernel.family = config_detail::rethrow_as_field(
        s->key("family"), [&] { return kernel_family_from_string(family); });
    s->number("sigma", cfg.kernel.sigma);
    s->finish();
  }
  positive("kernel.sigma", cfg.kernel.sigma);

  if (auto s = root.child("growth")) {
    std::string family = std::string(to_string(cfg.growth.family));
    s->string("family", family);
    cfg.growth.family = config_detail::rethrow_as_field(
        s->key("family"), [&] { return growth_family_from_string(family); });
    s->number("alpha", cfg.growth.alpha);
    s->number("z_max", cfg.growth.z_max);
    s->finish();
  }
  positive("growth.alpha", cfg.growth.alpha);
  positive("growth.z_max", cfg.growth.z_max);

  if (auto s = root.child("params")) {
    s->number("a", cfg.params.a);
    s->number("b", cfg.params.b);
    s->number("c", cfg.params.c);
    s->number("d", cfg.params.d);
    s->number("mu", cfg.params.mu);
    s->number("h0", cfg.params.h0);
    s->finish();
  }
  positive("params.a", cfg.params.a);
  positive("params.b", cfg.params.b);
  positive("params.c", cfg.params.c);
  positive("params.d", cfg.params.d);
  positive("params.mu", cfg.params.mu);
  positive("params.h0", cfg.params.h0);

  if (auto s = root.child("initial")) {
    std::string shape = std::string(to_string(cfg.initial.shape));
    s->string("shape", shape);
    cfg.initial.shape = config_detail::rethrow_as_field(
        s->key("shape"), [&] { return initial_shape_from_string(shape); });
    s->number("u_amplitude", cfg.initial.u_amplitude);
    s->number("v_amplitude", cfg.initial.v_amplitude);
    s->finish();
  }
  cfg.initial.h0 = cfg.params.h0;
  positive("initial.u_amplitude", cfg.initial.u_amplitude);
  positive("initial.v_amplitude", cfg.initial.v_amplitude);

  if (auto s = root.child("grid")) {
    s->number("L", cfg.run.L);
    s->integer("n", cfg.run.n);
    s->finish();
  }
  positive("grid.L", cfg.run.L);
  if (cfg.run.n < 3 || cfg.run.n % 2 == 0) throw field_error("grid.n", "must be odd and >= 3");

  if (auto s = root.child("time")) {
    s->number("dt", cfg.run.dt);
    s->number("t_end", cfg.run.t_end);
    s->integer("stride", cfg.run.stride);
    s->numbers("snapshots", cfg.run.snapshot_times);
    s->finish();
  }
  positive("time.dt", cfg.run.dt);
  if (!(cfg.run.t_end >= 0.0)) throw field_error("time.t_end", "must be >= 0");
  if (cfg.run.stride < 1) throw field_error("time.stride", "must be >= 1");
  config_detail::rethrow_as_field("time.dt", [&] { check_stability(cfg.params, cfg.run.dt); });

  if (auto s = root.child("classify")) {
    s->number("L_spread", cfg.classify.L_spread);
    s->number("eps_vanish", cfg.classify.eps_vanish);
    s->number("hold_time", cfg.classify.hold_time);
    s->number("band", cfg.classify.band);
    s->number("bound_slack", cfg.classify.bound_slack);
    s->number("lstar_slack", cfg.classify.lstar_slack);
    s->number("t_max", cfg.classify.t_max);
    s->boolean("early_stop", cfg.classify.early_stop);
    s->finish();
  }
  for (const auto& [name, v] : {std::pair{"L_spread", cfg.classify.L_spread},
                                {"eps_vanish", cfg.classify.eps_vanish},
                                {"hold_time", cfg.classify.hold_time},
                                {"band", cfg.classify.band}})
    if (v) positive(std::string("classify.") + name, *v);
  for (const auto& [name, v] : {std::pair{"bound_slack", cfg.classify.bound_slack},
                                {"lstar_slack", cfg.classify.lstar_slack}})
    if (v && !(*v >= 0.0)) throw field_error(std::string("classify.") + name, "must be >= 0");
  positive("classify.t_max", cfg.classify.t_max);
  {
    const double hold = cfg.classify.hold_time.value_or(10.0 / std::min(cfg.params.a, cfg.params.b));
    if (cfg.run.stride * cfg.run.dt > hold / 4.0 * (1.0 + 1e-9))
      throw field_error("time.stride", "record spacing stride*dt must be <= hold_time/4");
  }

  if (auto s = root.child("eigen")) {
    s->integer("n", cfg.eigen.n);
    if (s->has("intervals")) {
      const auto& v = s->raw("intervals");
      if (!v.is_array()) throw field_error("eigen.intervals", "must be an array of [l1, l2]");
      for (const auto& e : v) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
          throw field_error("eigen.intervals", "must be an array of [l1, l2]");
        const double l1 = e[0].get<double>(), l2 = e[1].get<double>();
        if (!(l1 < l2)) throw field_error("eigen.intervals", "requires l1 < l2");
        cfg.eigen.intervals.emplace_back(l1, l2);
      }
    }
    s->numbers("lengths", cfg.eigen.lengths);
    s->number("lstar_tol", cfg.eigen.lstar_tol);
    s->boolean("write_phi", cfg.eigen.write_phi);
    s->finish();
  }
  if (cfg.eigen.n < 16) throw field_error("eigen.n", "must be >= 16");
  for (double len : cfg.eigen.lengths) positive("eigen.lengths", len);
  positive("eigen.lstar_tol", cfg.eigen.lstar_tol);

  if (auto s = root.child("mustar")) {
    s->number("tol", cfg.mustar.tol);
    s->number("mu_lo", cfg.mustar.mu_lo);
    s->number("mu_hi", cfg.mustar.mu_hi);
    s->finish();
  }
  positive("mustar.tol", cfg.mustar.tol);
  positive("mustar.mu_lo", cfg.mustar.mu_lo);
  if (!(cfg.mustar.mu_hi > cfg.mustar.mu_lo)) throw field_error("mustar.mu_hi", "must exceed mu_lo");

  cfg.sweep.t_max = cfg.classify.t_max;
  cfg.sweep.eps_vanish = cfg.classify.eps_vanish;
  cfg.sweep.hold_time = cfg.classify.hold_time;
  cfg.sweep.eigen_n = cfg.eigen.n;
  if (auto s = root.child("sweep")) {
    s->numbers("alphas", cfg.sweep.alphas);
    s->numbers("h0s", cfg.sweep.h0s);
    s->numbers("mus", cfg.sweep.mus);
    s->number("t_max", cfg.sweep.t_max);
    s->finish();
  }
  for (double x : cfg.sweep.alphas) positive("sweep.alphas", x);
  for (double x : cfg.sweep.h0s) positive("sweep.h0s", x);
  for (double x : cfg.sweep.mus) positive("sweep.mus", x);
  positive("sweep.t_max", cfg.sweep.t_max);

  if (auto s = root.child("ode")) {
    s->number("u0", cfg.ode.u0);
    s->number("v0", cfg.ode.v0);
    s->number("t_end", cfg.ode.t_end);
    s->number("dt", cfg.ode.dt);
    s->finish();
  }
  if (!(cfg.ode.u0 >= 0.0)) throw field_error("ode.u0", "must be >= 0");
  if (!(cfg.ode.v0 >= 0.0)) throw field_error("ode.v0", "must be >= 0");
  if (!(cfg.ode.t_end >= 0.0)) throw field_error("ode.t_end", "must be >= 0");
  positive("ode.dt", cfg.ode.dt);

  root.string("output_dir", cfg.output_dir);
  root.integer("workers", cfg.workers);
  if (cfg.workers < 1) throw field_error("workers", "must be >= 1");
  root.finish();

  if (cfg.initial.h0 + cfg.kernel.make().truncation_radius() >= cfg.run.L)
    throw field_error("grid.L", "must exceed h0 plus the kernel truncation radius");
  return cfg;
}

/// Parses JSON text; syntax errors report line and column.
inline AppConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument,
                "config parse error at " + config_detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                    ": " + e.what());
  }
  return config_from_json(doc);
}

inline AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nlfb
