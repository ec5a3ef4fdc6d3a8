// Command-line front end: validate, simulate, eigen, lstar, mustar, sweep, ode.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlfb/classify.hpp"
#include "nlfb/config.hpp"
#include "nlfb/io.hpp"
#include "nlfb/kernels.hpp"
#include "nlfb/parallel.hpp"
#include "nlfb/spectral.hpp"
#include "sha256.hpp"

namespace fs = std::filesystem;
using namespace nlfb;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kUndecided = 3 };

// Console numbers; files keep full precision.
std::string show(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct Options {
  std::string config;
  std::string out;
  int workers = 0;  // 0: take the config value
};

struct Context {
  AppConfig cfg;
  fs::path out;
  int workers = 1;
};

Context load(const Options& opt) {
  Context ctx;
  ctx.cfg = load_config(opt.config);
  ctx.out = opt.out.empty() ? fs::path(ctx.cfg.output_dir) : fs::path(opt.out);
  ctx.workers = opt.workers > 0 ? opt.workers : ctx.cfg.workers;
  return ctx;
}

std::ofstream open_out(const Context& ctx, const std::string& name) {
  fs::create_directories(ctx.out);
  std::ofstream os(ctx.out / name, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + (ctx.out / name).string());
  return os;
}

std::string config_hash(const AppConfig& cfg) { return tools::sha256_hex(cfg.source.dump()); }

json evidence_json(const Evidence& e) {
  json j;
  j["final_t"] = e.final_t;
  j["final_gap"] = e.final_gap;
  j["final_max_u"] = e.final_max_u;
  j["final_max_v"] = e.final_max_v;
  j["u_center"] = e.u_center;
  j["u_center_err"] = e.u_center_err ? json(*e.u_center_err) : json(nullptr);
  j["gap_bound"] = e.gap_bound;
  j["hold_elapsed"] = e.hold_elapsed;
  j["truncation_reason"] = e.truncation_reason;
  j["front_growth"] = e.front_growth;
  j["decay"] = e.decay;
  return j;
}

json verdict_json(const Verdict& v) {
  return {{"outcome", std::string(to_string(v.outcome))}, {"evidence", evidence_json(v.evidence)}};
}

int cmd_validate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto k = cfg.kernel.make();
  const auto g = cfg.growth.make();
  ValidationReport report;
  report.merge(validate_kernel(k, 1001), "kernel.");
  report.merge(validate_growth(g, cfg.params, cfg.growth.z_max), "growth.");
  report.merge(validate_initial(cfg.initial), "initial.");
  for (const auto& c : report.checks)
    std::printf("%-40s %s%s%s\n", c.name.c_str(), c.passed ? "ok" : "FAIL",
                c.detail.empty() ? "" : "  ", c.detail.c_str());

  const auto s = derived_scalars(cfg.params, g, cfg.initial.u0_sup(), cfg.initial.v0_sup());
  std::printf("R0 = %s\ntheta = %s\n", show(s.r0).c_str(), show(s.theta).c_str());
  if (s.has_equilibrium)
    std::printf("K1 = %s\nK2 = %s\n", show(s.k1).c_str(), show(s.k2).c_str());
  else
    std::printf("no positive equilibrium\n");
  std::printf("A = %s\nB = %s\n", show(s.a_bound).c_str(), show(s.b_bound).c_str());
  if (s.theta > 0.0 && s.theta < cfg.params.d) {
    const auto ls = l_star(k, cfg.params, g, cfg.eigen.lstar_tol, cfg.eigen.n);
    std::printf("l_star = %s\n", show(ls.value).c_str());
  }
  return report.all_passed() ? kOk : kValidation;
}

int cmd_simulate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto k = cfg.kernel.make();
  const auto g = cfg.growth.make();
  const auto ccfg = cfg.classify_config(k, g);
  RecordHook hook;
  if (cfg.classify.early_stop) hook = make_early_stop(cfg.params, g, ccfg);
  const auto traj = run_fb(cfg.initial, cfg.params, k, g, cfg.run, hook);
  {
    auto os = open_out(ctx, "trajectory.csv");
    io::write_trajectory(os, traj);
  }
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
    auto os = open_out(ctx, name);
    io::write_snapshot(os, traj.snapshots[i]);
  }
  const auto verdict = classify(traj, cfg.params, g, ccfg);
  json j = verdict_json(verdict);
  j["config_hash"] = config_hash(cfg);
  {
    auto os = open_out(ctx, "verdict.json");
    os << j.dump(2) << '\n';
  }
  std::printf("verdict: %s (t = %s, h - g = %s)\n", std::string(to_string(verdict.outcome)).c_str(),
              show(verdict.evidence.final_t).c_str(), show(verdict.evidence.final_gap).c_str());
  if (traj.clamp_warnings > 0)
    std::fprintf(stderr, "warning: %ld negative values clamped\n", traj.clamp_warnings);
  return kOk;
}

int cmd_eigen(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto k = cfg.kernel.make();
  const auto g = cfg.growth.make();
  auto intervals = cfg.eigen.intervals;
  for (double len : cfg.eigen.lengths) intervals.emplace_back(-0.5 * len, 0.5 * len);
  if (intervals.empty())
    throw Error(ErrorKind::InvalidArgument, "config field 'eigen': no intervals or lengths");
  std::vector<SpectralResult> rows(intervals.size());
  parallel_for(intervals.size(), ctx.workers, [&](std::size_t i) {
    rows[i] = lambda_p(k, cfg.params, g, intervals[i].first, intervals[i].second, cfg.eigen.n);
  });
  {
    auto os = open_out(ctx, "eigen.csv");
    io::write_eigen_table(os, rows);
  }
  if (cfg.eigen.write_phi)
    for (std::size_t i = 0; i < rows.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "phi_%03zu.csv", i);
      auto os = open_out(ctx, name);
      io::write_eigenfunction(os, rows[i]);
    }
  for (const auto& r : rows)
    std::printf("[%s, %s]  lambda_p = %s\n", show(r.l1).c_str(), show(r.l2).c_str(),
                show(r.lambda_p).c_str());
  return kOk;
}

int cmd_lstar(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto k = cfg.kernel.make();
  const auto g = cfg.growth.make();
  const auto ls = l_star(k, cfg.params, g, cfg.eigen.lstar_tol, cfg.eigen.n);
  const double lam = lambda_p(k, cfg.params, g, -0.5 * ls.value, 0.5 * ls.value, ls.n).lambda_p;
  json j = {{"l_star", ls.value}, {"lo", ls.lo}, {"hi", ls.hi}, {"n", ls.n},
            {"lambda_p_at_l_star", lam}, {"config_hash", config_hash(cfg)}};
  auto os = open_out(ctx, "lstar.json");
  os << j.dump(2) << '\n';
  std::printf("l_star = %s\nbracket [%s, %s]\nlambda_p(l_star) = %s\n", show(ls.value).c_str(),
              show(ls.lo).c_str(), show(ls.hi).c_str(), show(lam).c_str());
  return kOk;
}

int cmd_mustar(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto k = cfg.kernel.make();
  const auto g = cfg.growth.make();
  require_critical_length_regime(cfg.params, g);
  const auto ccfg = cfg.classify_config(k, g);
  MuStarOptions opts;
  opts.mu_lo = cfg.mustar.mu_lo;
  opts.mu_hi = cfg.mustar.mu_hi;
  opts.workers = ctx.workers;
  const auto r = mu_star(cfg.params, k, g, cfg.initial, cfg.run, ccfg, cfg.mustar.tol, opts);

  json probes = json::array();
  for (const auto& p : r.probes)
    probes.push_back({{"mu", p.mu}, {"outcome", std::string(to_string(p.outcome))},
                      {"final_gap", p.final_gap}, {"final_t", p.final_t}});
  json j = {{"mu_lo", r.mu_lo}, {"mu_hi", r.mu_hi}, {"mu_star", r.mid()}, {"tol", r.tol},
            {"verdict_lo", verdict_json(r.verdict_lo)}, {"verdict_hi", verdict_json(r.verdict_hi)},
            {"probes", probes}, {"config_hash", config_hash(cfg)}};
  auto os = open_out(ctx, "mustar.json");
  os << j.dump(2) << '\n';
  std::printf("mu_star in [%s, %s]\ntol = %s\n", show(r.mu_lo).c_str(), show(r.mu_hi).c_str(),
              show(r.tol).c_str());
  return kOk;
}

int cmd_sweep(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto k = cfg.kernel.make();
  const auto rows =
      phase_sweep(cfg.sweep, cfg.params, k, cfg.growth.family, cfg.initial, cfg.run, ctx.workers);
  {
    auto os = open_out(ctx, "sweep.csv");
    io::write_sweep(os, rows);
  }
  int failed = 0;
  for (const auto& r : rows)
    if (!r.error.empty()) {
      ++failed;
      std::fprintf(stderr, "row alpha=%s h0=%s mu=%s: %s\n", show(r.alpha).c_str(),
                   show(r.h0).c_str(), show(r.mu).c_str(), r.error.c_str());
    }
  std::printf("%zu rows, %d failed\n", rows.size(), failed);
  return failed ? kRuntime : kOk;
}

int cmd_ode(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto g = cfg.growth.make();
  const auto pts = solve_ode(cfg.params, g, cfg.ode.u0, cfg.ode.v0, cfg.ode.t_end, cfg.ode.dt);
  auto os = open_out(ctx, "ode.csv");
  io::write_ode(os, pts);
  const auto& last = pts.back();
  std::printf("u(%s) = %s\nv(%s) = %s\n", show(last.t).c_str(), show(last.u).c_str(),
              show(last.t).c_str(), show(last.v).c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal free-boundary epidemic model"};
  app.require_subcommand(1);
  Options opt;
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Context&);
  };
  const Sub subs[] = {
      {"validate", "check model assumptions and print derived scalars", cmd_validate},
      {"simulate", "run the free-boundary system and classify it", cmd_simulate},
      {"eigen", "principal eigenvalue on the configured intervals", cmd_eigen},
      {"lstar", "critical length", cmd_lstar},
      {"mustar", "critical expansion coefficient by bisection", cmd_mustar},
      {"sweep", "phase-diagram sweep", cmd_sweep},
      {"ode", "spatially homogeneous system", cmd_ode},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("--config", opt.config, "JSON config file")->required();
    sc->add_option("--out", opt.out, "output directory (overrides output_dir)");
    sc->add_option("--workers", opt.workers, "worker threads (overrides workers)")
        ->check(CLI::PositiveNumber);
    registered.emplace_back(sc, &s);
  }
  CLI11_PARSE(app, argc, argv);

  const Sub* chosen = nullptr;
  for (const auto& [sc, s] : registered)
    if (sc->parsed()) chosen = s;

  Context ctx;
  try {
    ctx = load(opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  }
  try {
    return chosen->fn(ctx);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::UndecidedRun ? kUndecided : kRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
}
