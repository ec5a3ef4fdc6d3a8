#pragma once

// Explicit time integration of the free-boundary system on the master grid,
// of the fixed-interval system, and RK4 for the spatially homogeneous ODE.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlfb/error.hpp"
#include "nlfb/growth.hpp"
#include "nlfb/kernels.hpp"
#include "nlfb/quadgrid.hpp"

namespace nlfb {

struct SimState {
  double t = 0.0;
  ActiveWindow window{-1.0, 1.0};
  Field u;
  Field v;
};

enum class InitialShape { Bump, Cosine };

inline InitialShape initial_shape_from_string(std::string_view name) {
  if (name == "bump") return InitialShape::Bump;
  if (name == "cosine") return InitialShape::Cosine;
  throw Error(ErrorKind::InvalidArgument,
              "unknown initial shape '" + std::string(name) + "'");
}

constexpr std::string_view to_string(InitialShape s) {
  return s == InitialShape::Bump ? "bump" : "cosine";
}

/// Built-in initial profiles on [-h0, h0], positive inside, zero at +-h0:
/// bump A (1 - (x/h0)^2) and scaled cosine A cos(pi x / (2 h0)).
struct InitialData {
  InitialShape shape = InitialShape::Bump;
  double u_amplitude = 0.5;
  double v_amplitude = 0.5;
  double h0 = 1.0;

  double profile(double x) const {
    if (!(std::abs(x) < h0)) return 0.0;
    const double s = x / h0;
    return shape == InitialShape::Bump ? 1.0 - s * s
                                       : std::cos(0.5 * std::numbers::pi * s);
  }
  double u0(double x) const { return u_amplitude * profile(x); }
  double v0(double x) const { return v_amplitude * profile(x); }
  double u0_sup() const { return u_amplitude; }
  double v0_sup() const { return v_amplitude; }

  void check() const {
    if (!(h0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "initial h0 must be > 0");
    if (!(u_amplitude > 0.0) || !(v_amplitude > 0.0))
      throw Error(ErrorKind::InvalidArgument, "initial amplitudes must be > 0");
  }

  SimState sample(const Grid& grid) const {
    SimState s;
    s.window = {-h0, h0};
    s.u = grid.zeros();
    s.v = grid.zeros();
    const auto r = active_range(s.window, grid);
    for (int i = r.first; i <= r.last; ++i) {
      s.u[static_cast<std::size_t>(i)] = u0(grid.x(i));
      s.v[static_cast<std::size_t>(i)] = v0(grid.x(i));
    }
    return s;
  }
};

/// Checks the initial-data assumptions on a sample of the profile.
inline ValidationReport validate_initial(const InitialData& init, int samples = 1001) {
  ValidationReport report;
  report.add("h0_positive", init.h0 > 0.0);
  report.add("zero_at_ends", init.u0(-init.h0) == 0.0 && init.u0(init.h0) == 0.0 &&
                                 init.v0(-init.h0) == 0.0 && init.v0(init.h0) == 0.0);
  bool positive = init.h0 > 0.0;
  for (int i = 1; i < samples - 1 && positive; ++i) {
    const double x = -init.h0 + 2.0 * init.h0 * i / (samples - 1);
    positive = init.u0(x) > 0.0 && init.v0(x) > 0.0;
  }
  report.add("positive_inside", positive);
  return report;
}

/// Per-record summary of a state. `source` is the space integral of
/// -a u + (c/b) G(u), needed by the mass-balance diagnostic.
struct TrajectoryRecord {
  double t = 0.0;
  double g = 0.0;
  double h = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double u_center = 0.0;
  double v_center = 0.0;
  double max_u = 0.0;
  double max_v = 0.0;
  std::optional<double> source;

  double gap() const { return h - g; }
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> v;
};

namespace truncation {
inline constexpr const char* kEndTime = "t_end";
inline constexpr const char* kGridEscape = "spreading-escaped-grid";
inline constexpr const char* kEarlyStop = "early-stop";
}  // namespace truncation

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<Snapshot> snapshots;
  std::string truncation_reason = truncation::kEndTime;
  /// Number of clamps of values below -1e-10 (a sign of a real instability).
  long clamp_warnings = 0;
};

struct RunConfig {
  double L = 60.0;
  int n = 2401;
  double dt = 1e-3;
  double t_end = 10.0;
  int stride = 100;  // steps between records
  std::vector<double> snapshot_times;
};

/// Called on every record; returning true stops the run early.
using RecordHook = std::function<bool(const TrajectoryRecord&)>;

inline void check_stability(const ModelParams& p, double dt) {
  if (!(dt > 0.0) || dt * (p.d + p.a) > 0.5 || dt * p.b > 0.5)
    throw Error(ErrorKind::StabilityViolation,
                "dt = " + std::to_string(dt) +
                    " violates dt > 0, dt (d + a) <= 0.5, dt b <= 0.5");
}

/// Forward-Euler stepper for the free-boundary system on a fixed master grid.
/// Holds the kernel stencil and scratch buffers, so stepping allocates only
/// when the window grows.
template <DispersalKernel K, InfectionLaw G>
class FreeBoundarySolver {
 public:
  FreeBoundarySolver(const Grid& grid, const ModelParams& p, const K& kernel,
                     const G& growth)
      : grid_(grid),
        p_(p),
        kernel_(kernel),
        growth_(growth),
        stencil_(kernel, grid.dx()),
        conv_(grid.zeros()) {}

  const Grid& grid() const { return grid_; }
  const ModelParams& params() const { return p_; }
  long clamp_warnings() const { return clamp_warnings_; }

  /// One explicit step; the fronts move with the fluxes of u at time t.
  /// Throws GridExhausted when a front comes within the kernel truncation
  /// radius of the master-grid boundary.
  SimState step(const SimState& s, double dt) {
    SimState next = s;
    advance(next, dt);
    return next;
  }

  /// In-place variant of step(). On GridExhausted the state is left untouched.
  void advance(SimState& s, double dt) {
    check_stability(p_, dt);
    const auto r = active_range(s.window, grid_);
    if (r.empty()) {
      s.t += dt;
      return;
    }
    const auto wts = window_weights(s.window, grid_, r);
    convolve_active(s.u, r, wts, stencil_, conv_);
    const double flux_right =
        boundary_flux_active(s.u, s.window, kernel_, grid_, r, wts, Side::Right);
    const double flux_left =
        boundary_flux_active(s.u, s.window, kernel_, grid_, r, wts, Side::Left);

    const ActiveWindow next{s.window.g - dt * p_.mu * flux_left,
                            s.window.h + dt * p_.mu * flux_right};
    const double margin = kernel_.truncation_radius();
    if (next.h > grid_.L() - margin || next.g < -grid_.L() + margin)
      throw Error(ErrorKind::GridExhausted,
                  "front reached [" + std::to_string(next.g) + ", " +
                      std::to_string(next.h) + "] at t = " + std::to_string(s.t + dt));

    const double loss = p_.d + p_.a;
    for (int i = r.first; i <= r.last; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double u = s.u[k];
      const double v = s.v[k];
      s.u[k] = clamp(u + dt * (p_.d * conv_[k] - loss * u + p_.c * v));
      s.v[k] = clamp(v + dt * (-p_.b * v + growth_.value(u)));
    }
    // Nodes entering the window already hold zero.
    s.window = next;
    s.t += dt;
  }

  TrajectoryRecord summarize(const SimState& s, bool with_source = true) const {
    TrajectoryRecord rec;
    rec.t = s.t;
    rec.g = s.window.g;
    rec.h = s.window.h;
    const auto r = active_range(s.window, grid_);
    const auto mid = static_cast<std::size_t>(grid_.center());
    rec.u_center = s.u[mid];
    rec.v_center = s.v[mid];
    if (r.empty()) {
      if (with_source) rec.source = 0.0;
      return rec;
    }
    const auto wts = window_weights(s.window, grid_, r);
    double mu = 0.0, mv = 0.0, src = 0.0;
    for (int i = r.first; i <= r.last; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double w = wts[static_cast<std::size_t>(i - r.first)];
      mu += w * s.u[k];
      mv += w * s.v[k];
      src += w * (-p_.a * s.u[k] + p_.c / p_.b * growth_.value(s.u[k]));
      rec.max_u = std::max(rec.max_u, s.u[k]);
      rec.max_v = std::max(rec.max_v, s.v[k]);
    }
    rec.mass_u = mu;
    rec.mass_v = mv;
    if (with_source) rec.source = src;
    return rec;
  }

  Snapshot snapshot(const SimState& s) const {
    Snapshot snap;
    snap.t = s.t;
    const auto r = active_range(s.window, grid_);
    for (int i = r.first; i <= r.last; ++i) {
      snap.x.push_back(grid_.x(i));
      snap.u.push_back(s.u[static_cast<std::size_t>(i)]);
      snap.v.push_back(s.v[static_cast<std::size_t>(i)]);
    }
    return snap;
  }

 private:
  double clamp(double value) {
    if (value >= 0.0) return value;
    if (value < -1e-10) ++clamp_warnings_;
    return 0.0;
  }

  Grid grid_;
  ModelParams p_;
  K kernel_;
  G growth_;
  KernelStencil stencil_;
  Field conv_;
  long clamp_warnings_ = 0;
};

/// Single free-boundary step. Convenience wrapper; long runs should keep a
/// FreeBoundarySolver alive instead.
template <DispersalKernel K, InfectionLaw G>
SimState step_fb(const SimState& s, const ModelParams& p, const K& k, const G& g,
                 double dt, const Grid& grid) {
  FreeBoundarySolver<K, G> solver(grid, p, k, g);
  return solver.step(s, dt);
}

/// Integrates the free-boundary system from the initial data to cfg.t_end,
/// recording a summary every cfg.stride steps and at the final step.
/// Grid escape ends the run normally with truncation reason
/// "spreading-escaped-grid".
template <DispersalKernel K, InfectionLaw G>
Trajectory run_fb(const InitialData& init, const ModelParams& p, const K& k,
                  const G& g, const RunConfig& cfg, const RecordHook& hook = {}) {
  p.check();
  init.check();
  if (cfg.stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be >= 1");
  if (!(cfg.t_end >= 0.0)) throw Error(ErrorKind::InvalidArgument, "t_end must be >= 0");
  check_stability(p, cfg.dt);

  const Grid grid(cfg.L, cfg.n);
  if (init.h0 + k.truncation_radius() >= grid.L())
    throw Error(ErrorKind::GridExhausted, "initial range does not fit the grid");
  FreeBoundarySolver<K, G> solver(grid, p, k, g);
  SimState state = init.sample(grid);

  const long steps = std::lround(cfg.t_end / cfg.dt);
  std::vector<long> snapshot_steps;
  for (double ts : cfg.snapshot_times)
    if (ts >= 0.0 && ts <= cfg.t_end) snapshot_steps.push_back(std::lround(ts / cfg.dt));
  std::sort(snapshot_steps.begin(), snapshot_steps.end());
  snapshot_steps.erase(std::unique(snapshot_steps.begin(), snapshot_steps.end()),
                       snapshot_steps.end());
  auto next_snapshot = snapshot_steps.begin();

  Trajectory traj;
  auto record = [&]() {
    traj.records.push_back(solver.summarize(state));
    return hook && hook(traj.records.back());
  };
  auto take_snapshot = [&](long step) {
    while (next_snapshot != snapshot_steps.end() && *next_snapshot <= step) {
      if (*next_snapshot == step) traj.snapshots.push_back(solver.snapshot(state));
      ++next_snapshot;
    }
  };

  take_snapshot(0);
  if (record()) {
    traj.truncation_reason = truncation::kEarlyStop;
    return traj;
  }
  long last_recorded = 0;
  for (long step = 1; step <= steps; ++step) {
    try {
      solver.advance(state, cfg.dt);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::GridExhausted) {
        if (last_recorded != step - 1) record();
        traj.truncation_reason = truncation::kGridEscape;
        traj.clamp_warnings = solver.clamp_warnings();
        return traj;
      }
      throw Error(e.kind(), std::string(e.what()) + " (t = " +
                                std::to_string(static_cast<double>(step) * cfg.dt) + ")");
    }
    state.t = static_cast<double>(step) * cfg.dt;
    take_snapshot(step);
    if (step % cfg.stride == 0 || step == steps) {
      last_recorded = step;
      if (record()) {
        traj.truncation_reason = truncation::kEarlyStop;
        break;
      }
    }
  }
  traj.clamp_warnings = solver.clamp_warnings();
  return traj;
}

/// One Euler step of the fixed-interval system; no boundary condition is
/// imposed at the interval ends.
template <DispersalKernel K, InfectionLaw G>
class FixedDomainSolver {
 public:
  FixedDomainSolver(double l1, double l2, int n, const ModelParams& p, const K& k,
                    const G& g)
      : interval_(l1, l2, n, k), p_(p), growth_(g),
        conv_(static_cast<std::size_t>(n), 0.0) {}

  const IntervalGrid& interval() const { return interval_; }

  /// Right-hand sides of both equations at (w, z).
  void rhs(std::span<const double> w, std::span<const double> z, std::span<double> dw,
           std::span<double> dz) {
    interval_.convolve(w, conv_);
    const double loss = p_.d + p_.a;
    for (std::size_t i = 0; i < w.size(); ++i) {
      dw[i] = p_.d * conv_[i] - loss * w[i] + p_.c * z[i];
      dz[i] = -p_.b * z[i] + growth_.value(w[i]);
    }
  }

  void step(Field& w, Field& z, double dt) {
    check_stability(p_, dt);
    interval_.convolve(w, conv_);
    const double loss = p_.d + p_.a;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double wi = w[i];
      const double zi = z[i];
      w[i] = wi + dt * (p_.d * conv_[i] - loss * wi + p_.c * zi);
      z[i] = zi + dt * (-p_.b * zi + growth_.value(wi));
    }
  }

 private:
  IntervalGrid interval_;
  ModelParams p_;
  G growth_;
  Field conv_;
};

template <DispersalKernel K, InfectionLaw G>
std::pair<Field, Field> step_fixed(const Field& w, const Field& z, double l1, double l2,
                                   const ModelParams& p, const K& k, const G& g,
                                   double dt) {
  if (w.size() != z.size() || w.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "w and z must share a size >= 2");
  FixedDomainSolver<K, G> solver(l1, l2, static_cast<int>(w.size()), p, k, g);
  Field wn = w, zn = z;
  solver.step(wn, zn, dt);
  return {std::move(wn), std::move(zn)};
}

struct OdePoint {
  double t;
  double u;
  double v;
};

/// Classical RK4 for u' = -a u + c v, v' = -b v + G(u).
template <InfectionLaw G>
std::vector<OdePoint> solve_ode(const ModelParams& p, const G& g, double u0, double v0,
                                double t_end, double dt) {
  if (u0 < 0.0 || v0 < 0.0)
    throw Error(ErrorKind::InvalidArgument, "ODE initial values must be >= 0");
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "ODE dt must be > 0");
  auto f = [&](double u, double v) -> std::array<double, 2> {
    return {-p.a * u + p.c * v, -p.b * v + g.value(u)};
  };
  const long steps = std::max(0L, std::lround(t_end / dt));
  std::vector<OdePoint> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  double u = u0, v = v0;
  out.push_back({0.0, u, v});
  for (long k = 1; k <= steps; ++k) {
    const auto k1 = f(u, v);
    const auto k2 = f(u + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1]);
    const auto k3 = f(u + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1]);
    const auto k4 = f(u + dt * k3[0], v + dt * k3[1]);
    u += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    v += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    out.push_back({static_cast<double>(k) * dt, u, v});
  }
  return out;
}

/// Residual of the integrated mass identity
///   int (u + (c/b) v) + (d/mu)(h - g) - int_0^t int (-a u + (c/b) G(u))
/// relative to its initial value, per record. The time integral is the
/// trapezoid rule over the records.
inline std::vector<double> mass_balance_residual(const Trajectory& traj,
                                                 const ModelParams& p) {
  std::vector<double> out;
  if (traj.records.empty()) return out;
  for (const auto& rec : traj.records)
    if (!rec.source)
      throw Error(ErrorKind::MissingDiagnostics,
                  "record at t = " + std::to_string(rec.t) + " has no source integral");
  const double cb = p.c / p.b;
  const double dm = p.d / p.mu;
  const auto& first = traj.records.front();
  const double initial = first.mass_u + cb * first.mass_v + dm * first.gap();
  double accumulated = 0.0;
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    const auto& rec = traj.records[k];
    if (k > 0) {
      const auto& prev = traj.records[k - 1];
      accumulated += 0.5 * (rec.t - prev.t) * (*rec.source + *prev.source);
    }
    out.push_back(rec.mass_u + cb * rec.mass_v + dm * rec.gap() - initial - accumulated);
  }
  return out;
}

}  // namespace nlfb
