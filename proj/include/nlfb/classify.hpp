#pragma once

// Spreading/vanishing verdicts for free-boundary trajectories, the critical
// expansion coefficient mu* by bisection, and parameter sweeps.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlfb/dynamics.hpp"
#include "nlfb/error.hpp"
#include "nlfb/growth.hpp"
#include "nlfb/kernels.hpp"
#include "nlfb/parallel.hpp"
#include "nlfb/spectral.hpp"

namespace nlfb {

enum class Outcome { Spreading, Vanishing, Undecided };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Spreading: return "spreading";
    case Outcome::Vanishing: return "vanishing";
    case Outcome::Undecided: return "undecided";
  }
  return "undecided";
}

struct Evidence {
  double final_t = 0.0;
  double final_gap = 0.0;
  double final_max_u = 0.0;
  double final_max_v = 0.0;
  double u_center = 0.0;
  std::optional<double> u_center_err;  // |u(t_end, 0) - K1| / K1 when R0 > 1
  double gap_bound = 0.0;              // limit on h - g for a vanishing verdict
  double hold_elapsed = 0.0;           // time spent below eps_vanish at the end
  std::string truncation_reason;
  bool front_growth = false;
  bool decay = false;
};

struct Verdict {
  Outcome outcome = Outcome::Undecided;
  Evidence evidence;
};

struct ClassifyConfig {
  double L_spread = 40.0;
  double eps_vanish = 1e-5;
  double hold_time = 10.0;
  double t_max = 1000.0;
  double band = 0.1;           // relative width of the K1 band at x = 0
  double bound_slack = 0.01;   // relative slack on the mass bound (theta <= 0)
  double lstar_slack = 0.05;   // relative slack on h - g <= l* (0 < theta < d)
  std::optional<double> l_star;

  void check() const {
    auto require = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::InvalidArgument,
                    std::string("classify '") + name + "' must be > 0");
    };
    require(L_spread, "L_spread");
    require(eps_vanish, "eps_vanish");
    require(hold_time, "hold_time");
    require(t_max, "t_max");
    require(band, "band");
    if (!(bound_slack >= 0.0))
      throw Error(ErrorKind::InvalidArgument, "classify 'bound_slack' must be >= 0");
    if (!(lstar_slack >= 0.0))
      throw Error(ErrorKind::InvalidArgument, "classify 'lstar_slack' must be >= 0");
    if (l_star && !(*l_star > 0.0))
      throw Error(ErrorKind::InvalidArgument, "classify 'l_star' must be > 0");
  }
};

/// l* when 0 < theta < d, otherwise empty.
template <DispersalKernel K, InfectionLaw G>
std::optional<double> critical_length_if_any(const K& k, const ModelParams& p, const G& g,
                                             int eigen_n = 401, double tol = 1e-10) {
  const double th = theta(p, g);
  if (!(th > 0.0 && th < p.d)) return std::nullopt;
  return l_star(k, p, g, tol, eigen_n).value;
}

/// Defaults: L_spread = 4 l* when l* exists, else 40 h0; hold_time = 10/min(a, b).
inline ClassifyConfig default_classify_config(const ModelParams& p,
                                              std::optional<double> lstar) {
  ClassifyConfig cfg;
  cfg.l_star = lstar;
  cfg.L_spread = lstar ? 4.0 * *lstar : 40.0 * p.h0;
  cfg.hold_time = 10.0 / std::min(p.a, p.b);
  return cfg;
}

/// Accumulates the evidence record by record; shared by classify() and the
/// early-stop hook so both decide identically.
class EvidenceTracker {
 public:
  template <InfectionLaw G>
  EvidenceTracker(const ModelParams& p, const G& g, const ClassifyConfig& cfg)
      : p_(p), cfg_(cfg), r0_(r0(p, g)), theta_(theta(p, g)) {
    cfg.check();
    if (r0_ > 1.0) k1_ = equilibrium(p, g).k1;
  }

  void observe(const TrajectoryRecord& rec) {
    if (!first_) {
      first_ = rec;
      gap_bound_ = compute_gap_bound(rec);
    }
    const bool below = rec.max_u < cfg_.eps_vanish && rec.max_v < cfg_.eps_vanish;
    if (!below) below_since_.reset();
    else if (!below_since_) below_since_ = rec.t;
    last_ = rec;
    has_last_ = true;
  }

  bool front_growth(bool grid_escape) const {
    if (!has_last_) return false;
    const bool long_enough = grid_escape || last_.gap() >= cfg_.L_spread;
    return long_enough && k1_ && std::abs(last_.u_center - *k1_) <= cfg_.band * *k1_;
  }

  bool decay() const {
    if (!has_last_ || !below_since_) return false;
    return last_.t - *below_since_ >= cfg_.hold_time && last_.gap() <= gap_bound_;
  }

  Evidence evidence(const std::string& reason) const {
    Evidence e;
    e.truncation_reason = reason;
    if (!has_last_) return e;
    e.final_t = last_.t;
    e.final_gap = last_.gap();
    e.final_max_u = last_.max_u;
    e.final_max_v = last_.max_v;
    e.u_center = last_.u_center;
    if (k1_) e.u_center_err = std::abs(last_.u_center - *k1_) / *k1_;
    e.gap_bound = gap_bound_;
    e.hold_elapsed = below_since_ ? last_.t - *below_since_ : 0.0;
    e.front_growth = front_growth(reason == truncation::kGridEscape);
    e.decay = decay();
    return e;
  }

 private:
  /// theta <= 0: the mass bound (mu/d) int(u0 + (c/b) v0) + 2 h0.
  /// 0 < theta < d: a vanishing range never exceeds l*. The slack covers the
  /// window quadrature, whose critical length sits slightly above l*.
  /// theta >= d: vanishing is impossible, so the bound is 0.
  double compute_gap_bound(const TrajectoryRecord& first) const {
    if (theta_ <= 0.0) {
      const double mass = first.mass_u + p_.c / p_.b * first.mass_v;
      return (1.0 + cfg_.bound_slack) * (p_.mu / p_.d * mass + first.gap());
    }
    if (theta_ < p_.d && cfg_.l_star) return (1.0 + cfg_.lstar_slack) * *cfg_.l_star;
    return 0.0;
  }

  ModelParams p_;
  ClassifyConfig cfg_;
  double r0_;
  double theta_;
  std::optional<double> k1_;
  std::optional<TrajectoryRecord> first_;
  TrajectoryRecord last_;
  bool has_last_ = false;
  std::optional<double> below_since_;
  double gap_bound_ = 0.0;
};

template <InfectionLaw G>
Verdict classify(const Trajectory& traj, const ModelParams& p, const G& g,
                 const ClassifyConfig& cfg) {
  if (traj.records.empty())
    throw Error(ErrorKind::MissingDiagnostics, "trajectory has no records");
  const double max_spacing = cfg.hold_time / 4.0;
  for (std::size_t i = 1; i + 1 < traj.records.size(); ++i)
    if (traj.records[i].t - traj.records[i - 1].t > max_spacing * (1.0 + 1e-9))
      throw Error(ErrorKind::InvalidArgument,
                  "record spacing exceeds hold_time / 4 = " + std::to_string(max_spacing));

  EvidenceTracker tracker(p, g, cfg);
  for (const auto& rec : traj.records) tracker.observe(rec);

  Verdict v;
  v.evidence = tracker.evidence(traj.truncation_reason);
  if (v.evidence.front_growth && v.evidence.decay)
    throw Error(ErrorKind::InconsistentEvidence,
                "both spreading and vanishing evidence hold at t = " +
                    std::to_string(v.evidence.final_t));
  if (v.evidence.front_growth) v.outcome = Outcome::Spreading;
  else if (v.evidence.decay) v.outcome = Outcome::Vanishing;
  return v;
}

/// Hook for run_fb that stops as soon as either evidence set is complete.
template <InfectionLaw G>
RecordHook make_early_stop(const ModelParams& p, const G& g, const ClassifyConfig& cfg) {
  auto tracker = std::make_shared<EvidenceTracker>(p, g, cfg);
  return [tracker](const TrajectoryRecord& rec) {
    tracker->observe(rec);
    return tracker->front_growth(false) || tracker->decay();
  };
}

struct ClassifiedRun {
  Trajectory trajectory;
  Verdict verdict;
};

/// Runs to cfg.t_max (or until the verdict is settled) and classifies.
template <DispersalKernel K, InfectionLaw G>
ClassifiedRun simulate_and_classify(const InitialData& init, const ModelParams& p,
                                    const K& k, const G& g, RunConfig run,
                                    const ClassifyConfig& cfg) {
  run.t_end = cfg.t_max;
  ClassifiedRun out;
  out.trajectory = run_fb(init, p, k, g, run, make_early_stop(p, g, cfg));
  out.verdict = classify(out.trajectory, p, g, cfg);
  return out;
}

struct MuProbe {
  double mu = 0.0;
  Outcome outcome = Outcome::Undecided;
  double final_gap = 0.0;
  double final_t = 0.0;
};

struct MuStarResult {
  double mu_lo = 0.0;  // vanishing
  double mu_hi = 0.0;  // spreading
  double tol = 0.0;
  Verdict verdict_lo;
  Verdict verdict_hi;
  std::vector<MuProbe> probes;  // in evaluation order

  double mid() const { return 0.5 * (mu_lo + mu_hi); }
  double width() const { return mu_hi - mu_lo; }
};

struct MuStarOptions {
  double mu_lo = 1e-3;
  double mu_hi = 1.0;
  int max_growth = 40;
  int workers = 1;
};

/// Critical expansion coefficient for 0 < theta < d and 2 h0 < l*.
///
/// The bracket [mu_lo, mu_hi] is grown geometrically until mu_lo vanishes and
/// mu_hi spreads, then bisected to width < tol. The initial pair of probes
/// runs concurrently; bisection is sequential so the result does not depend
/// on the worker count.
template <DispersalKernel K, InfectionLaw G>
MuStarResult mu_star(const ModelParams& p_base, const K& k, const G& g,
                     const InitialData& init, const RunConfig& run,
                     const ClassifyConfig& cfg, double tol,
                     const MuStarOptions& opts = {}) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "mu_star tol must be > 0");
  if (!(opts.mu_lo > 0.0 && opts.mu_lo < opts.mu_hi))
    throw Error(ErrorKind::InvalidArgument, "mu_star needs 0 < mu_lo < mu_hi");
  require_critical_length_regime(p_base, g);
  const double lstar = cfg.l_star ? *cfg.l_star : l_star(k, p_base, g, 1e-10).value;
  if (!(2.0 * init.h0 < lstar))
    throw Error(ErrorKind::RegimeError,
                "2 h0 = " + std::to_string(2.0 * init.h0) + " >= l* = " +
                    std::to_string(lstar) + ": spreading for every mu");
  ClassifyConfig probe_cfg = cfg;
  probe_cfg.l_star = lstar;

  MuStarResult res;
  res.tol = tol;
  auto probe = [&](double mu) {
    ModelParams p = p_base;
    p.mu = mu;
    p.h0 = init.h0;
    return simulate_and_classify(init, p, k, g, run, probe_cfg).verdict;
  };
  auto record = [&](double mu, const Verdict& v) {
    res.probes.push_back({mu, v.outcome, v.evidence.final_gap, v.evidence.final_t});
    if (v.outcome == Outcome::Undecided)
      throw Error(ErrorKind::UndecidedRun,
                  "probe at mu = " + std::to_string(mu) + " is undecided at t_max = " +
                      std::to_string(probe_cfg.t_max));
  };

  double lo = opts.mu_lo, hi = opts.mu_hi;
  Verdict vlo, vhi;
  {
    std::vector<Verdict> pair(2);
    const double mus[2] = {lo, hi};
    parallel_for(2, opts.workers, [&](std::size_t i) { pair[i] = probe(mus[i]); });
    record(lo, pair[0]);
    record(hi, pair[1]);
    vlo = pair[0];
    vhi = pair[1];
  }
  for (int i = 0; vlo.outcome == Outcome::Spreading; ++i) {
    if (i >= opts.max_growth)
      throw Error(ErrorKind::NoConvergence, "no vanishing mu found down to " + std::to_string(lo));
    hi = lo;
    vhi = vlo;
    lo *= 0.5;
    vlo = probe(lo);
    record(lo, vlo);
  }
  for (int i = 0; vhi.outcome == Outcome::Vanishing; ++i) {
    if (i >= opts.max_growth)
      throw Error(ErrorKind::NoConvergence, "no spreading mu found up to " + std::to_string(hi));
    lo = hi;
    vlo = vhi;
    hi *= 2.0;
    vhi = probe(hi);
    record(hi, vhi);
  }
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    const Verdict vm = probe(mid);
    record(mid, vm);
    if (vm.outcome == Outcome::Spreading) {
      hi = mid;
      vhi = vm;
    } else {
      lo = mid;
      vlo = vm;
    }
  }
  res.mu_lo = lo;
  res.mu_hi = hi;
  res.verdict_lo = vlo;
  res.verdict_hi = vhi;
  return res;
}

/// Region predicted from R0, theta and l* alone.
enum class Prediction { Vanishing, Spreading, MuDependent };

constexpr std::string_view to_string(Prediction pr) {
  switch (pr) {
    case Prediction::Vanishing: return "vanishing";
    case Prediction::Spreading: return "spreading";
    case Prediction::MuDependent: return "mu_dependent";
  }
  return "mu_dependent";
}

inline Prediction predict(double R0, double th, double d, double h0,
                          std::optional<double> lstar) {
  if (R0 <= 1.0) return Prediction::Vanishing;
  if (th >= d) return Prediction::Spreading;
  if (lstar && 2.0 * h0 >= *lstar) return Prediction::Spreading;
  return Prediction::MuDependent;
}

struct SweepSpec {
  std::vector<double> alphas;
  std::vector<double> h0s;
  std::vector<double> mus;
  /// Overrides of the per-row classify defaults; L_spread and l_star are
  /// always derived per row.
  std::optional<double> eps_vanish;
  std::optional<double> hold_time;
  double t_max = 1000.0;
  int eigen_n = 401;
};

struct SweepRow {
  double alpha = 0.0;
  double h0 = 0.0;
  double mu = 0.0;
  double R0 = 0.0;
  double theta = 0.0;
  std::optional<double> l_star;
  Prediction predicted = Prediction::MuDependent;
  std::optional<Verdict> verdict;  // empty when the row failed
  std::string error;
};

/// One verdict per (alpha, h0, mu) triple, in that nesting order. Rows run
/// concurrently; a failing row records its error and the sweep continues.
template <DispersalKernel K>
std::vector<SweepRow> phase_sweep(const SweepSpec& spec, const ModelParams& base,
                                  const K& k, GrowthFamily family,
                                  const InitialData& init_shape, const RunConfig& run,
                                  int workers = 1) {
  if (spec.alphas.empty() || spec.h0s.empty() || spec.mus.empty())
    throw Error(ErrorKind::InvalidArgument, "sweep grids must be non-empty");

  std::vector<SweepRow> rows;
  for (double alpha : spec.alphas)
    for (double h0 : spec.h0s)
      for (double mu : spec.mus) {
        SweepRow r;
        r.alpha = alpha;
        r.h0 = h0;
        r.mu = mu;
        rows.push_back(r);
      }

  // l* depends on alpha only.
  std::vector<std::optional<double>> lstars(spec.alphas.size());
  std::vector<std::string> lstar_errors(spec.alphas.size());
  parallel_for(spec.alphas.size(), workers, [&](std::size_t i) {
    try {
      const GrowthLaw g(family, spec.alphas[i]);
      lstars[i] = critical_length_if_any(k, base, g, spec.eigen_n);
    } catch (const std::exception& e) {
      lstar_errors[i] = e.what();
    }
  });
  const std::size_t per_alpha = spec.h0s.size() * spec.mus.size();

  parallel_for(rows.size(), workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    const std::size_t ai = i / per_alpha;
    try {
      if (!lstar_errors[ai].empty()) throw std::runtime_error(lstar_errors[ai]);
      const GrowthLaw g(family, row.alpha);
      ModelParams p = base;
      p.mu = row.mu;
      p.h0 = row.h0;
      p.check();
      row.R0 = r0(p, g);
      row.theta = theta(p, g);
      row.l_star = lstars[ai];
      row.predicted = predict(row.R0, row.theta, p.d, row.h0, row.l_star);

      ClassifyConfig cfg = default_classify_config(p, row.l_star);
      if (spec.eps_vanish) cfg.eps_vanish = *spec.eps_vanish;
      if (spec.hold_time) cfg.hold_time = *spec.hold_time;
      cfg.t_max = spec.t_max;
      InitialData init = init_shape;
      init.h0 = row.h0;
      row.verdict = simulate_and_classify(init, p, k, g, run, cfg).verdict;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace nlfb
