#pragma once

// Principal eigenvalue of d (J * phi) - d phi + theta phi on an interval,
// the critical length where it changes sign, and the positive steady state
// of the fixed-interval system.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nlfb/dynamics.hpp"
#include "nlfb/error.hpp"
#include "nlfb/growth.hpp"
#include "nlfb/kernels.hpp"
#include "nlfb/numerics.hpp"
#include "nlfb/quadgrid.hpp"

namespace nlfb {

struct SpectralResult {
  double lambda_p = 0.0;
  Field phi;  // positive, max-normalized
  double l1 = 0.0;
  double l2 = 0.0;
  int n = 0;
  long iterations = 0;
  double residual = 0.0;  // sup |M phi - lambda_p phi|
};

struct PowerIterationOptions {
  double tol = 1e-12;           // on the Rayleigh-quotient increment
  double residual_tol = 1e-9;   // on sup |M phi - lambda phi|
  long max_iterations = 100000;
};

/// Discretized operator (M phi)_i = d sum_j w_j J(x_i - x_j) phi_j
///                                   + (theta - d) phi_i
/// with trapezoid weights. Stored matrix-free: the kernel stencil is the
/// band of the dense matrix, and entries beyond it are exactly zero.
class IntervalOperator {
 public:
  template <DispersalKernel K>
  IntervalOperator(const K& k, double d, double theta, double l1, double l2, int n)
      : interval_(l1, l2, n, k), d_(d), theta_(theta),
        scratch_(static_cast<std::size_t>(n), 0.0) {}

  const IntervalGrid& interval() const { return interval_; }
  int n() const { return interval_.n(); }

  void apply(std::span<const double> x, std::span<double> y) const {
    interval_.convolve(x, y);
    const double diag = theta_ - d_;
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = d_ * y[i] + diag * x[i];
  }

  /// Dense form; meant for small n (tests and debugging).
  std::vector<std::vector<double>> dense() const {
    const int n = interval_.n();
    std::vector<std::vector<double>> m(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n)));
    const auto& st = interval_.stencil();
    const auto w = interval_.weights();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int off = j - i;
        const double jv = std::abs(off) <= st.half_width() ? st.at(off) : 0.0;
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            d_ * w[static_cast<std::size_t>(j)] * jv + (i == j ? theta_ - d_ : 0.0);
      }
    return m;
  }

  /// Inner product under which M is self-adjoint.
  double dot(std::span<const double> x, std::span<const double> y) const {
    const auto w = interval_.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i] * y[i];
    return s;
  }

  double residual(std::span<const double> phi, double lambda) const {
    apply(phi, scratch_);
    double r = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
      r = std::max(r, std::abs(scratch_[i] - lambda * phi[i]));
    return r;
  }

 private:
  IntervalGrid interval_;
  double d_;
  double theta_;
  mutable Field scratch_;
};

/// Power iteration on M + (d - theta + 1) I, which is entrywise nonnegative
/// with a positive diagonal, so the iteration converges to the Perron pair.
template <DispersalKernel K, InfectionLaw G>
SpectralResult lambda_p(const K& k, const ModelParams& p, const G& g, double l1,
                        double l2, int n, const PowerIterationOptions& opts = {}) {
  if (!(l1 < l2)) throw Error(ErrorKind::InvalidArgument, "lambda_p requires l1 < l2");
  if (n < 16) throw Error(ErrorKind::InvalidArgument, "lambda_p requires n >= 16");
  const double th = theta(p, g);
  const IntervalOperator op(k, p.d, th, l1, l2, n);
  const double shift = p.d - th + 1.0;

  // A positive start close to the principal mode keeps the iteration short.
  Field x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<std::size_t>(i)] =
        std::sin(std::numbers::pi * (i + 1.0) / (n + 1.0));

  // x stays max-normalized, so y - rq x is the eigen-residual of x.
  double rq = 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  long it = 0;
  for (; it < opts.max_iterations; ++it) {
    op.apply(x, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += shift * x[i];
    rq = op.dot(x, y) / op.dot(x, x);
    double resid = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) resid = std::max(resid, std::abs(y[i] - rq * x[i]));
    const double ymax = *std::max_element(y.begin(), y.end());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] / ymax;
    if (std::abs(rq - prev) < opts.tol && resid < opts.residual_tol) break;
    prev = rq;
  }
  if (it == opts.max_iterations)
    throw Error(ErrorKind::NoConvergence,
                "power iteration on (" + std::to_string(l1) + ", " + std::to_string(l2) +
                    ") stalled; last increment " + std::to_string(std::abs(rq - prev)));

  SpectralResult res;
  res.lambda_p = rq - shift;
  res.phi = std::move(x);
  res.l1 = l1;
  res.l2 = l2;
  res.n = n;
  res.iterations = it + 1;
  res.residual = op.residual(res.phi, res.lambda_p);
  return res;
}

struct LStarResult {
  double value = 0.0;
  double lo = 0.0;  // lambda_p < 0 at this length
  double hi = 0.0;  // lambda_p > 0 at this length
  int n = 0;
};

/// Throws RegimeError unless 0 < theta < d, the only regime with a finite
/// critical length.
template <InfectionLaw G>
void require_critical_length_regime(const ModelParams& p, const G& g) {
  const double th = theta(p, g);
  if (th <= 0.0)
    throw Error(ErrorKind::RegimeError,
                "theta = " + std::to_string(th) + " <= 0 (R0 <= 1): vanishing for every length");
  if (th >= p.d)
    throw Error(ErrorKind::RegimeError,
                "theta = " + std::to_string(th) + " >= d: spreading for every length");
}

/// Critical length: bisection on the interval length (centered at 0, fixed
/// node count n) for the sign change of lambda_p.
template <DispersalKernel K, InfectionLaw G>
LStarResult l_star(const K& k, const ModelParams& p, const G& g, double tol, int n = 401) {
  require_critical_length_regime(p, g);
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "l_star tol must be > 0");
  auto lam = [&](double len) { return lambda_p(k, p, g, -0.5 * len, 0.5 * len, n).lambda_p; };

  double hi = k.truncation_radius();
  double lo = 0.25 * hi;
  for (int i = 0; i < 60 && lam(hi) <= 0.0; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 60 && lam(lo) >= 0.0; ++i) {
    hi = lo;
    lo *= 0.5;
  }
  if (!(lam(hi) > 0.0) || !(lam(lo) < 0.0))
    throw Error(ErrorKind::NoConvergence, "could not bracket the critical length");
  const auto b = numerics::bisect([&](double len) { return lam(len) > 0.0; }, lo, hi, tol);
  return {b.mid(), b.lo, b.hi, n};
}

struct SteadyState {
  Field W;
  Field Z;
  double lambda_p = 0.0;
  long steps = 0;
  double gap = 0.0;  // final sup distance between the upper and lower marches
  bool lower_monotone = true;  // lower march nondecreasing at every node
  bool upper_monotone = true;  // upper march nonincreasing at every node
};

struct SteadyStateOptions {
  long max_steps = 5'000'000;
  double monotone_slack = 1e-12;
};

/// Unique nonnegative steady state of the fixed-interval system.
///
/// When lambda_p > 0 the system is marched from an ordered lower solution
/// (eps phi, (G'(0)/b - lambda_p/(4c)) eps phi) and an upper solution
/// (M1, M2) with G(M1) < b M2 < (ab/c) M1. Both marches are monotone in time
/// and squeeze the steady state; they stop once their sup distance is below
/// tol. When lambda_p <= 0 the steady state is identically zero.
template <DispersalKernel K, InfectionLaw G>
SteadyState steady_state(const K& k, const ModelParams& p, const G& g, double l1,
                         double l2, int n, double tol,
                         const SteadyStateOptions& opts = {}) {
  const auto spec = lambda_p(k, p, g, l1, l2, n);
  SteadyState out;
  out.lambda_p = spec.lambda_p;
  const auto un = static_cast<std::size_t>(n);
  if (spec.lambda_p <= 0.0) {
    out.W.assign(un, 0.0);
    out.Z.assign(un, 0.0);
    return out;
  }

  FixedDomainSolver<K, G> solver(l1, l2, n, p, k, g);
  const double lam = spec.lambda_p;
  const double z_factor = g.derivative(0.0) / p.b - lam / (4.0 * p.c);
  const auto eq = equilibrium(p, g);

  // Lower solution: shrink eps until the discrete right-hand side is
  // nonnegative at every node.
  Field w_lo(un), z_lo(un), dw(un), dz(un);
  double eps = 1e-3 * std::min(1.0, eq.k1);
  bool lower_ok = false;
  for (int attempt = 0; attempt < 12 && !lower_ok; ++attempt, eps *= 0.1) {
    for (std::size_t i = 0; i < un; ++i) {
      w_lo[i] = eps * spec.phi[i];
      z_lo[i] = z_factor * eps * spec.phi[i];
    }
    solver.rhs(w_lo, z_lo, dw, dz);
    lower_ok = std::all_of(dw.begin(), dw.end(), [](double v) { return v >= 0.0; }) &&
               std::all_of(dz.begin(), dz.end(), [](double v) { return v >= 0.0; });
  }
  if (!lower_ok)
    throw Error(ErrorKind::NoConvergence, "no admissible lower solution found");

  const double m1 = 2.0 * eq.k1;
  const double m2 = 0.5 * (g.value(m1) / p.b + p.a / p.c * m1);
  Field w_hi(un, m1), z_hi(un, m2);

  const double dt = 0.49 * std::min(1.0 / (p.d + p.a), 1.0 / p.b);
  Field w_prev(un), z_prev(un);
  auto sup_gap = [&] {
    double gap = 0.0;
    for (std::size_t i = 0; i < un; ++i)
      gap = std::max({gap, w_hi[i] - w_lo[i], z_hi[i] - z_lo[i],
                      w_lo[i] - w_hi[i], z_lo[i] - z_hi[i]});
    return gap;
  };

  double gap = sup_gap();
  long step = 0;
  for (; step < opts.max_steps && gap >= tol; ++step) {
    w_prev = w_lo;
    z_prev = z_lo;
    solver.step(w_lo, z_lo, dt);
    double lo_change = 0.0;
    for (std::size_t i = 0; i < un; ++i) {
      if (w_lo[i] < w_prev[i] - opts.monotone_slack ||
          z_lo[i] < z_prev[i] - opts.monotone_slack)
        out.lower_monotone = false;
      lo_change = std::max({lo_change, std::abs(w_lo[i] - w_prev[i]),
                            std::abs(z_lo[i] - z_prev[i])});
    }
    w_prev = w_hi;
    z_prev = z_hi;
    solver.step(w_hi, z_hi, dt);
    double hi_change = 0.0;
    for (std::size_t i = 0; i < un; ++i) {
      if (w_hi[i] > w_prev[i] + opts.monotone_slack ||
          z_hi[i] > z_prev[i] + opts.monotone_slack)
        out.upper_monotone = false;
      hi_change = std::max({hi_change, std::abs(w_hi[i] - w_prev[i]),
                            std::abs(z_hi[i] - z_prev[i])});
    }
    gap = sup_gap();
    // Both marches have stalled without meeting: they converged to
    // different limits, which uniqueness rules out.
    if (lo_change < 1e-3 * tol * dt && hi_change < 1e-3 * tol * dt && gap > 10.0 * tol)
      throw Error(ErrorKind::SandwichMismatch,
                  "upper and lower limits differ by " + std::to_string(gap));
  }
  if (gap >= tol)
    throw Error(ErrorKind::NoConvergence,
                "steady-state marches still " + std::to_string(gap) + " apart");

  out.steps = step;
  out.gap = gap;
  out.W.resize(un);
  out.Z.resize(un);
  for (std::size_t i = 0; i < un; ++i) {
    out.W[i] = 0.5 * (w_lo[i] + w_hi[i]);
    out.Z[i] = g.value(out.W[i]) / p.b;
  }
  return out;
}

}  // namespace nlfb
