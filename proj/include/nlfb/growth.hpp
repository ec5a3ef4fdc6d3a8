#pragma once

// Infection-rate laws G and the model scalars derived from them.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <string_view>

#include "nlfb/error.hpp"
#include "nlfb/numerics.hpp"
#include "nlfb/report.hpp"

namespace nlfb {

enum class GrowthFamily { Hill, SaturatingExp };

constexpr std::string_view to_string(GrowthFamily f) {
  return f == GrowthFamily::Hill ? "hill" : "saturating_exp";
}

inline GrowthFamily growth_family_from_string(std::string_view name) {
  if (name == "hill") return GrowthFamily::Hill;
  if (name == "saturating_exp") return GrowthFamily::SaturatingExp;
  throw Error(ErrorKind::InvalidArgument,
              "unknown growth family '" + std::string(name) + "'");
}

template <class G>
concept InfectionLaw = requires(const G& g, double z) {
  { g.value(z) } -> std::convertible_to<double>;
  { g.derivative(z) } -> std::convertible_to<double>;
};

/// Hill: alpha z / (1 + z). SaturatingExp: alpha (1 - exp(-z)).
/// Both have G'(0) = alpha.
class GrowthLaw {
 public:
  GrowthLaw(GrowthFamily family, double alpha) : family_(family), alpha_(alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw Error(ErrorKind::InvalidArgument, "growth alpha must be > 0");
  }

  static GrowthLaw hill(double alpha) { return {GrowthFamily::Hill, alpha}; }
  static GrowthLaw saturating_exp(double alpha) {
    return {GrowthFamily::SaturatingExp, alpha};
  }

  GrowthFamily family() const { return family_; }
  double alpha() const { return alpha_; }

  double value(double z) const {
    return family_ == GrowthFamily::Hill ? alpha_ * z / (1.0 + z)
                                         : -alpha_ * std::expm1(-z);
  }

  double derivative(double z) const {
    if (family_ == GrowthFamily::Hill) {
      const double q = 1.0 + z;
      return alpha_ / (q * q);
    }
    return alpha_ * std::exp(-z);
  }

  friend bool operator==(const GrowthLaw&, const GrowthLaw&) = default;

 private:
  GrowthFamily family_;
  double alpha_;
};

static_assert(InfectionLaw<GrowthLaw>);

/// The six positive constants of the free-boundary system.
struct ModelParams {
  double a = 1.0;   // agent decay
  double b = 1.0;   // recovery of infected humans
  double c = 1.0;   // agent production by infected humans
  double d = 1.0;   // dispersal rate
  double mu = 1.0;  // front expansion coefficient
  double h0 = 1.0;  // half-length of the initial range

  void check() const {
    auto require = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::InvalidArgument,
                    std::string("parameter '") + name + "' must be > 0");
    };
    require(a, "a");
    require(b, "b");
    require(c, "c");
    require(d, "d");
    require(mu, "mu");
    require(h0, "h0");
  }
};

template <InfectionLaw G>
double r0(const ModelParams& p, const G& g) {
  return p.c * g.derivative(0.0) / (p.a * p.b);
}

template <InfectionLaw G>
double theta(const ModelParams& p, const G& g) {
  return p.c * g.derivative(0.0) / p.b - p.a;
}

struct Equilibrium {
  double k1;
  double k2;
};

/// Endemic equilibrium: the unique positive root of G(z)/z = ab/c.
///
/// The returned K1 is the upper end of the final bisection bracket, so the
/// inequality G(K1)/b <= (a/c) K1 holds exactly in floating point.
template <InfectionLaw G>
Equilibrium equilibrium(const ModelParams& p, const G& g) {
  const double R0 = r0(p, g);
  if (!(R0 > 1.0))
    throw Error(ErrorKind::NoPositiveEquilibrium,
                "R0 = " + std::to_string(R0) + " <= 1");
  const double ratio = p.a / p.c;
  auto at_or_above_root = [&](double z) { return g.value(z) / p.b <= ratio * z; };

  const double lo = 1e-14;
  if (at_or_above_root(lo))
    throw Error(ErrorKind::NoPositiveEquilibrium, "no sign change near zero");
  double hi = std::max(10.0 * R0, 10.0);
  for (int i = 0; i < 200 && !at_or_above_root(hi); ++i) hi *= 2.0;
  if (!at_or_above_root(hi))
    throw Error(ErrorKind::NoPositiveEquilibrium, "root not bracketed");

  const auto bracket = numerics::bisect(at_or_above_root, lo, hi, 1e-12);
  const double k1 = bracket.hi;
  return {k1, g.value(k1) / p.b};
}

/// R0, theta, the equilibrium, and the a-priori bounds A, B of the solution.
/// K1 and K2 are 0 when no positive equilibrium exists.
struct DerivedScalars {
  double r0 = 0.0;
  double theta = 0.0;
  bool has_equilibrium = false;
  double k1 = 0.0;
  double k2 = 0.0;
  double a_bound = 0.0;
  double b_bound = 0.0;
};

template <InfectionLaw G>
DerivedScalars derived_scalars(const ModelParams& p, const G& g, double u0_sup,
                               double v0_sup) {
  DerivedScalars s;
  s.r0 = r0(p, g);
  s.theta = theta(p, g);
  if (s.r0 > 1.0) {
    const auto eq = equilibrium(p, g);
    s.has_equilibrium = true;
    s.k1 = eq.k1;
    s.k2 = eq.k2;
  }
  s.a_bound = std::max({s.k1, u0_sup, p.c / p.a * v0_sup});
  // Round A up so that (a/c) A >= |v0| also holds in floating point.
  while (p.a / p.c * s.a_bound < v0_sup)
    s.a_bound = std::nextafter(s.a_bound, std::numeric_limits<double>::infinity());
  s.b_bound = std::max(v0_sup, g.value(s.a_bound) / p.b);
  return s;
}

/// Structural checks for the growth assumptions on a 1000-point grid in
/// (0, z_max], plus the limit condition G(z_max)/z_max < ab/c.
template <InfectionLaw G>
ValidationReport validate_growth(const G& g, const ModelParams& p, double z_max) {
  if (!(z_max > 0.0))
    throw Error(ErrorKind::InvalidArgument, "z_max must be > 0");
  constexpr int kPoints = 1000;
  ValidationReport report;
  report.add("zero_at_origin", g.value(0.0) == 0.0);

  bool increasing = true;
  bool ratio_decreasing = true;
  double prev_ratio = g.derivative(0.0);
  for (int i = 1; i <= kPoints; ++i) {
    const double z = z_max * i / kPoints;
    if (!(g.derivative(z) > 0.0)) increasing = false;
    const double ratio = g.value(z) / z;
    if (ratio > prev_ratio * (1.0 + 1e-12)) ratio_decreasing = false;
    prev_ratio = ratio;
  }
  report.add("derivative_positive", increasing);
  report.add("ratio_decreasing", ratio_decreasing);

  const double limit = g.value(z_max) / z_max;
  const double threshold = p.a * p.b / p.c;
  report.add("ratio_limit_below_ab_over_c", limit < threshold,
             "G(z_max)/z_max = " + std::to_string(limit) +
                 ", ab/c = " + std::to_string(threshold));
  return report;
}

}  // namespace nlfb
