#pragma once

// Dispersal kernels J: symmetric, nonnegative, J(0) > 0, unit mass.
// Each built-in family carries a closed-form tail mass T(r) = int_r^inf J.

#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "nlfb/error.hpp"
#include "nlfb/numerics.hpp"
#include "nlfb/report.hpp"

namespace nlfb {

enum class KernelFamily { Gaussian, Laplace, CompactQuadratic };

constexpr std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplace: return "laplace";
    case KernelFamily::CompactQuadratic: return "compact_quadratic";
  }
  return "unknown";
}

inline KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "laplace") return KernelFamily::Laplace;
  if (name == "compact_quadratic") return KernelFamily::CompactQuadratic;
  throw Error(ErrorKind::InvalidArgument,
              "unknown kernel family '" + std::string(name) + "'");
}

/// Mass left outside the truncation radius of infinite-support kernels.
inline constexpr double kTruncationMass = 1e-10;

/// Anything that looks like a dispersal kernel. Validation and the quadrature
/// routines are written against this so test fixtures can stand in.
template <class K>
concept DispersalKernel = requires(const K& k, double x) {
  { k.density(x) } -> std::convertible_to<double>;
  { k.tail(x) } -> std::convertible_to<double>;
  { k.support_radius() } -> std::convertible_to<double>;
  { k.truncation_radius() } -> std::convertible_to<double>;
};

class Kernel {
 public:
  Kernel(KernelFamily family, double sigma) : family_(family), sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw Error(ErrorKind::InvalidArgument, "kernel sigma must be > 0");
    truncation_ = compute_truncation_radius();
  }

  static Kernel gaussian(double sigma) { return {KernelFamily::Gaussian, sigma}; }
  static Kernel laplace(double sigma) { return {KernelFamily::Laplace, sigma}; }
  static Kernel compact_quadratic(double sigma) {
    return {KernelFamily::CompactQuadratic, sigma};
  }

  KernelFamily family() const { return family_; }
  double sigma() const { return sigma_; }

  /// +inf for Gaussian and Laplace.
  double support_radius() const {
    return family_ == KernelFamily::CompactQuadratic
               ? sigma_
               : std::numeric_limits<double>::infinity();
  }

  /// Radius holding all but kTruncationMass of the mass (the support radius
  /// for compactly supported kernels). Convolutions never look further.
  double truncation_radius() const { return truncation_; }

  double density(double x) const {
    const double s = x / sigma_;
    switch (family_) {
      case KernelFamily::Gaussian:
        return std::exp(-0.5 * s * s) / (sigma_ * std::sqrt(2.0 * std::numbers::pi));
      case KernelFamily::Laplace:
        return std::exp(-std::abs(s)) / (2.0 * sigma_);
      case KernelFamily::CompactQuadratic:
        return std::abs(s) >= 1.0 ? 0.0 : 0.75 * (1.0 - s * s) / sigma_;
    }
    return 0.0;
  }

  /// T(r) = int_r^inf J(s) ds. T(-r) = 1 - T(r).
  double tail(double r) const {
    const double s = r / sigma_;
    switch (family_) {
      case KernelFamily::Gaussian:
        return 0.5 * std::erfc(s / std::numbers::sqrt2);
      case KernelFamily::Laplace:
        return s >= 0.0 ? 0.5 * std::exp(-s) : 1.0 - 0.5 * std::exp(s);
      case KernelFamily::CompactQuadratic: {
        if (s >= 1.0) return 0.0;
        if (s <= -1.0) return 1.0;
        const double t = std::abs(s);
        const double upper = 0.5 - 0.75 * t + 0.25 * t * t * t;
        return s >= 0.0 ? upper : 1.0 - upper;
      }
    }
    return 0.0;
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  double compute_truncation_radius() const {
    switch (family_) {
      case KernelFamily::CompactQuadratic:
        return sigma_;
      case KernelFamily::Laplace:
        // 2 * T(R) = exp(-R / sigma)
        return sigma_ * std::log(1.0 / kTruncationMass);
      case KernelFamily::Gaussian: {
        const auto b = numerics::bisect(
            [this](double r) { return 2.0 * tail(r) <= kTruncationMass; },
            0.0, 20.0 * sigma_, 1e-12 * sigma_);
        return b.hi;
      }
    }
    return sigma_;
  }

  KernelFamily family_;
  double sigma_;
  double truncation_ = 0.0;
};

static_assert(DispersalKernel<Kernel>);

/// Checks each clause of the kernel assumption: J(0) > 0, symmetry,
/// nonnegativity, unit mass, and the tail-mass properties.
template <DispersalKernel K>
ValidationReport validate_kernel(const K& k, int samples) {
  if (samples < 16)
    throw Error(ErrorKind::InvalidArgument, "validate_kernel needs >= 16 samples");
  ValidationReport report;
  const double radius = k.truncation_radius();

  report.add("positive_at_origin", k.density(0.0) > 0.0);

  bool symmetric = true;
  bool nonnegative = true;
  bool tail_monotone = true;
  double prev_tail = k.tail(-radius);
  for (int i = 0; i < samples; ++i) {
    const double x = -radius + 2.0 * radius * i / (samples - 1);
    const double jp = k.density(x);
    const double jm = k.density(-x);
    if (std::abs(jp - jm) > 1e-14 * std::max(1.0, std::abs(jp))) symmetric = false;
    if (jp < 0.0) nonnegative = false;
    const double t = k.tail(x);
    if (t > prev_tail + 1e-15) tail_monotone = false;
    prev_tail = t;
  }
  report.add("symmetric", symmetric);
  report.add("nonnegative", nonnegative);

  // Split at the origin and at the support edge so kinks sit on panel ends.
  auto J = [&k](double x) { return k.density(x); };
  const double mass = numerics::adaptive_simpson(J, -radius, 0.0, 1e-13) +
                      numerics::adaptive_simpson(J, 0.0, radius, 1e-13);
  const bool unit_mass = std::abs(mass - 1.0) <= 1e-8 + kTruncationMass;
  report.add("unit_mass", unit_mass, "integral = " + std::to_string(mass));

  report.add("tail_monotone", tail_monotone);
  report.add("tail_half_at_zero", std::abs(k.tail(0.0) - 0.5) <= 1e-12);
  report.add("tail_vanishes", k.tail(radius) <= kTruncationMass &&
                                  k.tail(2.0 * radius) <= kTruncationMass);
  return report;
}

}  // namespace nlfb
