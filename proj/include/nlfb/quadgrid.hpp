#pragma once

// Master grid, trapezoid quadrature over a moving window [g, h] with partial
// end cells, direct-summation nonlocal convolution, and the boundary fluxes.
//
// Fields vanish at the window ends, so the fractional cells [g, x_first] and
// [x_last, h] are integrated by linear interpolation towards zero. That makes
// the quadrature a weighted sum with weight
//   w_i = (min(x_{i+1}, h) - max(x_{i-1}, g)) / 2
// on each active node (g < x_i < h).

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nlfb/error.hpp"
#include "nlfb/kernels.hpp"

namespace nlfb {

using Field = std::vector<double>;

/// Uniform grid on [-L, L] with an odd node count, so x = 0 is a node and
/// the node set is exactly symmetric about it.
class Grid {
 public:
  Grid(double half_length, int nodes) : L_(half_length), n_(nodes) {
    if (!(half_length > 0.0))
      throw Error(ErrorKind::InvalidArgument, "grid L must be > 0");
    if (nodes < 3 || nodes % 2 == 0)
      throw Error(ErrorKind::InvalidArgument, "grid n must be odd and >= 3");
    dx_ = 2.0 * L_ / (n_ - 1);
    mid_ = (n_ - 1) / 2;
  }

  double L() const { return L_; }
  int n() const { return n_; }
  double dx() const { return dx_; }
  int center() const { return mid_; }
  double x(int i) const { return (i - mid_) * dx_; }

  Field zeros() const { return Field(static_cast<std::size_t>(n_), 0.0); }

 private:
  double L_;
  int n_;
  double dx_;
  int mid_;
};

struct ActiveWindow {
  double g;
  double h;
  double length() const { return h - g; }
};

/// Indices of the nodes strictly inside the window; empty when first > last.
struct ActiveRange {
  int first;
  int last;
  bool empty() const { return first > last; }
  int size() const { return empty() ? 0 : last - first + 1; }
};

inline void check_window(const ActiveWindow& w, const Grid& grid) {
  if (!(w.g < w.h))
    throw Error(ErrorKind::InvalidArgument, "window requires g < h");
  if (w.g < -grid.L() || w.h > grid.L())
    throw Error(ErrorKind::WindowOutOfGrid,
                "window [" + std::to_string(w.g) + ", " + std::to_string(w.h) +
                    "] leaves [-L, L] with L = " + std::to_string(grid.L()));
}

inline ActiveRange active_range(const ActiveWindow& w, const Grid& grid) {
  const double dx = grid.dx();
  int first = static_cast<int>(std::floor(w.g / dx)) + grid.center();
  int last = static_cast<int>(std::ceil(w.h / dx)) + grid.center();
  first = std::clamp(first, 0, grid.n() - 1);
  last = std::clamp(last, 0, grid.n() - 1);
  while (first < grid.n() && grid.x(first) <= w.g) ++first;
  while (last >= 0 && grid.x(last) >= w.h) --last;
  return {first, last};
}

/// Quadrature weights on the active nodes, indexed from range.first.
inline std::vector<double> window_weights(const ActiveWindow& w, const Grid& grid,
                                          const ActiveRange& r) {
  std::vector<double> wts(static_cast<std::size_t>(r.size()));
  for (int i = r.first; i <= r.last; ++i) {
    const double left = i == r.first ? w.g : grid.x(i - 1);
    const double right = i == r.last ? w.h : grid.x(i + 1);
    wts[static_cast<std::size_t>(i - r.first)] = 0.5 * (right - left);
  }
  return wts;
}

inline double active_quadrature(std::span<const double> f, const ActiveWindow& w,
                                const Grid& grid) {
  check_window(w, grid);
  const auto r = active_range(w, grid);
  if (r.empty()) return 0.0;
  const auto wts = window_weights(w, grid, r);
  double sum = 0.0;
  for (int i = r.first; i <= r.last; ++i)
    sum += wts[static_cast<std::size_t>(i - r.first)] * f[static_cast<std::size_t>(i)];
  return sum;
}

/// Kernel values J(k dx) for |k| <= half_width, where half_width covers the
/// truncation radius. Reused across steps on a fixed grid.
class KernelStencil {
 public:
  template <DispersalKernel K>
  KernelStencil(const K& k, double dx) {
    half_width_ = static_cast<int>(std::ceil(k.truncation_radius() / dx));
    values_.resize(static_cast<std::size_t>(2 * half_width_ + 1));
    for (int m = -half_width_; m <= half_width_; ++m)
      values_[static_cast<std::size_t>(m + half_width_)] = k.density(m * dx);
  }

  int half_width() const { return half_width_; }
  /// J((offset) dx) for offset in [-half_width, half_width].
  double at(int offset) const {
    return values_[static_cast<std::size_t>(offset + half_width_)];
  }
  const double* centered() const { return values_.data() + half_width_; }

 private:
  int half_width_ = 0;
  std::vector<double> values_;
};

/// (K f)_i = sum_j w_j J(x_i - x_j) f_j for active i, into `out` (which must
/// be zero outside the range). Summation order per node is fixed.
inline void convolve_active(std::span<const double> f, const ActiveRange& r,
                            std::span<const double> wts,
                            const KernelStencil& stencil, std::span<double> out) {
  const int m = stencil.half_width();
  const double* J = stencil.centered();
  for (int i = r.first; i <= r.last; ++i) {
    const int j0 = std::max(r.first, i - m);
    const int j1 = std::min(r.last, i + m);
    double acc = 0.0;
    for (int j = j0; j <= j1; ++j)
      acc += wts[static_cast<std::size_t>(j - r.first)] * J[j - i] *
             f[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc;
  }
}

template <DispersalKernel K>
Field nonlocal_convolve(std::span<const double> f, const ActiveWindow& w,
                        const K& k, const Grid& grid) {
  check_window(w, grid);
  Field out = grid.zeros();
  const auto r = active_range(w, grid);
  if (r.empty()) return out;
  const auto wts = window_weights(w, grid, r);
  const KernelStencil stencil(k, grid.dx());
  convolve_active(f, r, wts, stencil, out);
  return out;
}

/// int_g^h J(x - y) f(y) dy at an arbitrary point x, same quadrature.
template <DispersalKernel K>
double convolve_at(std::span<const double> f, const ActiveWindow& w, const K& k,
                   const Grid& grid, double x) {
  check_window(w, grid);
  const auto r = active_range(w, grid);
  if (r.empty()) return 0.0;
  const auto wts = window_weights(w, grid, r);
  double acc = 0.0;
  for (int j = r.first; j <= r.last; ++j)
    acc += wts[static_cast<std::size_t>(j - r.first)] * k.density(x - grid.x(j)) *
           f[static_cast<std::size_t>(j)];
  return acc;
}

enum class Side { Left, Right };

/// Flux sums for both fronts given precomputed range and weights. Only nodes
/// within the truncation radius of a front contribute.
template <DispersalKernel K>
double boundary_flux_active(std::span<const double> f, const ActiveWindow& w,
                            const K& k, const Grid& grid, const ActiveRange& r,
                            std::span<const double> wts, Side side) {
  const double radius = k.truncation_radius();
  double acc = 0.0;
  if (side == Side::Right) {
    for (int j = r.last; j >= r.first; --j) {
      const double dist = w.h - grid.x(j);
      if (dist >= radius) break;
      acc += wts[static_cast<std::size_t>(j - r.first)] *
             f[static_cast<std::size_t>(j)] * k.tail(dist);
    }
  } else {
    for (int j = r.first; j <= r.last; ++j) {
      const double dist = grid.x(j) - w.g;
      if (dist >= radius) break;
      acc += wts[static_cast<std::size_t>(j - r.first)] *
             f[static_cast<std::size_t>(j)] * k.tail(dist);
    }
  }
  return acc;
}

/// Right: int_g^h f(x) T(h - x) dx. Left: int_g^h f(x) T(x - g) dx.
/// The expansion coefficient mu is applied by the caller.
template <DispersalKernel K>
double boundary_flux(std::span<const double> f, const ActiveWindow& w, const K& k,
                     const Grid& grid, Side side) {
  check_window(w, grid);
  const auto r = active_range(w, grid);
  if (r.empty()) return 0.0;
  for (int i = r.first; i <= r.last; ++i)
    if (f[static_cast<std::size_t>(i)] < -1e-12)
      throw Error(ErrorKind::NegativeField,
                  "field value " + std::to_string(f[static_cast<std::size_t>(i)]) +
                      " at x = " + std::to_string(grid.x(i)));
  const auto wts = window_weights(w, grid, r);
  return boundary_flux_active(f, w, k, grid, r, wts, side);
}

/// Fixed interval [l1, l2] sampled at n nodes including both endpoints,
/// with plain trapezoid weights. Used by the fixed-domain problem and the
/// eigenvalue computation; unlike the moving window, the endpoint values are
/// free.
class IntervalGrid {
 public:
  template <DispersalKernel K>
  IntervalGrid(double l1, double l2, int n, const K& k)
      : l1_(l1), l2_(l2), n_(n), dx_(spacing(l1, l2, n)), stencil_(k, dx_) {
    weights_.assign(static_cast<std::size_t>(n_), dx_);
    weights_.front() = weights_.back() = 0.5 * dx_;
  }

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  int n() const { return n_; }
  double dx() const { return dx_; }
  double x(int i) const { return i == n_ - 1 ? l2_ : l1_ + i * dx_; }
  std::span<const double> weights() const { return weights_; }
  const KernelStencil& stencil() const { return stencil_; }

  /// out_i = sum_j w_j J(x_i - x_j) f_j.
  void convolve(std::span<const double> f, std::span<double> out) const {
    convolve_active(f, ActiveRange{0, n_ - 1}, weights_, stencil_, out);
  }

  double integrate(std::span<const double> f) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      s += weights_[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
    return s;
  }

 private:
  static double spacing(double l1, double l2, int n) {
    if (!(l1 < l2)) throw Error(ErrorKind::InvalidArgument, "interval requires l1 < l2");
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "interval needs >= 2 nodes");
    return (l2 - l1) / (n - 1);
  }

  double l1_, l2_;
  int n_;
  double dx_;
  KernelStencil stencil_;
  std::vector<double> weights_;
};

}  // namespace nlfb
