#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlfb/quadgrid.hpp"
#include "oracles.hpp"

using namespace nlfb;

namespace {

Field sample(const Grid& grid, const ActiveWindow& w, double (*f)(double)) {
  Field out = grid.zeros();
  const auto r = active_range(w, grid);
  for (int i = r.first; i <= r.last; ++i) out[static_cast<std::size_t>(i)] = f(grid.x(i));
  return out;
}

double one(double) { return 1.0; }
double ident(double x) { return x; }
double parabola(double x) { return 1.0 - x * x; }
double shifted_bump(double x) { return std::max(0.0, (x + 0.9) * (1.3 - x)) * (1.0 + 0.3 * x); }
double node_bump(double x) { return std::max(0.0, (x + 0.92) * (1.32 - x)) * (1.0 + 0.3 * x); }

}  // namespace

TEST(Grid, Layout) {
  const Grid g(2.0, 5);
  EXPECT_DOUBLE_EQ(g.dx(), 1.0);
  EXPECT_DOUBLE_EQ(g.x(0), -2.0);
  EXPECT_DOUBLE_EQ(g.x(4), 2.0);
  EXPECT_DOUBLE_EQ(g.x(g.center()), 0.0);
  EXPECT_THROW(Grid(1.0, 4), Error);
  EXPECT_THROW(Grid(1.0, 1), Error);
  EXPECT_THROW(Grid(0.0, 5), Error);
}

TEST(ActiveRange, StrictlyInside) {
  const Grid g(2.0, 9);  // dx = 0.5
  const auto r = active_range({-1.0, 1.0}, g);
  EXPECT_DOUBLE_EQ(g.x(r.first), -0.5);
  EXPECT_DOUBLE_EQ(g.x(r.last), 0.5);
  const auto r2 = active_range({-0.9, 0.2}, g);
  EXPECT_DOUBLE_EQ(g.x(r2.first), -0.5);
  EXPECT_DOUBLE_EQ(g.x(r2.last), 0.0);
  EXPECT_TRUE(active_range({0.1, 0.2}, g).empty());
}

TEST(ActiveQuadrature, ZeroField) {
  const Grid g(3.0, 61);
  EXPECT_EQ(active_quadrature(g.zeros(), {-1.0, 1.0}, g), 0.0);
}

TEST(ActiveQuadrature, OnesApproachWindowLength) {
  double prev_err = 1.0;
  for (int n : {121, 241, 481, 961}) {
    const Grid g(3.0, n);
    const ActiveWindow w{-1.0, 1.0};
    const double q = active_quadrature(sample(g, w, one), w, g);
    const double err = std::abs(q - 2.0);
    EXPECT_LE(err, g.dx() + 1e-14);
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
}

TEST(ActiveQuadrature, OddFunctionVanishes) {
  const Grid g(3.0, 301);
  const ActiveWindow w{-1.0, 1.0};
  EXPECT_NEAR(active_quadrature(sample(g, w, ident), w, g), 0.0, 1e-12);
}

TEST(ActiveQuadrature, PartialCellsSecondOrder) {
  // Window edges off the nodes; the field vanishes at them.
  const ActiveWindow w{-0.9, 1.3};
  const double exact = oracle::simpson([](double x) { return shifted_bump(x); }, -0.9, 1.3);
  double prev = 0.0;
  for (int n : {101, 201, 401}) {
    const Grid g(3.0, n);
    const double err = std::abs(active_quadrature(sample(g, w, shifted_bump), w, g) - exact);
    if (prev > 0.0) {
      EXPECT_GE(prev / err, 3.5);
    }
    prev = err;
  }
}

TEST(ActiveQuadrature, WindowOutOfGrid) {
  const Grid g(1.0, 21);
  try {
    active_quadrature(g.zeros(), {-1.5, 0.5}, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowOutOfGrid);
  }
  EXPECT_THROW(active_quadrature(g.zeros(), {0.5, 0.5}, g), Error);
}

TEST(Convolve, ZeroField) {
  const Grid g(5.0, 201);
  const auto out = nonlocal_convolve(g.zeros(), {-1.0, 1.0}, Kernel::compact_quadratic(1.0), g);
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(Convolve, UnitMassAtCenterOfWideWindow) {
  const Grid g(30.0, 1201);  // dx = 0.05
  const ActiveWindow w{-20.0, 20.0};
  const auto out = nonlocal_convolve(sample(g, w, one), w, Kernel::gaussian(1.0), g);
  EXPECT_NEAR(out[static_cast<std::size_t>(g.center())], 1.0, 1e-6);
}

TEST(Convolve, CompactHalfWindowConvergesToHalf) {
  // int_0^1 (3/4)(1 - s^2) ds = 1/2.
  EXPECT_NEAR(oracle::simpson(oracle::epan, 0.0, 1.0), 0.5, 1e-14);
  const auto k = Kernel::compact_quadratic(1.0);
  const ActiveWindow w{0.0, 2.0};
  double prev = 1.0;
  for (int n : {121, 241, 481, 961}) {
    const Grid g(3.0, n);
    const double err = std::abs(convolve_at(sample(g, w, one), w, k, g, 0.0) - 0.5);
    EXPECT_LT(err, prev);
    EXPECT_LE(err, g.dx());
    prev = err;
  }
  EXPECT_LT(prev, 5e-3);
}

TEST(Convolve, GridRefinementSecondOrder) {
  // Standard normal against 1 - y^2 on [-1, 1], at x = 0: 2 phi(1).
  const double exact = 2.0 * std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
  EXPECT_NEAR(oracle::simpson([](double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi) * (1.0 - y * y); }, -1.0, 1.0), exact, 1e-13);
  const ActiveWindow w{-1.0, 1.0};
  double prev = 0.0;
  for (int n : {61, 121, 241, 481}) {
    const Grid g(3.0, n);
    const auto out = nonlocal_convolve(sample(g, w, parabola), w, Kernel::gaussian(1.0), g);
    const double err = std::abs(out[static_cast<std::size_t>(g.center())] - exact);
    if (prev > 0.0) {
      EXPECT_GE(prev / err, 3.5) << "n = " << n;
    }
    prev = err;
  }
}

TEST(Convolve, PositivityAndMassContraction) {
  for (const auto& k : {Kernel::compact_quadratic(1.0), Kernel::gaussian(0.5), Kernel::laplace(2.0)}) {
    const Grid g(12.0, 481);
    const ActiveWindow w{-0.9, 1.3};
    const auto f = sample(g, w, shifted_bump);
    const auto out = nonlocal_convolve(f, w, k, g);
    for (double v : out) EXPECT_GE(v, 0.0);
    EXPECT_LE(active_quadrature(out, w, g), active_quadrature(f, w, g) + 1e-10);
  }
}

TEST(Convolve, InactiveNodesStayZero) {
  const Grid g(5.0, 201);
  const ActiveWindow w{-1.0, 1.0};
  const auto out = nonlocal_convolve(sample(g, w, parabola), w, Kernel::gaussian(1.0), g);
  const auto r = active_range(w, g);
  for (int i = 0; i < g.n(); ++i)
    if (i < r.first || i > r.last) {
      EXPECT_EQ(out[static_cast<std::size_t>(i)], 0.0);
    }
}

TEST(BoundaryFlux, ZeroField) {
  const Grid g(5.0, 201);
  EXPECT_EQ(boundary_flux(g.zeros(), {-1.0, 1.0}, Kernel::compact_quadratic(1.0), g, Side::Right), 0.0);
}

TEST(BoundaryFlux, OnesMatchIntegratedTail) {
  // int_{-1}^{1} T(1 - x) dx = int_0^1 T(s) ds, and T(s) = 1/2 - 3s/4 + s^3/4
  // integrates to 1/2 - 3/8 + 1/16 = 3/16.
  const double oracle = oracle::simpson(oracle::epan_tail, 0.0, 2.0, 400);
  EXPECT_NEAR(oracle, 3.0 / 16.0, 1e-10);
  const auto k = Kernel::compact_quadratic(1.0);
  const ActiveWindow w{-1.0, 1.0};
  double prev = 1.0;
  for (int n : {121, 241, 481, 961}) {
    const Grid g(3.0, n);
    const double err = std::abs(boundary_flux(sample(g, w, one), w, k, g, Side::Right) - 3.0 / 16.0);
    EXPECT_LT(err, prev);
    EXPECT_LE(err, g.dx());
    prev = err;
  }
}

TEST(BoundaryFlux, SymmetricFieldGivesEqualFluxes) {
  const Grid g(5.0, 401);
  const ActiveWindow w{-1.0, 1.0};
  const auto f = sample(g, w, parabola);
  for (const auto& k : {Kernel::compact_quadratic(1.0), Kernel::gaussian(0.4)}) {
    EXPECT_NEAR(boundary_flux(f, w, k, g, Side::Left), boundary_flux(f, w, k, g, Side::Right), 1e-12);
  }
}

TEST(BoundaryFlux, RejectsNegativeField) {
  const Grid g(5.0, 201);
  Field f = g.zeros();
  f[static_cast<std::size_t>(g.center())] = -1e-6;
  try {
    boundary_flux(f, {-1.0, 1.0}, Kernel::compact_quadratic(1.0), g, Side::Left);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NegativeField);
  }
}

TEST(BoundaryFlux, FluxMassIdentity) {
  // Kernel mass splits into the part kept inside the window and the two tails.
  // K f does not vanish at the window ends, so its quadrature is first order.
  // The window ends sit on nodes of every grid so the error halves cleanly.
  for (const auto& k : {Kernel::compact_quadratic(1.0), Kernel::gaussian(0.7), Kernel::laplace(0.5)}) {
    double prev = 0.0;
    for (int n : {601, 1201, 2401}) {
      const Grid g(12.0, n);
      const ActiveWindow w{-0.92, 1.32};
      const auto f = sample(g, w, node_bump);
      const double lhs = boundary_flux(f, w, k, g, Side::Left) +
                         boundary_flux(f, w, k, g, Side::Right) +
                         active_quadrature(nonlocal_convolve(f, w, k, g), w, g);
      const double err = std::abs(lhs - active_quadrature(f, w, g));
      EXPECT_LE(err, g.dx());
      if (prev > 0.0) {
        EXPECT_GE(prev / err, 1.8);
      }
      prev = err;
    }
  }
}

TEST(IntervalGrid, EndpointsAndWeights) {
  const IntervalGrid iv(0.0, 5.0, 11, Kernel::compact_quadratic(1.0));
  EXPECT_DOUBLE_EQ(iv.x(0), 0.0);
  EXPECT_DOUBLE_EQ(iv.x(10), 5.0);
  EXPECT_DOUBLE_EQ(iv.weights()[0], 0.25);
  EXPECT_DOUBLE_EQ(iv.weights()[5], 0.5);
  EXPECT_THROW(IntervalGrid(1.0, 1.0, 11, Kernel::compact_quadratic(1.0)), Error);
}
