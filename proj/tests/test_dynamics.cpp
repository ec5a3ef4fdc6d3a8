#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "nlfb/dynamics.hpp"
#include "nlfb/spectral.hpp"
#include "oracles.hpp"

using namespace nlfb;

namespace {

ModelParams default_params() {
  ModelParams p;
  p.a = p.b = p.c = 1.0;
  p.d = 2.0;
  p.mu = 1.0;
  p.h0 = 1.0;
  return p;
}

const Kernel kCompact = Kernel::compact_quadratic(1.0);

RunConfig small_run(double t_end, int stride = 100) {
  RunConfig cfg;
  cfg.L = 8.0;
  cfg.n = 321;  // dx = 0.05
  cfg.dt = 1e-3;
  cfg.t_end = t_end;
  cfg.stride = stride;
  return cfg;
}

}  // namespace

TEST(StepFb, ZeroStateOnlyAdvancesTime) {
  const Grid grid(8.0, 321);
  SimState s;
  s.window = {-1.0, 1.0};
  s.u = grid.zeros();
  s.v = grid.zeros();
  const auto next = step_fb(s, default_params(), kCompact, GrowthLaw::hill(2.0), 1e-3, grid);
  EXPECT_DOUBLE_EQ(next.t, 1e-3);
  EXPECT_EQ(next.window.g, -1.0);
  EXPECT_EQ(next.window.h, 1.0);
  EXPECT_EQ(next.u, s.u);
  EXPECT_EQ(next.v, s.v);
}

TEST(StepFb, PureDecayWithoutDispersalOrCoupling) {
  ModelParams p = default_params();
  p.d = 0.0;
  p.c = 0.0;
  p.a = 0.7;
  const Grid grid(8.0, 321);
  InitialData init;
  const SimState s = init.sample(grid);
  const double dt = 1e-2;
  const auto next = step_fb(s, p, kCompact, GrowthLaw::hill(2.0), dt, grid);
  for (std::size_t i = 0; i < s.u.size(); ++i)
    EXPECT_NEAR(next.u[i], (1.0 - p.a * dt) * s.u[i], 1e-16);
}

TEST(StepFb, CenterUpdateMatchesHandAssembledRhs) {
  const ModelParams p = default_params();
  const auto g = GrowthLaw::hill(2.0);
  const double A = 0.5, B = 0.5, dt = 1e-3;
  const Grid grid(8.0, 321);
  InitialData init;
  const SimState s = init.sample(grid);

  // Straight-line trapezoid sum over the nodes of [-1, 1]; end values are 0.
  const double dx = grid.dx();
  double conv = 0.0;
  for (int j = -20; j <= 20; ++j) {
    const double y = j * dx;
    const double wj = (j == -20 || j == 20) ? 0.5 * dx : dx;
    conv += wj * oracle::epan(y) * A * (1.0 - y * y);
  }
  const double u0 = A, v0 = B;
  const double expected = u0 + dt * (p.d * conv - (p.d + p.a) * u0 + p.c * v0);

  const auto next = step_fb(s, p, kCompact, g, dt, grid);
  const auto mid = static_cast<std::size_t>(grid.center());
  EXPECT_NEAR(next.u[mid], expected, 1e-15);
  EXPECT_NEAR(next.v[mid], v0 + dt * (-p.b * v0 + g.value(u0)), 1e-15);

  // Continuum value: int (3/4)(1 - y^2) A (1 - y^2) dy = 0.8 A.
  EXPECT_NEAR(oracle::simpson([&](double y) { return oracle::epan(y) * A * (1 - y * y); }, -1, 1),
              0.8 * A, 1e-13);
  EXPECT_NEAR(conv, 0.8 * A, dx * dx);
}

TEST(StepFb, StabilityViolation) {
  const Grid grid(8.0, 321);
  InitialData init;
  try {
    step_fb(init.sample(grid), default_params(), kCompact, GrowthLaw::hill(2.0), 0.2, grid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StabilityViolation);
  }
}

TEST(StepFb, GridExhaustedLeavesStateUntouched) {
  const Grid grid(2.5, 101);
  FreeBoundarySolver solver(grid, default_params(), kCompact, GrowthLaw::hill(2.0));
  InitialData init;
  init.h0 = 1.49;
  SimState s = init.sample(grid);
  const SimState before = s;
  try {
    for (int i = 0; i < 100000; ++i) solver.advance(s, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridExhausted);
  }
  EXPECT_LE(s.window.h, grid.L() - kCompact.truncation_radius());
  EXPECT_GE(s.t, before.t);
}

TEST(RunFb, ZeroDurationGivesOneRecord) {
  const auto traj = run_fb(InitialData{}, default_params(), kCompact, GrowthLaw::hill(2.0), small_run(0.0));
  ASSERT_EQ(traj.records.size(), 1u);
  EXPECT_EQ(traj.records[0].t, 0.0);
  EXPECT_EQ(traj.truncation_reason, truncation::kEndTime);
}

TEST(RunFb, RecordsAreStrictlyIncreasingAndFrontsMonotone) {
  const auto traj = run_fb(InitialData{}, default_params(), kCompact, GrowthLaw::hill(2.0), small_run(5.0, 37));
  ASSERT_GT(traj.records.size(), 2u);
  EXPECT_NEAR(traj.records.back().t, 5.0, 1e-12);
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    EXPECT_GT(traj.records[i].t, traj.records[i - 1].t);
    EXPECT_GE(traj.records[i].h, traj.records[i - 1].h);
    EXPECT_LE(traj.records[i].g, traj.records[i - 1].g);
    EXPECT_GT(traj.records[i].u_center, 0.0);
  }
  EXPECT_EQ(traj.clamp_warnings, 0);
}

TEST(RunFb, GridEscapeIsANormalEnding) {
  RunConfig cfg = small_run(200.0);
  cfg.L = 4.0;
  cfg.n = 161;
  const auto traj = run_fb(InitialData{}, default_params(), kCompact, GrowthLaw::hill(2.0), cfg);
  EXPECT_EQ(traj.truncation_reason, truncation::kGridEscape);
  EXPECT_LE(traj.records.back().h, cfg.L - kCompact.truncation_radius());
  EXPECT_LT(traj.records.back().t, 200.0);
}

TEST(RunFb, HookStopsEarly) {
  const auto traj = run_fb(InitialData{}, default_params(), kCompact, GrowthLaw::hill(2.0), small_run(5.0),
                           [](const TrajectoryRecord& r) { return r.t >= 1.0; });
  EXPECT_EQ(traj.truncation_reason, truncation::kEarlyStop);
  EXPECT_NEAR(traj.records.back().t, 1.0, 1e-12);
}

TEST(RunFb, SnapshotsAtRequestedTimes) {
  RunConfig cfg = small_run(1.0);
  cfg.snapshot_times = {0.0, 0.5, 1.0, 7.0};
  const auto traj = run_fb(InitialData{}, default_params(), kCompact, GrowthLaw::hill(2.0), cfg);
  ASSERT_EQ(traj.snapshots.size(), 3u);
  EXPECT_NEAR(traj.snapshots[1].t, 0.5, 1e-12);
  EXPECT_EQ(traj.snapshots[0].x.size(), 39u);  // nodes strictly inside (-1, 1)
}

TEST(RunFb, AprioriBounds) {
  for (double alpha : {0.8, 2.0, 4.0}) {
    ModelParams p = default_params();
    const auto g = GrowthLaw::hill(alpha);
    InitialData init;
    init.u_amplitude = 1.7;
    init.v_amplitude = 0.2;
    const auto s = derived_scalars(p, g, init.u0_sup(), init.v0_sup());
    const auto traj = run_fb(init, p, kCompact, g, small_run(10.0));
    for (const auto& r : traj.records) {
      EXPECT_LE(r.max_u, s.a_bound + 1e-6);
      EXPECT_LE(r.max_v, s.b_bound + 1e-6);
    }
  }
}

TEST(RunFb, LargerMuGivesLargerRangeAndDensity) {
  const auto g = GrowthLaw::hill(2.0);
  ModelParams p1 = default_params(), p2 = default_params();
  p1.mu = 1.0;
  p2.mu = 2.0;
  const auto a = run_fb(InitialData{}, p1, kCompact, g, small_run(6.0));
  const auto b = run_fb(InitialData{}, p2, kCompact, g, small_run(6.0));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_LE(a.records[i].h, b.records[i].h + 1e-9);
    EXPECT_GE(a.records[i].g, b.records[i].g - 1e-9);
    EXPECT_LE(a.records[i].u_center, b.records[i].u_center + 1e-6);
  }
}

TEST(RunFb, VanishingRunDecaysAndPlateaus) {
  ModelParams p = default_params();
  const auto g = GrowthLaw::hill(0.8);
  RunConfig cfg = small_run(100.0, 1000);
  const auto traj = run_fb(InitialData{}, p, kCompact, g, cfg);
  const auto& last = traj.records.back();
  EXPECT_LT(last.max_u, 1e-4);
  const auto& earlier = traj.records[traj.records.size() - 11];  // t = 90
  EXPECT_LT(last.gap() - earlier.gap(), 1e-6);
}

TEST(RunFb, SpaceTimeRefinementConverges) {
  // Final fields on the coarse nodes against a fine reference.
  const auto g = GrowthLaw::hill(2.0);
  const ModelParams p = default_params();
  auto run = [&](int n, double dt) {
    RunConfig cfg;
    cfg.L = 4.0;
    cfg.n = n;
    cfg.dt = dt;
    cfg.t_end = 1.0;
    cfg.stride = 1000000;
    cfg.snapshot_times = {1.0};
    return run_fb(InitialData{}, p, kCompact, g, cfg);
  };
  const auto ref = run(1281, 1.25e-4);
  auto error = [&](const Trajectory& t) {
    const auto& s = t.snapshots.back();
    const auto& r = ref.snapshots.back();
    double e = std::abs(t.records.back().h - ref.records.back().h);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const auto it = std::find_if(r.x.begin(), r.x.end(),
                                   [&](double x) { return std::abs(x - s.x[i]) < 1e-9; });
      if (it == r.x.end()) continue;
      e = std::max(e, std::abs(s.u[i] - r.u[static_cast<std::size_t>(it - r.x.begin())]));
    }
    return e;
  };
  const double e1 = error(run(161, 1e-3));
  const double e2 = error(run(321, 5e-4));
  EXPECT_GE(e1 / e2, 1.8) << e1 << " " << e2;
}

TEST(StepFixed, ZeroStaysZero) {
  const Field w(41, 0.0), z(41, 0.0);
  const auto [w1, z1] = step_fixed(w, z, 0.0, 2.0, default_params(), kCompact, GrowthLaw::hill(2.0), 1e-2);
  EXPECT_EQ(w1, w);
  EXPECT_EQ(z1, z);
}

TEST(StepFixed, LowerSolutionRises) {
  const ModelParams p = default_params();
  const auto g = GrowthLaw::hill(2.0);
  const double l1 = -2.0, l2 = 2.0;
  const int n = 81;
  const auto spec = lambda_p(kCompact, p, g, l1, l2, n);
  ASSERT_GT(spec.lambda_p, 0.0);
  const double eps = 1e-3;
  Field w(spec.phi), z(spec.phi);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] *= eps;
    z[i] *= (g.derivative(0.0) / p.b - spec.lambda_p / (4.0 * p.c)) * eps;
  }
  FixedDomainSolver solver(l1, l2, n, p, kCompact, g);
  for (int s = 0; s < 2000; ++s) {
    const Field wp = w, zp = z;
    solver.step(w, z, 0.1);
    for (std::size_t i = 0; i < w.size(); ++i) {
      ASSERT_GE(w[i], wp[i] - 1e-15);
      ASSERT_GE(z[i], zp[i] - 1e-15);
    }
  }
}

TEST(StepFixed, UpperSolutionFalls) {
  const ModelParams p = default_params();
  const auto g = GrowthLaw::hill(2.0);
  const double m1 = 2.0;
  const double m2 = 0.5 * (g.value(m1) / p.b + p.a / p.c * m1);
  ASSERT_LT(g.value(m1), p.b * m2);
  ASSERT_LT(p.b * m2, p.a * p.b / p.c * m1);
  Field w(81, m1), z(81, m2);
  FixedDomainSolver solver(-2.0, 2.0, 81, p, kCompact, g);
  for (int s = 0; s < 2000; ++s) {
    const Field wp = w, zp = z;
    solver.step(w, z, 0.1);
    for (std::size_t i = 0; i < w.size(); ++i) {
      ASSERT_LE(w[i], wp[i] + 1e-15);
      ASSERT_LE(z[i], zp[i] + 1e-15);
    }
  }
}

TEST(SolveOde, EquilibriumIsStationary) {
  const ModelParams p = default_params();
  const auto g = GrowthLaw::hill(3.0);
  const auto eq = equilibrium(p, g);
  const auto pts = solve_ode(p, g, eq.k1, eq.k2, 100.0, 0.01);
  for (const auto& pt : pts) {
    EXPECT_NEAR(pt.u, eq.k1, 1e-10);
    EXPECT_NEAR(pt.v, eq.k2, 1e-10);
  }
}

TEST(SolveOde, ConvergesToEndemicState) {
  const ModelParams p = default_params();
  const auto g = GrowthLaw::saturating_exp(3.0);
  const auto eq = equilibrium(p, g);
  const auto last = solve_ode(p, g, 0.01, 0.01, 200.0, 0.01).back();
  EXPECT_NEAR(last.u, eq.k1, 1e-6);
  EXPECT_NEAR(last.v, eq.k2, 1e-6);
}

TEST(SolveOde, SubcriticalDecaysLikeFineReference) {
  const ModelParams p = default_params();
  const auto g = GrowthLaw::hill(0.6);
  const auto coarse = solve_ode(p, g, 0.8, 0.3, 30.0, 0.05);
  const auto fine = solve_ode(p, g, 0.8, 0.3, 30.0, 0.0005);
  EXPECT_NEAR(coarse.back().u, fine.back().u, 1e-9);
  EXPECT_NEAR(coarse.back().v, fine.back().v, 1e-9);
  const auto last = solve_ode(p, g, 0.8, 0.3, 200.0, 0.05).back();
  EXPECT_LT(last.u, 1e-6);
  EXPECT_LT(last.v, 1e-6);
}

TEST(SolveOde, RejectsNegativeStart) {
  EXPECT_THROW(solve_ode(default_params(), GrowthLaw::hill(2.0), -1.0, 0.0, 1.0, 0.1), Error);
}

TEST(MassBalance, ZeroDataHasZeroResidual) {
  const Grid grid(8.0, 321);
  const ModelParams p = default_params();
  FreeBoundarySolver solver(grid, p, kCompact, GrowthLaw::hill(2.0));
  SimState s;
  s.window = {-1.0, 1.0};
  s.u = grid.zeros();
  s.v = grid.zeros();
  Trajectory traj;
  for (int i = 0; i < 50; ++i) {
    traj.records.push_back(solver.summarize(s));
    solver.advance(s, 1e-3);
  }
  for (double r : mass_balance_residual(traj, p)) EXPECT_EQ(r, 0.0);
}

TEST(MassBalance, MissingSourceIsAnError) {
  Trajectory traj;
  traj.records.resize(2);
  try {
    mass_balance_residual(traj, default_params());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingDiagnostics);
  }
}

TEST(MassBalance, SubcriticalRangeBound) {
  ModelParams p = default_params();
  const auto g = GrowthLaw::hill(0.8);
  const auto traj = run_fb(InitialData{}, p, kCompact, g, small_run(40.0));
  const auto& first = traj.records.front();
  const double bound = first.mass_u + p.c / p.b * first.mass_v + p.d / p.mu * first.gap();
  for (const auto& r : traj.records) EXPECT_LE(p.d / p.mu * r.gap(), bound);
}

TEST(InitialData, BuiltinsSatisfyAssumptions) {
  for (auto shape : {InitialShape::Bump, InitialShape::Cosine}) {
    InitialData init;
    init.shape = shape;
    init.h0 = 0.7;
    EXPECT_TRUE(validate_initial(init).all_passed());
  }
  EXPECT_EQ(initial_shape_from_string("cosine"), InitialShape::Cosine);
  EXPECT_THROW(initial_shape_from_string("square"), Error);
}
