#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "support.hpp"

namespace bep {
namespace {

using testing::upper_half;

BepProblem make_problem(const GridFunction& f, double M = 1.0, SolverOptions o = {}) {
  o.grid_n = f.size();
  return BepProblem::create(upper_half(), f, GridFunction::constant(f.grid(), M), o);
}

/// f = 2 on the upper half circle, M = 1, grid 4096: the desk instance.
const std::pair<BepProblem, BepSolution>& desk() {
  static const auto value = [] {
    BepProblem p = make_problem(GridFunction::constant(Grid(4096), 2.0));
    BepSolution s = solve_bep(p);
    return std::make_pair(std::move(p), std::move(s));
  }();
  return value;
}

GridFunction mode_on(const Grid& g, int m, cplx c = 1.0) {
  return GridFunction::sample(g, [=](double t) { return c * std::polar(1.0, m * t); });
}

TEST(SolverOptions, Validation) {
  SolverOptions o;
  EXPECT_NO_THROW(o.validate());
  o.armijo_c = 1.0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.backtrack_factor = 0.0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.tol_gap = -1.0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.grid_n = 1000;
  EXPECT_THROW(o.validate(), InvalidArgument);
}

TEST(BepProblem, DataOutsideSetsIsIgnoredAndBoundFloored) {
  Grid g(256);
  SolverOptions o;
  o.grid_n = 256;
  CVector m(g.size(), 1.0);
  m[200] = 0.0;
  auto p = BepProblem::create(upper_half(), GridFunction::constant(g, 3.0), GridFunction(g, m), o);
  EXPECT_EQ(p.f[200], cplx{});
  EXPECT_EQ(p.M[200].real(), kModulusFloor);
  EXPECT_EQ(p.warnings.size(), 1u);
  EXPECT_THROW(BepProblem::create(upper_half(), GridFunction::constant(Grid(128), 1.0), GridFunction::constant(Grid(128), 1.0), o),
               InvalidArgument);
}

TEST(ToeplitzApply, UnitMultiplierGivesZero) {
  std::mt19937 rng(1);
  Grid g(256);
  FourierSeries c = testing::random_analytic(256, 30, rng);
  FourierSeries out = toeplitz_apply(upper_half(), GridFunction::constant(g, 1.0), c);
  EXPECT_LT(out.l2_norm(), 1e-15);
  EXPECT_LT(toeplitz_apply(upper_half(), testing::smooth_mu(g, 1.0, 0.2), FourierSeries(256)).l2_norm(), 1e-300);
}

TEST(ToeplitzApply, SelfAdjoint) {
  std::mt19937 rng(2);
  Grid g(512);
  GridFunction lambda = testing::smooth_mu(g, 1.5, 0.7);
  for (int trial = 0; trial < 5; ++trial) {
    FourierSeries a = testing::random_analytic(512, 60, rng), b = testing::random_analytic(512, 60, rng);
    FourierSeries ta = a + toeplitz_apply(upper_half(), lambda, a), tb = b + toeplitz_apply(upper_half(), lambda, b);
    cplx lhs{}, rhs{};
    for (std::size_t k = 0; k < 512; ++k) {
      lhs += ta.data()[k] * std::conj(b.data()[k]);
      rhs += a.data()[k] * std::conj(tb.data()[k]);
    }
    EXPECT_LT(std::abs(lhs - rhs), 1e-10);
  }
}

TEST(SolveToeplitz, UnitMultiplierIsProjection) {
  Grid g(512);
  GridFunction f = testing::smooth_data(g, cplx(1.0, 0.5), 0.3);
  auto res = solve_toeplitz(upper_half(), GridFunction::constant(g, 1.0), f);
  auto wI = upper_half().weights(g);
  CVector fi(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) fi[k] = wI[k] * f[k];
  FourierSeries target = project_plus(fft_analyze(GridFunction(g, fi)));
  EXPECT_LT((res.g - target).l2_norm(), 1e-12);
}

// Independent oracle: the (n/2 x n/2) Toeplitz matrix of the symbol built by direct
// summation and solved densely.
FourierSeries dense_toeplitz_solve(const GridFunction& lambda, const GridFunction& f) {
  const Grid& g = f.grid();
  const std::size_t n = g.size(), h = n / 2;
  auto wI = upper_half().weights(g), wJ = upper_half().complement().weights(g);
  auto coeff = [&](const std::function<cplx(std::size_t)>& u, int m) {
    cplx s{};
    for (std::size_t k = 0; k < n; ++k) s += u(k) * std::polar(1.0, -m * g.theta(k));
    return s / static_cast<double>(n);
  };
  std::vector<cplx> sym(2 * h);
  for (int d = -static_cast<int>(h) + 1; d < static_cast<int>(h); ++d) {
    sym[static_cast<std::size_t>(d + static_cast<int>(h))] = coeff([&](std::size_t k) { return cplx(wI[k] + wJ[k] * lambda[k].real()); }, d);
  }
  Eigen::MatrixXcd T(h, h);
  Eigen::VectorXcd rhs(h);
  for (std::size_t j = 0; j < h; ++j) {
    rhs(j) = coeff([&](std::size_t k) { return wI[k] * f[k]; }, static_cast<int>(j));
    for (std::size_t k = 0; k < h; ++k) T(j, k) = sym[j - k + h];
  }
  Eigen::VectorXcd c = T.partialPivLu().solve(rhs);
  FourierSeries out(n);
  for (std::size_t j = 0; j < h; ++j) out.data()[j] = c(j);
  return out;
}

TEST(SolveToeplitz, MatchesDenseOracleForHalfZ) {
  Grid g(256);
  GridFunction f = mode_on(g, 1, 0.5);
  auto res = solve_toeplitz(upper_half(), GridFunction::constant(g, 1.0), f);
  EXPECT_LT((res.g - dense_toeplitz_solve(GridFunction::constant(g, 1.0), f)).l2_norm(), 1e-12);
}

TEST(SolveToeplitz, MatchesDenseOracleForVaryingMultiplier) {
  Grid g(256);
  GridFunction f = GridFunction::constant(g, 2.0);
  GridFunction lambda = testing::smooth_mu(g, 2.0, 1.1);
  auto res = solve_toeplitz(upper_half(), lambda, f);
  FourierSeries ref = dense_toeplitz_solve(lambda, f);
  EXPECT_LT((res.g - ref).l2_norm() / ref.l2_norm(), 1e-9);
  EXPECT_LE(res.residual, 1e-10);
}

TEST(SolveToeplitz, IterationCapRaisesWithResidual) {
  Grid g(256);
  detail::ToeplitzOperator op(detail::symbol_of(upper_half().weights(g), upper_half().complement().weights(g),
                                                testing::smooth_mu(g, 2.0, 0.0)));
  CVector rhs(128, 1.0);
  try {
    detail::conjugate_gradient(op, rhs, 1e-14, 1);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(CarlemanGMu, Examples) {
  Grid g(1024);
  GridFunction f = testing::smooth_data(g, 1.0, cplx(0.2, 0.1));
  FourierSeries a = carleman_g_mu(upper_half(), GridFunction::constant(g, 1.0), f);
  auto wI = upper_half().weights(g);
  CVector fi(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) fi[k] = wI[k] * f[k];
  EXPECT_LT((a - project_plus(fft_analyze(GridFunction(g, fi)))).l2_norm(), 1e-12);
  EXPECT_LT(carleman_g_mu(upper_half(), testing::smooth_mu(g, 1.0, 0.0), GridFunction(g)).l2_norm(), 1e-300);
}

TEST(RouteEquivalence, ToeplitzAndCarlemanAgree) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> amp(-std::log(10.0), std::log(10.0)), ph(0.0, kTwoPi);
  Grid g(4096);
  GridFunction f = testing::smooth_data(g, cplx(1.5, -0.5), cplx(0.7, 0.4));
  for (int trial = 0; trial < 10; ++trial) {
    GridFunction mu = testing::smooth_mu(g, amp(rng), ph(rng));
    FourierSeries a = solve_toeplitz(upper_half(), mu, f).g;
    FourierSeries b = carleman_g_mu(upper_half(), mu, f);
    EXPECT_LT((a - b).l2_norm(), 1e-8) << "trial " << trial;
  }
}

TEST(DualValue, UnitMultiplierFormula) {
  Grid g(1024);
  GridFunction f = testing::smooth_data(g, 2.0, cplx(0.0, 1.0));
  GridFunction one = GridFunction::constant(g, 1.0);
  auto wI = upper_half().weights(g);
  CVector fi(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) fi[k] = wI[k] * f[k];
  double minus = project_minus(fft_analyze(GridFunction(g, fi))).l2_norm();
  double lJ = upper_half().complement().snapped(g).normalized_measure();
  EXPECT_NEAR(dual_value(upper_half(), one, f, one), minus * minus - lJ, 1e-12);
}

TEST(DualValue, WeakDualityForExtendableData) {
  Grid g(1024);
  GridFunction f = mode_on(g, 1, 0.5);
  for (double amp : {-1.0, 0.5, 2.0}) {
    EXPECT_LE(dual_value(upper_half(), testing::smooth_mu(g, amp, 0.4), f, GridFunction::constant(g, 1.0)), 1e-12);
  }
}

TEST(DualValue, MatchesLagrangianAtMinimizer) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> amp(-2.0, 2.0), ph(0.0, kTwoPi);
  Grid g(4096);
  GridFunction f = testing::smooth_data(g, cplx(1.0, 1.0), cplx(-0.5, 0.2));
  BepProblem p = make_problem(f);
  for (int trial = 0; trial < 3; ++trial) {
    GridFunction mu = testing::smooth_mu(g, amp(rng), ph(rng));
    DualState st = evaluate_dual(p, mu);
    EXPECT_NEAR(dual_value(p.I, mu, p.f, p.M), st.phi_value, 1e-8);
    EXPECT_NEAR(lagrangian_value(p.wI, p.wJ, mu, p.f, p.M, st.g_trace), st.phi_value, 1e-10 * std::abs(st.phi_value));
  }
}

TEST(DualGradient, ZeroDataGivesMinusOne) {
  Grid g(512);
  BepProblem p = make_problem(GridFunction(g));
  GridFunction grad = dual_gradient(p, testing::smooth_mu(g, 1.0, 0.0));
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (p.wJ[k] > 0.0) EXPECT_NEAR(grad[k].real(), -1.0, 1e-15);
  }
}

TEST(DualGradient, FiniteDifferences) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ph(0.0, kTwoPi);
  Grid g(4096);
  BepProblem p = make_problem(GridFunction::constant(g, 2.0));
  GridFunction mu = testing::smooth_mu(g, 0.8, 0.3);
  DualState st = evaluate_dual(p, mu);
  const double t = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    GridFunction hdir = testing::random_real_trig(g, 6, rng);
    double phase = ph(rng);
    GridFunction stepped = mu;
    for (std::size_t k = 0; k < g.size(); ++k) {
      hdir[k] = hdir[k].real() + std::cos(phase);
      stepped[k] = mu[k].real() + t * hdir[k].real();
    }
    double fd = (evaluate_dual(p, stepped).phi_value - st.phi_value) / t;
    double an = directional_derivative(p, st, hdir);
    EXPECT_LT(std::abs(fd - an), 1e-4 * std::abs(an)) << "trial " << trial;
  }
}

TEST(SolveBep, ExtendableData) {
  Grid g(4096);
  BepProblem p = make_problem(mode_on(g, 1, 0.5));
  BepSolution s = solve_bep(p);
  EXPECT_TRUE(s.converged);
  EXPECT_TRUE(s.extendable);
  EXPECT_LT(s.primal, 1e-8);
  for (int m = 0; m < 40; ++m) EXPECT_LT(std::abs(s.g0[m] - (m == 1 ? 0.5 : 0.0)), 1e-6);
  KktReport r = kkt_residuals(s, p);
  EXPECT_LT(r.critical_residual, 1e-8);
  HerglotzReport h = herglotz_check(s, p);
  EXPECT_LT(h.max_abs_error, 1e-8);
}

TEST(SolveBep, ZeroData) {
  Grid g(512);
  BepProblem p = make_problem(GridFunction(g));
  BepSolution s = solve_bep(p);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.primal, 0.0);
  LpBound b = lp_bound_check(s, p);
  EXPECT_EQ(b.lhs, 0.0);
  EXPECT_TRUE(b.holds);
}

TEST(SolveBep, AntiAnalyticDataSaturates) {
  Grid g(4096);
  BepProblem p = make_problem(mode_on(g, -1));
  BepSolution s = solve_bep(p);
  EXPECT_TRUE(s.converged);
  EXPECT_FALSE(s.extendable);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (p.interior_J[k]) worst = std::max(worst, std::abs(std::abs(s.g0_trace[k]) - 1.0));
  }
  EXPECT_LT(worst, 1e-2);
}

TEST(SolveBep, DeskInstanceCertificate) {
  const auto& [p, s] = desk();
  EXPECT_TRUE(s.converged);
  EXPECT_LE(s.gap, 1e-6 * p.f_norm2());
  EXPECT_GE(s.gap, -1e-8);
  EXPECT_LE(s.critical_residual, 1e-3);
  EXPECT_LE(s.saturation_residual, 1e-2);
}

TEST(SolveBep, SolutionInvariants) {
  const auto& [p, s] = desk();
  for (std::size_t k = 0; k < p.grid().size(); ++k) {
    if (p.wJ[k] > 0.0) EXPECT_GE(s.lambda[k].real(), 0.0);
  }
  EXPECT_LE(norm_l2(s.g0_trace, p.wI), std::sqrt(p.f_norm2()) + 1e-8);
  EXPECT_TRUE(s.g0.is_analytic(1e-12));
  EXPECT_LT(std::abs(kkt_residuals(s, p).mean_imag), 1e-6);
}

TEST(SolveBep, AscentIsMonotone) {
  const auto& s = desk().second;
  ASSERT_GE(s.phi_history.size(), 2u);
  for (std::size_t i = 1; i < s.phi_history.size(); ++i) EXPECT_GE(s.phi_history[i], s.phi_history[i - 1] - 1e-12);
}

TEST(SolveBep, GradientVanishesAtOptimum) {
  const auto& [p, s] = desk();
  GridFunction grad = dual_gradient(p, s.lambda);
  for (std::size_t k = 0; k < p.grid().size(); ++k) {
    if (p.interior_J[k]) EXPECT_LT(std::abs(grad[k].real()), p.options.tol_saturation * 3.0);
  }
}

TEST(SolveBep, WeakDuality) {
  const auto& [p, s] = desk();
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> amp(-2.0, 2.0), ph(0.0, kTwoPi);
  // Feasible candidates: 0, the solution, and the solution scaled into the bound.
  std::vector<double> primals{p.f_norm2(), s.primal};
  for (int trial = 0; trial < 5; ++trial) {
    double phi = evaluate_dual(p, testing::smooth_mu(p.grid(), amp(rng), ph(rng))).phi_value;
    for (double pv : primals) EXPECT_LE(phi, pv + 1e-8);
  }
}

TEST(SolveBep, FixedPointRuleIsAvailable) {
  Grid g(1024);
  SolverOptions o;
  o.rule = AscentRule::fixed_point;
  o.max_iters = 300;
  BepProblem p = make_problem(mode_on(g, -1), 1.0, o);
  BepSolution s = solve_bep(p);
  EXPECT_GT(s.iterations, 0u);
  EXPECT_LT(s.saturation_residual, 0.1);
}

TEST(SolveBep, IterationCapIsFlagged) {
  Grid g(1024);
  SolverOptions o;
  o.max_iters = 1;
  BepSolution s = solve_bep(make_problem(GridFunction::constant(g, 2.0), 1.0, o));
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.status, "iteration cap reached");
}

TEST(Herglotz, DeskInstance) {
  const auto& [p, s] = desk();
  HerglotzReport h = herglotz_check(s, p);
  EXPECT_LT(h.residual, 1e-2);
}

TEST(Herglotz, ReflectionSymmetry) {
  const auto& [p, s] = desk();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    cplx z = std::polar(0.2 + 0.7 * ur(rng), kTwoPi * ur(rng));
    cplx a = herglotz_value(s, p, 1.0 / std::conj(z));
    cplx b = std::conj(herglotz_value(s, p, z));
    EXPECT_LT(std::abs(a - b), 1e-8 * std::max(1.0, std::abs(b)));
  }
}

TEST(LpBound, HoldsOnDeskInstances) {
  const auto& [p, s] = desk();
  EXPECT_TRUE(lp_bound_check(s, p).holds);
  Grid g(4096);
  for (const GridFunction& f : {mode_on(g, 1, 0.5), mode_on(g, -1)}) {
    BepProblem q = make_problem(f);
    LpBound b = lp_bound_check(solve_bep(q), q);
    EXPECT_TRUE(b.holds) << b.lhs << " vs " << b.rhs;
  }
}

TEST(Normalize, UnitBoundIsIdentity) {
  Grid g(512);
  BepProblem p = make_problem(GridFunction::constant(g, 2.0));
  NormalizedProblem np = normalize_problem(p);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_LT(std::abs(np.w_trace[k] - 1.0), 1e-15);
    EXPECT_LT(std::abs(np.problem.f[k] - p.f[k]), 1e-15);
  }
}

TEST(Normalize, ConstantBoundTwo) {
  Grid g(4096);
  BepProblem p = make_problem(GridFunction::constant(g, 2.0), 2.0);
  NormalizedProblem np = normalize_problem(p);
  auto inI = p.I.interior_mask(g, 10);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (inI[k]) EXPECT_NEAR(std::abs(np.w_trace[k]), 1.0, 1e-3);
    if (p.interior_J[k]) EXPECT_NEAR(std::abs(np.w_trace[k]), 2.0, 2e-3);
  }
}

BepSolution tight_solve(const BepProblem& p) { return solve_bep(p); }

double normalize_discrepancy(std::size_t n) {
  Grid g(n);
  SolverOptions o;
  o.grid_n = n;
  o.tol_gap = 1e-10;
  o.tol_saturation = 1e-4;
  o.max_iters = 2000;
  BepProblem p = BepProblem::create(upper_half(), testing::smooth_data(g, cplx(1.5, 0.5), cplx(0.8, -0.4)),
                                    testing::smooth_mu(g, 0.4, 0.3), o);
  BepSolution direct = tight_solve(p);
  NormalizedProblem np = normalize_problem(p);
  BepSolution scaled = tight_solve(np.problem);
  return norm_l2(fft_synthesize(denormalize(np, scaled)) - direct.g0_trace);
}

TEST(Normalize, SolutionsAgreeThroughOuterFactor) { EXPECT_LT(normalize_discrepancy(4096), 1e-6); }

TEST(Normalize, DiscrepancyShrinksWithGrid) {
  double a = normalize_discrepancy(1024), b = normalize_discrepancy(2048), c = normalize_discrepancy(4096);
  EXPECT_LT(b, a);
  EXPECT_LT(c, b);
}

TEST(Stability, PerturbationResponseShrinks) {
  Grid g(4096);
  std::mt19937 rng(8);
  GridFunction u = testing::random_real_trig(g, 5, rng);
  SolverOptions o;
  o.tol_gap = 1e-10;
  o.tol_saturation = 1e-4;
  o.max_iters = 2000;
  BepProblem base = make_problem(GridFunction::constant(g, 2.0), 1.0, o);
  BepSolution s0 = solve_bep(base);
  const double un = norm_l2(u, base.wI);
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    GridFunction f = GridFunction::constant(g, 2.0);
    for (std::size_t k = 0; k < g.size(); ++k) f[k] += delta * u[k];
    BepProblem q = make_problem(f, 1.0, o);
    double d = norm_l2(solve_bep(q).g0_trace - s0.g0_trace, base.wI);
    EXPECT_LE(d, prev) << "delta " << delta;
    EXPECT_LT(d, 10.0 * delta * un) << "delta " << delta;
    prev = d;
  }
}

}  // namespace
}  // namespace bep
