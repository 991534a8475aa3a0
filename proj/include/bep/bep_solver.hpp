#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "bep/arcs.hpp"
#include "bep/core.hpp"
#include "bep/fft.hpp"
#include "bep/fourier.hpp"
#include "bep/grid.hpp"
#include "bep/hardy.hpp"

namespace bep {

enum class AscentRule { armijo, fixed_point };

struct SolverOptions {
  std::size_t grid_n = 4096;
  std::size_t max_iters = 500;
  double tol_gap = 1e-6;  // relative to ||f||^2 on I
  double tol_saturation = 1e-2;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double lambda_floor = 1e-6;
  double initial_step = 1.0;
  double cg_tol = 1e-10;
  std::size_t interior_cells = 10;
  AscentRule rule = AscentRule::armijo;

  void validate() const {
    (void)Grid(grid_n);
    if (max_iters == 0) throw InvalidArgument("max_iters must be positive");
    if (!(tol_gap > 0.0)) throw InvalidArgument("tol_gap must be positive");
    if (!(tol_saturation > 0.0)) throw InvalidArgument("tol_saturation must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidArgument("armijo_c must lie in (0, 1)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
      throw InvalidArgument("backtrack_factor must lie in (0, 1)");
    }
    if (!(lambda_floor > 0.0)) throw InvalidArgument("lambda_floor must be positive");
    if (!(initial_step > 0.0)) throw InvalidArgument("initial_step must be positive");
    if (!(cg_tol > 0.0)) throw InvalidArgument("cg_tol must be positive");
  }
};

/// Data f on I, bound M on J = complement of I, all sampled on one grid. I is snapped.
struct BepProblem {
  ArcSet I;
  ArcSet J;
  GridFunction f{Grid(8)};
  GridFunction M{Grid(8)};
  SolverOptions options;
  RVector wI;
  RVector wJ;
  std::vector<bool> interior_J;
  std::vector<std::string> warnings;

  static BepProblem create(const ArcSet& I, GridFunction f, GridFunction M, SolverOptions options = {}) {
    options.validate();
    if (f.size() != options.grid_n) {
      throw InvalidArgument("f has " + std::to_string(f.size()) + " samples but grid_n is " +
                            std::to_string(options.grid_n));
    }
    require_same_grid(f.grid(), M.grid(), "BepProblem");
    if (!M.is_real()) throw InvalidArgument("M must be real-valued");
    BepProblem p;
    const Grid& grid = f.grid();
    p.I = I.snapped(grid);
    p.J = p.I.complement();
    p.options = options;
    p.wI = p.I.weights(grid);
    p.wJ = p.J.weights(grid);
    p.interior_J = p.J.interior_mask(grid, options.interior_cells);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (!std::isfinite(f[k].real()) || !std::isfinite(f[k].imag())) throw InvalidArgument("f has non-finite samples");
      if (p.wI[k] == 0.0) f[k] = 0.0;
    }
    std::size_t floored = 0;
    for (std::size_t k = 0; k < M.size(); ++k) {
      if (p.wJ[k] == 0.0) {
        M[k] = 1.0;
        continue;
      }
      double m = M[k].real();
      if (!std::isfinite(m) || m < 0.0) throw InvalidArgument("M must be finite and non-negative on J");
      if (m < kModulusFloor) {
        ++floored;
        m = kModulusFloor;
      }
      M[k] = m;
    }
    if (floored > 0) {
      p.warnings.push_back("M floored at " + std::to_string(kModulusFloor) + " on " + std::to_string(floored) +
                           " grid points of J");
    }
    p.f = std::move(f);
    p.M = std::move(M);
    return p;
  }

  const Grid& grid() const noexcept { return f.grid(); }

  /// ||f||^2 on I, normalized measure.
  double f_norm2() const {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += wI[k] * std::norm(f[k]);
    return s / static_cast<double>(f.size());
  }

  bool unit_bound() const {
    for (std::size_t k = 0; k < M.size(); ++k) {
      if (wJ[k] > 0.0 && M[k].real() != 1.0) return false;
    }
    return true;
  }
};

namespace detail {

/// Operator c -> P+(s * c) on the analytic half [0, n/2) of the coefficient space.
class ToeplitzOperator {
 public:
  ToeplitzOperator(RVector symbol) : symbol_(std::move(symbol)), n_(symbol_.size()) {}

  std::size_t size() const noexcept { return n_ / 2; }

  CVector apply(const CVector& half) const {
    CVector full(n_);
    std::copy(half.begin(), half.end(), full.begin());
    CVector u = backward(full);
    for (std::size_t k = 0; k < n_; ++k) u[k] *= symbol_[k];
    CVector c = forward(u);
    c.resize(n_ / 2);
    return c;
  }

 private:
  RVector symbol_;
  std::size_t n_;
};

inline double dot_re(const CVector& a, const CVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

inline double norm2(const CVector& a) { return std::sqrt(dot_re(a, a)); }

struct CgResult {
  CVector x;
  double residual = 0.0;  // relative
  std::size_t iterations = 0;
};

/// Conjugate gradient for a self-adjoint positive definite operator.
template <typename Op>
CgResult conjugate_gradient(const Op& op, const CVector& rhs, double rel_tol, std::size_t max_iter,
                            const CVector* x0 = nullptr) {
  CgResult out;
  const double nb = norm2(rhs);
  out.x = x0 ? *x0 : CVector(rhs.size());
  if (nb == 0.0) {
    out.x.assign(rhs.size(), cplx{});
    return out;
  }
  CVector r = rhs;
  if (x0) {
    CVector ax = op.apply(out.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
  }
  CVector p = r;
  double rr = dot_re(r, r);
  std::size_t it = 0;
  while (std::sqrt(rr) > rel_tol * nb) {
    if (it >= max_iter) throw ConvergenceError("conjugate gradient did not converge", std::sqrt(rr) / nb, it);
    CVector ap = op.apply(p);
    double alpha = rr / dot_re(p, ap);
    for (std::size_t i = 0; i < r.size(); ++i) {
      out.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rn = dot_re(r, r);
    double beta = rn / rr;
    for (std::size_t i = 0; i < r.size(); ++i) p[i] = r[i] + beta * p[i];
    rr = rn;
    ++it;
  }
  out.residual = std::sqrt(rr) / nb;
  out.iterations = it;
  return out;
}

inline FourierSeries embed_half(const CVector& half, std::size_t n) {
  FourierSeries s(n);
  std::copy(half.begin(), half.end(), s.data().begin());
  return s;
}

inline RVector symbol_of(const RVector& wI, const RVector& wJ, const GridFunction& mu) {
  RVector s(wI.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = wI[k] + wJ[k] * mu[k].real();
  return s;
}

inline void require_real_on(const GridFunction& mu, const RVector& w, double floor, const char* where) {
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (w[k] > 0.0 && !(mu[k].real() >= floor)) {
      throw InvalidArgument(std::string(where) + ": multiplier below " + std::to_string(floor) + " on J");
    }
  }
}

}  // namespace detail

/// P+((lambda - 1) g) on J, i.e. the Toeplitz operator with symbol 0 v (lambda - 1).
inline FourierSeries toeplitz_apply(const ArcSet& I, const GridFunction& lambda, const FourierSeries& g) {
  require_analytic(g, "toeplitz_apply");
  if (g.size() != lambda.size()) throw InvalidArgument("toeplitz_apply: grid mismatch");
  const Grid& grid = lambda.grid();
  const RVector wJ = I.snapped(grid).complement().weights(grid);
  RVector sym(grid.size());
  for (std::size_t k = 0; k < sym.size(); ++k) sym[k] = wJ[k] * (lambda[k].real() - 1.0);
  CVector half(g.data().begin(), g.data().begin() + static_cast<std::ptrdiff_t>(g.size() / 2));
  return detail::embed_half(detail::ToeplitzOperator(std::move(sym)).apply(half), g.size());
}

struct ToeplitzSolve {
  FourierSeries g{8};
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// (I + T_lambda)^{-1} P+(f v 0) by matrix-free conjugate gradient.
inline ToeplitzSolve solve_toeplitz(const ArcSet& I, const GridFunction& lambda, const GridFunction& f,
                                    double rel_tol = 1e-10, const FourierSeries* warm = nullptr) {
  require_same_grid(lambda.grid(), f.grid(), "solve_toeplitz");
  const Grid& grid = f.grid();
  const ArcSet Is = I.snapped(grid);
  const RVector wI = Is.weights(grid);
  const RVector wJ = Is.complement().weights(grid);
  detail::require_real_on(lambda, wJ, std::numeric_limits<double>::min(), "solve_toeplitz");
  CVector fi(grid.size());
  for (std::size_t k = 0; k < fi.size(); ++k) fi[k] = wI[k] * f[k];
  CVector rhs = detail::forward(fi);
  rhs.resize(grid.size() / 2);
  detail::ToeplitzOperator op(detail::symbol_of(wI, wJ, lambda));
  std::optional<CVector> x0;
  if (warm) x0.emplace(warm->data().begin(), warm->data().begin() + static_cast<std::ptrdiff_t>(grid.size() / 2));
  auto cg = detail::conjugate_gradient(op, rhs, rel_tol, 10 * grid.size(), x0 ? &*x0 : nullptr);
  return {detail::embed_half(cg.x, grid.size()), cg.residual, cg.iterations};
}

namespace detail {

/// Outer function with modulus 1 on I and sqrt(mu) on J, on the working grid.
inline OuterFunction sqrt_mu_outer(const RVector& wJ, const GridFunction& mu) {
  CVector u(mu.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (wJ[k] > 0.0) u[k] = wJ[k] * 0.5 * std::log(mu[k].real());
  }
  return OuterFunction(GridFunction(mu.grid(), std::move(u)));
}

inline CVector times_weight_outer(const RVector& wI, const GridFunction& f, const GridFunction& w) {
  CVector v(f.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = wI[k] * f[k] * w[k];
  return v;
}

}  // namespace detail

/// Closed form g_mu = (1/w) P+(f w v 0) with w outer, |w| = 1 on I and sqrt(mu) on J.
inline FourierSeries carleman_g_mu(const ArcSet& I, const GridFunction& mu, const GridFunction& f) {
  require_same_grid(mu.grid(), f.grid(), "carleman_g_mu");
  const Grid& grid = f.grid();
  const ArcSet Is = I.snapped(grid);
  const RVector wI = Is.weights(grid);
  const RVector wJ = Is.complement().weights(grid);
  detail::require_real_on(mu, wJ, std::numeric_limits<double>::min(), "carleman_g_mu");
  const OuterFunction w = detail::sqrt_mu_outer(wJ, mu);
  const GridFunction wt = w.trace();
  const GridFunction winv = w.inverse_trace();
  CVector fw = detail::times_weight_outer(wI, f, wt);
  FourierSeries plus = project_plus(FourierSeries(detail::forward(fw)));
  CVector u = detail::backward(plus.data());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] *= winv[k];
  return project_plus(FourierSeries(detail::forward(u)));
}

/// Phi_M(mu) = ||P-(f w v 0)||^2 - ||mu^{1/2} M||^2_J with the outer w of carleman_g_mu.
inline double dual_value(const ArcSet& I, const GridFunction& mu, const GridFunction& f, const GridFunction& M) {
  require_same_grid(mu.grid(), f.grid(), "dual_value");
  require_same_grid(mu.grid(), M.grid(), "dual_value");
  const Grid& grid = f.grid();
  const ArcSet Is = I.snapped(grid);
  const RVector wI = Is.weights(grid);
  const RVector wJ = Is.complement().weights(grid);
  detail::require_real_on(mu, wJ, std::numeric_limits<double>::min(), "dual_value");
  const OuterFunction w = detail::sqrt_mu_outer(wJ, mu);
  CVector fw = detail::times_weight_outer(wI, f, w.trace());
  FourierSeries minus = project_minus(FourierSeries(detail::forward(fw)));
  double l2 = minus.l2_norm();
  double bound = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) bound += wJ[k] * mu[k].real() * std::norm(M[k].real());
  return l2 * l2 - bound / static_cast<double>(grid.size());
}

/// ||f - g||^2_I + int_J mu (|g|^2 - M^2), normalized measure.
inline double lagrangian_value(const RVector& wI, const RVector& wJ, const GridFunction& mu, const GridFunction& f,
                               const GridFunction& M, const GridFunction& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    s += wI[k] * std::norm(f[k] - g[k]);
    if (wJ[k] > 0.0) s += wJ[k] * mu[k].real() * (std::norm(g[k]) - std::norm(M[k].real()));
  }
  return s / static_cast<double>(g.size());
}

struct DualState {
  GridFunction mu{Grid(8)};
  FourierSeries g_mu{8};
  GridFunction g_trace{Grid(8)};
  double phi_value = 0.0;
  GridFunction gradient{Grid(8)};
  std::size_t cg_iterations = 0;
};

/// Minimizer g_mu (Toeplitz route), Phi_M(mu) as the Lagrangian at g_mu, and the
/// gradient |g_mu|^2 - M^2 on J (zero off J).
inline DualState evaluate_dual(const BepProblem& p, const GridFunction& mu, const FourierSeries* warm = nullptr) {
  DualState st;
  st.mu = mu;
  auto solve = solve_toeplitz(p.I, mu, p.f, p.options.cg_tol, warm);
  st.g_mu = std::move(solve.g);
  st.cg_iterations = solve.iterations;
  st.g_trace = fft_synthesize(st.g_mu);
  st.phi_value = lagrangian_value(p.wI, p.wJ, mu, p.f, p.M, st.g_trace);
  CVector grad(mu.size());
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (p.wJ[k] > 0.0) grad[k] = std::norm(st.g_trace[k]) - std::norm(p.M[k].real());
  }
  st.gradient = GridFunction(mu.grid(), std::move(grad));
  return st;
}

inline GridFunction dual_gradient(const BepProblem& p, const GridFunction& mu) { return evaluate_dual(p, mu).gradient; }

/// Directional derivative of Phi_M at the state along h: (1/n) sum_J w_J h grad.
inline double directional_derivative(const BepProblem& p, const DualState& st, const GridFunction& h) {
  double s = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) s += p.wJ[k] * h[k].real() * st.gradient[k].real();
  return s / static_cast<double>(h.size());
}

struct BepSolution {
  FourierSeries g0{8};
  GridFunction g0_trace{Grid(8)};
  GridFunction lambda{Grid(8)};
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double saturation_residual = 0.0;
  double critical_residual = 0.0;
  double mean_imag = 0.0;
  std::size_t iterations = 0;
  std::size_t cg_iterations = 0;
  bool converged = false;
  bool extendable = false;
  std::string status;
  std::vector<double> phi_history;
};

namespace detail {

inline double primal_value(const BepProblem& p, const GridFunction& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += p.wI[k] * std::norm(p.f[k] - g[k]);
  return s / static_cast<double>(g.size());
}

inline double saturation(const BepProblem& p, const GridFunction& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (p.interior_J[k]) s = std::max(s, std::abs(std::abs(g[k]) - p.M[k].real()));
  }
  return s;
}

}  // namespace detail

struct KktReport {
  double critical_residual = 0.0;
  double saturation_residual = 0.0;
  double mean_imag = 0.0;
};

/// Boundary trace of the normalizing outer w_M (modulus 1 on I, M on J).
inline GridFunction normalizer_trace(const BepProblem& p) {
  if (p.unit_bound()) return GridFunction::constant(p.grid(), 1.0);
  return concatenated_outer(p.I, p.M).trace_on(p.grid());
}

/// Critical-point residual ||P+(((g0 - f) v lambda g0) conj(w))|| / ||f||_I, saturation
/// on interior J, and Im <(f - g0) conj(g0)>_I. Without w this is the stationarity the
/// dual solver enforces; passing normalizer_trace(p) gives the normalized form, equal in
/// the continuum but aliased on the grid when M jumps at the endpoints.
inline KktReport kkt_residuals(const BepSolution& sol, const BepProblem& p,
                               const std::optional<GridFunction>& wM = std::nullopt) {
  KktReport r;
  const GridFunction w = wM ? *wM : GridFunction::constant(p.grid(), 1.0);
  const std::size_t n = p.grid().size();
  CVector u(n);
  cplx mean_term{};
  for (std::size_t k = 0; k < n; ++k) {
    const cplx g = sol.g0_trace[k];
    u[k] = (p.wI[k] * (g - p.f[k]) + p.wJ[k] * sol.lambda[k].real() * g) * std::conj(w[k]);
    mean_term += p.wI[k] * (p.f[k] - g) * std::conj(g);
  }
  const double fn = std::sqrt(p.f_norm2());
  FourierSeries res = project_plus(FourierSeries(detail::forward(u)));
  r.critical_residual = fn > 0.0 ? res.l2_norm() / fn : res.l2_norm();
  r.saturation_residual = detail::saturation(p, sol.g0_trace);
  r.mean_imag = (mean_term / static_cast<double>(n)).imag();
  return r;
}

/// Least-squares polynomial fit of f on I with degree <= max_degree. Returns the first
/// fit whose residual is at most rel_tol * ||f||^2 and which satisfies |p| <= M on J.
/// With lambda = 0 the Toeplitz system is too ill-conditioned to recover such an
/// extension from the dual side, so it is detected directly.
inline std::optional<FourierSeries> polynomial_extension(const BepProblem& p, int max_degree = 24,
                                                         double rel_tol = 1e-10) {
  const Grid& grid = p.grid();
  const std::size_t n = grid.size();
  const double fn2 = p.f_norm2();
  std::vector<std::size_t> rows;
  for (std::size_t k = 0; k < n; ++k) {
    if (p.wI[k] > 0.0) rows.push_back(k);
  }
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) rhs(static_cast<Eigen::Index>(r)) = std::sqrt(p.wI[rows[r]]) * p.f[rows[r]];
  for (int d = 0; d <= max_degree && d < static_cast<int>(n / 2); ++d) {
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(rows.size()), d + 1);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (int m = 0; m <= d; ++m) A(static_cast<Eigen::Index>(r), m) = std::sqrt(p.wI[rows[r]]) * std::polar(1.0, m * grid.theta(rows[r]));
    }
    Eigen::VectorXcd c = A.colPivHouseholderQr().solve(rhs);
    double res = (A * c - rhs).squaredNorm() / static_cast<double>(n);
    if (res > rel_tol * fn2) continue;
    FourierSeries s(n);
    for (int m = 0; m <= d; ++m) s.data()[static_cast<std::size_t>(m)] = c(m);
    GridFunction t = fft_synthesize(s);
    for (std::size_t k = 0; k < n; ++k) {
      if (p.wJ[k] > 0.0 && std::abs(t[k]) > p.M[k].real() * (1.0 + 1e-9)) return std::nullopt;
    }
    return s;
  }
  return std::nullopt;
}

/// Dual ascent on the multiplier mu = exp(xi) over J.
inline BepSolution solve_bep(const BepProblem& p) {
  const auto& opt = p.options;
  const Grid& grid = p.grid();
  const std::size_t n = grid.size();
  const double fn2 = p.f_norm2();

  if (auto ext = polynomial_extension(p)) {
    BepSolution sol;
    sol.g0 = std::move(*ext);
    sol.g0_trace = fft_synthesize(sol.g0);
    sol.lambda = GridFunction(grid);
    sol.primal = detail::primal_value(p, sol.g0_trace);
    sol.dual = lagrangian_value(p.wI, p.wJ, sol.lambda, p.f, p.M, sol.g0_trace);
    sol.gap = sol.primal - sol.dual;
    sol.saturation_residual = detail::saturation(p, sol.g0_trace);
    sol.converged = true;
    sol.extendable = true;
    sol.status = "converged: data extends within the bound";
    KktReport kkt = kkt_residuals(sol, p);
    sol.critical_residual = kkt.critical_residual;
    sol.mean_imag = kkt.mean_imag;
    return sol;
  }

  CVector mu0(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (p.wJ[k] > 0.0) mu0[k] = 1.0;
  }
  DualState st = evaluate_dual(p, GridFunction(grid, std::move(mu0)));
  BepSolution sol;
  sol.cg_iterations = st.cg_iterations;
  sol.phi_history.push_back(st.phi_value);

  std::size_t it = 0;
  double primal = 0.0;
  double gap = 0.0;
  double sat = 0.0;
  for (;; ++it) {
    primal = detail::primal_value(p, st.g_trace);
    gap = primal - st.phi_value;
    sat = detail::saturation(p, st.g_trace);
    if (primal <= 1e-10 * fn2) {
      sol.converged = true;
      sol.extendable = true;
      sol.status = "converged: data extends within the bound";
      break;
    }
    if (gap <= opt.tol_gap * fn2 && gap >= -1e-8 * std::max(1.0, fn2) && sat <= opt.tol_saturation) {
      sol.converged = true;
      sol.status = "converged: duality gap and saturation within tolerance";
      break;
    }
    if (it >= opt.max_iters) {
      sol.status = "iteration cap reached";
      break;
    }

    CVector next(n);
    bool accepted = false;
    if (opt.rule == AscentRule::fixed_point) {
      for (std::size_t k = 0; k < n; ++k) {
        if (p.wJ[k] == 0.0) continue;
        double m2 = std::norm(p.M[k].real());
        next[k] = std::max(st.mu[k].real() * std::norm(st.g_trace[k]) / m2, opt.lambda_floor);
      }
      st = evaluate_dual(p, GridFunction(grid, std::move(next)), &st.g_mu);
      accepted = true;
    } else {
      double t = opt.initial_step;
      for (int bt = 0; bt < 60 && !accepted; ++bt, t *= opt.backtrack_factor) {
        double predicted = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (p.wJ[k] == 0.0) continue;
          double m = st.mu[k].real();
          double gk = st.gradient[k].real();
          double mn = std::max(m * std::exp(t * gk), opt.lambda_floor);
          next[k] = mn;
          predicted += p.wJ[k] * gk * (mn - m);
        }
        predicted /= static_cast<double>(n);
        if (predicted <= 0.0) break;
        DualState trial = evaluate_dual(p, GridFunction(grid, next), &st.g_mu);
        sol.cg_iterations += trial.cg_iterations;
        if (trial.phi_value >= st.phi_value + opt.armijo_c * predicted) {
          st = std::move(trial);
          accepted = true;
        }
      }
    }
    if (!accepted) {
      sol.status = "ascent stalled: no step satisfies the sufficient-increase test";
      break;
    }
    sol.phi_history.push_back(st.phi_value);
  }

  sol.g0 = st.g_mu;
  sol.g0_trace = st.g_trace;
  sol.lambda = st.mu;
  sol.primal = primal;
  sol.dual = st.phi_value;
  sol.gap = gap;
  sol.saturation_residual = sat;
  sol.iterations = it;
  KktReport kkt = kkt_residuals(sol, p);
  sol.critical_residual = kkt.critical_residual;
  sol.mean_imag = kkt.mean_imag;
  return sol;
}

/// Problem rescaled to M = 1 by the outer w_M; solutions map back by multiplication with w_M.
struct NormalizedProblem {
  BepProblem problem;
  OuterFunction w_M;
  GridFunction w_trace;
};

inline NormalizedProblem normalize_problem(const BepProblem& p) {
  const Grid& grid = p.grid();
  OuterFunction w = p.unit_bound() ? OuterFunction(GridFunction(grid)) : concatenated_outer(p.I, p.M);
  GridFunction wt = w.trace_on(grid);
  GridFunction winv = w.trace_on(grid, -1.0);
  GridFunction f = p.f;
  for (std::size_t k = 0; k < f.size(); ++k) f[k] *= winv[k];
  BepProblem q = BepProblem::create(p.I, std::move(f), GridFunction::constant(grid, 1.0), p.options);
  q.warnings = p.warnings;
  return {std::move(q), std::move(w), std::move(wt)};
}

/// g = w_M h, projected to the analytic coefficients.
inline FourierSeries denormalize(const NormalizedProblem& np, const BepSolution& s) {
  return project_plus(fft_analyze(np.w_trace * s.g0_trace));
}

/// F(z) = (1/2 pi i) int_I (e^{it}+z)/(e^{it}-z) (-Im(f conj g0)) dt by the grid rule.
inline cplx herglotz_value(const BepSolution& sol, const BepProblem& p, cplx z) {
  const Grid& grid = p.grid();
  cplx s{};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (p.wI[k] == 0.0) continue;
    cplx xi = grid.point(k);
    double h = -(p.f[k] * std::conj(sol.g0_trace[k])).imag();
    s += p.wI[k] * (xi + z) / (xi - z) * h;
  }
  return s / (static_cast<double>(grid.size()) * kI);
}

struct HerglotzReport {
  double residual = 0.0;           // max |F - lambda M^2| over interior J / max over J of lambda M^2
  double residual_interior = 0.0;  // same error / max over interior J of lambda M^2
  double max_abs_error = 0.0;
};

inline HerglotzReport herglotz_check(const BepSolution& sol, const BepProblem& p) {
  const Grid& grid = p.grid();
  double err = 0.0;
  double scale_all = 0.0;
  double scale_int = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (p.wJ[k] == 0.0) continue;
    double target = sol.lambda[k].real() * std::norm(p.M[k].real());
    scale_all = std::max(scale_all, target);
    if (!p.interior_J[k]) continue;
    scale_int = std::max(scale_int, target);
    err = std::max(err, std::abs(herglotz_value(sol, p, grid.point(k)) - target));
  }
  HerglotzReport r;
  r.max_abs_error = err;
  r.residual = scale_all > 0.0 ? err / scale_all : err;
  r.residual_interior = scale_int > 0.0 ? err / scale_int : err;
  return r;
}

struct LpBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// ||g0||_{L^p(I)} <= 2 ||f||_{L^p(I)} + 1e-6.
inline LpBound lp_bound_check(const BepSolution& sol, const BepProblem& p, double p_exp = 4.0) {
  LpBound b;
  b.lhs = norm_lp(sol.g0_trace, p.wI, p_exp);
  b.rhs = 2.0 * norm_lp(p.f, p.wI, p_exp);
  b.holds = b.lhs <= b.rhs + 1e-6;
  return b;
}

}  // namespace bep
