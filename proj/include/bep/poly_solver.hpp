#pragma once

#include <boost/math/tools/minima.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bep/arcs.hpp"
#include "bep/bep_solver.hpp"
#include "bep/core.hpp"
#include "bep/grid.hpp"
#include "bep/parallel.hpp"
#include "bep/quadrature.hpp"

namespace bep {

/// G[k][m] = <e^{ik.}, e^{im.}>_I in closed form.
inline Eigen::MatrixXcd gram_matrix(const ArcSet& I, int n) {
  if (n < 0) throw InvalidArgument("gram_matrix: negative degree");
  Eigen::MatrixXcd G(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    for (int m = 0; m <= n; ++m) {
      const int d = k - m;
      cplx s{};
      for (const auto& arc : I.arcs()) {
        if (d == 0) {
          s += arc.length() / kTwoPi;
        } else {
          s += (std::polar(1.0, d * arc.b) - std::polar(1.0, d * arc.a)) / (kTwoPi * kI * static_cast<double>(d));
        }
      }
      G(k, m) = s;
    }
  }
  return G;
}

/// mom_k = <f, e^{ik.}>_I for k = 0..n and ||f||^2_I, by per-cell Gauss rules on the
/// interpolated data.
struct ArcMoments {
  Eigen::VectorXcd mom;
  double f_norm2 = 0.0;
};

inline ArcMoments arc_moments(const ArcSet& I, const GridFunction& f, int n) {
  const Grid& grid = f.grid();
  const ArcSet Is = I.snapped(grid);
  const ArcSampler sampler(f, Is);
  struct Node {
    double theta;
    cplx value;
  };
  // Collect the quadrature nodes once; weights are folded into the values.
  std::vector<Node> nodes;
  ArcMoments out;
  out.f_norm2 = integrate_over_cells(grid, Is, [&](std::size_t arc, double off, double theta) {
                  cplx v = sampler.at_offset(arc, off);
                  nodes.push_back({theta, v});
                  return cplx(std::norm(v));
                }).real();
  static const auto rule = gauss_legendre<8>();
  const double scale = 0.5 * grid.step() / kTwoPi;
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].value *= rule[i % rule.size()].w * scale;
  out.mom = Eigen::VectorXcd::Zero(n + 1);
  for (const auto& nd : nodes) {
    const cplx step = std::polar(1.0, -nd.theta);
    cplx e = nd.value;
    for (int k = 0; k <= n; ++k) {
      out.mom(k) += e;
      e *= step;
    }
  }
  return out;
}

inline cplx poly_eval(const Eigen::VectorXcd& c, double x) {
  cplx z = std::polar(1.0, x);
  cplx acc{};
  for (Eigen::Index k = c.size(); k-- > 0;) acc = acc * z + c(k);
  return acc;
}

struct PolyOptions {
  std::size_t max_exchange = 100;
  double violation_tol = 1e-8;
  double add_tol = 1e-10;
  double barrier_gap = 1e-8;  // stop when (#constraints)/t is below this
  std::size_t scan_factor = 16;
  double active_tol = 1e-6;

  void validate() const {
    if (max_exchange == 0) throw InvalidArgument("max_exchange must be positive");
    if (!(violation_tol > 0.0)) throw InvalidArgument("violation_tol must be positive");
    if (!(add_tol > 0.0)) throw InvalidArgument("add_tol must be positive");
    if (!(barrier_gap > 0.0)) throw InvalidArgument("barrier_gap must be positive");
    if (scan_factor == 0) throw InvalidArgument("scan_factor must be positive");
    if (!(active_tol > 0.0)) throw InvalidArgument("active_tol must be positive");
  }
};

/// Degree-n problem on I with the semi-infinite constraint |p| <= 1 on J discretized by
/// constraint_points.
struct PolyProblem {
  ArcSet I;
  ArcSet J;
  GridFunction f{Grid(8)};
  int degree = 0;
  std::vector<double> constraint_points;

  /// Seeds 4(n+1) points spread over J, endpoints of every J-arc included.
  static PolyProblem create(const ArcSet& I, const GridFunction& f, int degree) {
    if (degree < 0) throw InvalidArgument("degree must be non-negative");
    PolyProblem p;
    p.I = I.snapped(f.grid());
    p.J = p.I.complement();
    p.f = f;
    p.degree = degree;
    const std::size_t want = 4 * static_cast<std::size_t>(degree + 1);
    const double total = p.J.measure();
    for (const auto& arc : p.J.arcs()) {
      auto cells = static_cast<std::size_t>(std::ceil(static_cast<double>(want) * arc.length() / total));
      cells = std::max<std::size_t>(cells, 1);
      for (std::size_t i = 0; i <= cells; ++i) {
        p.constraint_points.push_back(arc.a + arc.length() * static_cast<double>(i) / static_cast<double>(cells));
      }
    }
    p.validate();
    return p;
  }

  void validate() const {
    if (constraint_points.size() < 4 * static_cast<std::size_t>(degree + 1)) {
      throw InvalidArgument("PolyProblem: fewer than 4(n+1) constraint points");
    }
    for (double x : constraint_points) {
      if (!J.contains(x)) throw InvalidArgument("PolyProblem: constraint point outside J");
    }
  }
};

struct PolySolution {
  Eigen::VectorXcd coeffs;
  std::vector<double> active_points;
  std::vector<double> multipliers;
  double primal = 0.0;
  double stationarity_residual = 0.0;
  double multiplier_sum = 0.0;
  double f_norm2 = 0.0;
  double max_modulus = 0.0;  // max |k_n| over the final J scan
  bool certificate_valid = false;
  std::size_t exchange_iterations = 0;
  std::vector<double> constraint_points;
};

namespace detail {

struct RealQp {
  Eigen::MatrixXd A;  // objective x'Ax - 2 b'x + const
  Eigen::VectorXd b;
};

inline RealQp real_form(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& mom) {
  const Eigen::Index d = A.rows();
  RealQp q;
  q.A.resize(2 * d, 2 * d);
  q.A << A.real(), -A.imag(), A.imag(), A.real();
  q.b.resize(2 * d);
  q.b << mom.real(), mom.imag();
  return q;
}

/// Rows u, v with Re p(x) = u.x and Im p(x) = v.x for x = [Re c; Im c].
inline void constraint_rows(double x, Eigen::Index d, Eigen::VectorXd& u, Eigen::VectorXd& v) {
  u.resize(2 * d);
  v.resize(2 * d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double cs = std::cos(static_cast<double>(k) * x);
    double sn = std::sin(static_cast<double>(k) * x);
    u(k) = cs;
    u(d + k) = -sn;
    v(k) = sn;
    v(d + k) = cs;
  }
}

/// Log-barrier Newton method for min x'Ax - 2b'x s.t. (u_j.x)^2 + (v_j.x)^2 <= 1.
/// Returns x and the multipliers 1/(t s_j) of the constraints |p(x_j)|^2 <= 1.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> barrier_qp(const RealQp& q, const std::vector<double>& points,
                                                             double gap_tol) {
  const Eigen::Index dim = q.A.rows();
  const Eigen::Index d = dim / 2;
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd U(m, dim), V(m, dim);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd u, v;
    constraint_rows(points[static_cast<std::size_t>(j)], d, u, v);
    U.row(j) = u.transpose();
    V.row(j) = v.transpose();
  }
  auto slack = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd ru = U * x, rv = V * x;
    return (1.0 - ru.array().square() - rv.array().square()).matrix();
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  double t = 1.0;
  for (int outer = 0; outer < 200; ++outer) {
    // Damped Newton on t*q(x) - sum log s_j; the barrier is self-concordant, so the step
    // 1/(1 + decrement) decreases it without function evaluations, which lose all
    // precision once t is large.
    for (int it = 0; it < 500; ++it) {
      Eigen::VectorXd ru = U * x, rv = V * x;
      Eigen::ArrayXd s = 1.0 - ru.array().square() - rv.array().square();
      Eigen::ArrayXd inv = 1.0 / s;
      Eigen::MatrixXd Q = (2.0 * ru.array() * inv).matrix().asDiagonal() * U;
      Q += (2.0 * rv.array() * inv).matrix().asDiagonal() * V;
      Eigen::VectorXd grad = t * (2.0 * q.A * x - 2.0 * q.b) + Q.colwise().sum().transpose();
      Eigen::MatrixXd H = 2.0 * t * q.A;
      H.noalias() += U.transpose() * (2.0 * inv).matrix().asDiagonal() * U;
      H.noalias() += V.transpose() * (2.0 * inv).matrix().asDiagonal() * V;
      H.noalias() += Q.transpose() * Q;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      Eigen::VectorXd dx = -ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !dx.allFinite()) dx = -H.completeOrthogonalDecomposition().solve(grad);
      const double dec = std::sqrt(std::max(0.0, -grad.dot(dx)));
      double step = dec > 0.25 ? 1.0 / (1.0 + dec) : 1.0;
      while ((slack(x + step * dx).array() <= 0.0).any()) step *= 0.5;
      x += step * dx;
      if (dec < 1e-9) break;
    }
    if (static_cast<double>(m) / t < gap_tol) break;
    t *= 20.0;
  }
  Eigen::VectorXd s = slack(x);
  Eigen::VectorXd lam = (1.0 / (t * s.array())).matrix();
  return {x, lam};
}

/// Newton on the KKT equalities of the constraints the barrier marks active
/// (multiplier >= 1e-3 of the largest and slack below 1e-4). Falls back to the barrier
/// point if the result leaves the feasible set, gets a negative multiplier, or does not
/// converge.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> polish_active_set(const RealQp& q,
                                                                     const std::vector<double>& points,
                                                                     const Eigen::VectorXd& x0,
                                                                     const Eigen::VectorXd& lam0) {
  const Eigen::Index dim = q.A.rows();
  const Eigen::Index d = dim / 2;
  if (lam0.size() == 0) return {x0, lam0};
  const double lmax = lam0.maxCoeff();
  std::vector<Eigen::Index> act;
  for (Eigen::Index j = 0; j < lam0.size(); ++j) {
    Eigen::VectorXd u, v;
    constraint_rows(points[static_cast<std::size_t>(j)], d, u, v);
    const double slack = 1.0 - std::pow(u.dot(x0), 2) - std::pow(v.dot(x0), 2);
    if (lam0(j) >= 1e-3 * lmax && slack < 1e-4) act.push_back(j);
  }
  const auto r = static_cast<Eigen::Index>(act.size());
  Eigen::MatrixXd U(r, dim), V(r, dim);
  for (Eigen::Index a = 0; a < r; ++a) {
    Eigen::VectorXd u, v;
    constraint_rows(points[static_cast<std::size_t>(act[static_cast<std::size_t>(a)])], d, u, v);
    U.row(a) = u.transpose();
    V.row(a) = v.transpose();
  }
  Eigen::VectorXd x = x0;
  Eigen::VectorXd la(r);
  for (Eigen::Index a = 0; a < r; ++a) la(a) = lam0(act[static_cast<std::size_t>(a)]);
  double prev = std::numeric_limits<double>::infinity();
  bool ok = false;
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd ru = U * x, rv = V * x;
    Eigen::MatrixXd Qt = ru.asDiagonal() * U;
    Qt += rv.asDiagonal() * V;  // rows q_a
    Eigen::VectorXd F(dim + r);
    F.head(dim) = 2.0 * q.A * x - 2.0 * q.b + 2.0 * Qt.transpose() * la;
    F.tail(r) = (ru.array().square() + rv.array().square() - 1.0).matrix();
    const double res = F.norm();
    if (res < 1e-14 || (it > 3 && res >= prev)) {
      ok = res < 1e-9;
      break;
    }
    prev = res;
    Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(dim + r, dim + r);
    Jm.topLeftCorner(dim, dim) = 2.0 * q.A + 2.0 * U.transpose() * la.asDiagonal() * U +
                                 2.0 * V.transpose() * la.asDiagonal() * V;
    Jm.topRightCorner(dim, r) = 2.0 * Qt.transpose();
    Jm.bottomLeftCorner(r, dim) = 2.0 * Qt;
    Eigen::VectorXd step = Jm.completeOrthogonalDecomposition().solve(-F);
    x += step.head(dim);
    la += step.tail(r);
  }
  if (!ok || (la.array() < 0.0).any()) return {x0, lam0};
  for (double pt : points) {
    Eigen::VectorXd u, v;
    constraint_rows(pt, d, u, v);
    if (std::pow(u.dot(x), 2) + std::pow(v.dot(x), 2) > 1.0 + 1e-12) return {x0, lam0};
  }
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(lam0.size());
  for (Eigen::Index a = 0; a < r; ++a) lam(act[static_cast<std::size_t>(a)]) = la(a);
  return {x, lam};
}

inline Eigen::VectorXcd to_complex(const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size() / 2;
  Eigen::VectorXcd c(d);
  for (Eigen::Index k = 0; k < d; ++k) c(k) = cplx(x(k), x(d + k));
  return c;
}

struct Peak {
  double x;
  double modulus;
};

/// Local maxima of |p| on J: scan on about `count` points, refine interior maxima with
/// Brent's method; arc endpoints count as candidates.
inline std::vector<Peak> modulus_peaks(const Eigen::VectorXcd& c, const ArcSet& J, std::size_t count) {
  std::vector<Peak> peaks;
  const double total = J.measure();
  for (const auto& arc : J.arcs()) {
    auto cells = static_cast<std::size_t>(std::ceil(static_cast<double>(count) * arc.length() / total));
    cells = std::max<std::size_t>(cells, 8);
    const double h = arc.length() / static_cast<double>(cells);
    std::vector<double> v(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) v[i] = std::abs(poly_eval(c, arc.a + h * static_cast<double>(i)));
    for (std::size_t i = 0; i <= cells; ++i) {
      const bool left = i == 0 || v[i] >= v[i - 1];
      const bool right = i == cells || v[i] >= v[i + 1];
      if (!(left && right)) continue;
      if (i == 0 || i == cells) {
        peaks.push_back({arc.a + h * static_cast<double>(i), v[i]});
        continue;
      }
      auto neg = [&](double x) { return -std::abs(poly_eval(c, x)); };
      auto r = boost::math::tools::brent_find_minima(neg, arc.a + h * static_cast<double>(i - 1),
                                                     arc.a + h * static_cast<double>(i + 1),
                                                     std::numeric_limits<double>::digits);
      peaks.push_back({r.first, -r.second});
    }
  }
  return peaks;
}

/// Lawson-Hanson non-negative least squares: min ||B x - r||, x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& B, const Eigen::VectorXd& r, int max_iter = 500) {
  const Eigen::Index n = B.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-14 * std::max(1.0, B.norm() * r.norm());
  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd Bp(B.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) Bp.col(static_cast<Eigen::Index>(i)) = B.col(idx[i]);
    Eigen::VectorXd zp = Bp.colPivHouseholderQr().solve(r);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < idx.size(); ++i) z(idx[i]) = zp(static_cast<Eigen::Index>(i));
    return z;
  };
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = B.transpose() * (r - B * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > wmax) {
        wmax = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      Eigen::VectorXd z = solve_passive();
      bool ok = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) ok = false;
      }
      if (ok) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  return x;
}

inline double objective(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& mom, double f2, const Eigen::VectorXcd& c) {
  return (c.dot(A * c)).real() - 2.0 * c.dot(mom).real() + f2;
}

}  // namespace detail

/// Active points, NNLS multipliers and stationarity residual for a solved instance.
struct KktCertificate {
  std::vector<double> points;
  std::vector<double> multipliers;
  double residual = 0.0;
  double multiplier_sum = 0.0;
  bool valid = false;
};

inline KktCertificate kkt_certificate(const Eigen::VectorXcd& c, const PolyProblem& p, const PolyOptions& opt = {}) {
  const int n = p.degree;
  const Eigen::MatrixXcd A = gram_matrix(p.I, n).transpose();
  const ArcMoments am = arc_moments(p.I, p.f, n);
  const Eigen::VectorXcd rc = -(A * c - am.mom);

  // Candidate contact points: refined maxima of |k_n| plus the exchange points.
  std::vector<detail::Peak> cand;
  const std::size_t scan = std::max<std::size_t>(opt.scan_factor * static_cast<std::size_t>(n), 64);
  for (const auto& pk : detail::modulus_peaks(c, p.J, scan)) {
    if (pk.modulus >= 1.0 - opt.active_tol) cand.push_back(pk);
  }
  for (double x : p.constraint_points) {
    double m = std::abs(poly_eval(c, x));
    if (m >= 1.0 - opt.active_tol) cand.push_back({x, m});
  }

  KktCertificate cert;
  const Eigen::Index d = n + 1;
  Eigen::VectorXd r(2 * d);
  r << rc.real(), rc.imag();
  if (cand.empty()) {
    cert.residual = r.norm();
    cert.valid = cert.residual <= 1e-6;
    return cert;
  }
  Eigen::MatrixXd B(2 * d, static_cast<Eigen::Index>(cand.size()));
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const cplx px = poly_eval(c, cand[i].x);
    for (Eigen::Index m = 0; m < d; ++m) {
      cplx e = px * std::polar(1.0, -static_cast<double>(m) * cand[i].x);
      B(m, static_cast<Eigen::Index>(i)) = e.real();
      B(d + m, static_cast<Eigen::Index>(i)) = e.imag();
    }
  }
  Eigen::VectorXd lam = detail::nnls(B, r);
  cert.residual = (B * lam - r).norm();

  // Merge points closer than 2pi/(64n) along each J-arc, summing multipliers; the
  // reported location is the candidate of largest modulus in the cluster.
  const double radius = kTwoPi / (64.0 * std::max(n, 1));
  struct Hit {
    double x;
    double modulus;
    double lambda;
  };
  for (const auto& arc : p.J.arcs()) {
    std::vector<Hit> on;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      double l = lam(static_cast<Eigen::Index>(i));
      if (!(l > 0.0)) continue;
      double off = wrap_angle(cand[i].x - arc.a);
      if (off <= arc.length() + 1e-12) on.push_back({arc.a + off, cand[i].modulus, l});
    }
    std::sort(on.begin(), on.end(), [](const Hit& a, const Hit& b) { return a.x < b.x; });
    for (std::size_t i = 0; i < on.size();) {
      std::size_t j = i;
      Hit best = on[i];
      double sum = on[i].lambda;
      while (j + 1 < on.size() && on[j + 1].x - on[j].x <= radius) {
        ++j;
        sum += on[j].lambda;
        if (on[j].modulus > best.modulus) best = on[j];
      }
      cert.points.push_back(wrap_angle(best.x));
      cert.multipliers.push_back(sum);
      cert.multiplier_sum += sum;
      i = j + 1;
    }
  }
  const bool nonneg = std::all_of(cert.multipliers.begin(), cert.multipliers.end(), [](double l) { return l >= -1e-6; });
  cert.valid = nonneg && cert.points.size() <= 2 * static_cast<std::size_t>(n + 1) &&
               cert.multiplier_sum <= 2.0 * am.f_norm2 + 1e-6 && cert.residual <= 1e-6;
  return cert;
}

/// Exchange loop: solve the finitely constrained QP, add the maxima of |k_n| on J that
/// violate the bound, repeat until the largest violation is below opt.violation_tol.
inline PolySolution solve_fbep(const PolyProblem& problem, const PolyOptions& opt = {}) {
  problem.validate();
  const int n = problem.degree;
  const Eigen::MatrixXcd A = gram_matrix(problem.I, n).transpose();
  const ArcMoments am = arc_moments(problem.I, problem.f, n);
  const detail::RealQp qp = detail::real_form(A, am.mom);
  const std::size_t scan = std::max<std::size_t>(opt.scan_factor * static_cast<std::size_t>(n), 64);

  std::vector<double> pts = problem.constraint_points;
  PolySolution sol;
  sol.f_norm2 = am.f_norm2;
  for (std::size_t it = 0;; ++it) {
    if (it >= opt.max_exchange) {
      throw ConvergenceError("exchange loop did not terminate", sol.max_modulus - 1.0, it);
    }
    auto [xb, lb] = detail::barrier_qp(qp, pts, opt.barrier_gap);
    auto [x, lam] = detail::polish_active_set(qp, pts, xb, lb);
    sol.coeffs = detail::to_complex(x);
    auto peaks = detail::modulus_peaks(sol.coeffs, problem.J, scan);
    double maxmod = 0.0;
    for (const auto& pk : peaks) maxmod = std::max(maxmod, pk.modulus);
    sol.max_modulus = maxmod;
    sol.exchange_iterations = it + 1;
    if (maxmod <= 1.0 + opt.violation_tol) break;
    std::size_t added = 0;
    for (const auto& pk : peaks) {
      if (pk.modulus <= 1.0 + opt.add_tol) continue;
      bool dup = std::any_of(pts.begin(), pts.end(), [&](double y) { return std::abs(wrap_angle(y - pk.x + kPi) - kPi) < 1e-12; });
      if (!dup) {
        pts.push_back(pk.x);
        ++added;
      }
    }
    if (added == 0) throw ConvergenceError("exchange loop stalled", maxmod - 1.0, it + 1);
  }
  if (!sol.coeffs.allFinite()) throw ConvergenceError("QP subproblem failed", std::numeric_limits<double>::quiet_NaN(), 0);
  sol.constraint_points = pts;
  sol.primal = detail::objective(A, am.mom, am.f_norm2, sol.coeffs);
  PolyProblem solved = problem;
  solved.constraint_points = pts;
  KktCertificate cert = kkt_certificate(sol.coeffs, solved, opt);
  sol.active_points = cert.points;
  sol.multipliers = cert.multipliers;
  sol.multiplier_sum = cert.multiplier_sum;
  sol.stationarity_residual = cert.residual;
  sol.certificate_valid = cert.valid;
  return sol;
}

/// max |k_n| over `count` equispaced points of J.
inline double max_modulus_on(const Eigen::VectorXcd& c, const ArcSet& J, std::size_t count) {
  double m = 0.0;
  const double total = J.measure();
  for (const auto& arc : J.arcs()) {
    auto cells = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(static_cast<double>(count) * arc.length() / total)));
    for (std::size_t i = 0; i <= cells; ++i) {
      m = std::max(m, std::abs(poly_eval(c, arc.a + arc.length() * static_cast<double>(i) / static_cast<double>(cells))));
    }
  }
  return m;
}

struct ConvergenceRow {
  int degree = 0;
  double l2_circle = 0.0;  // ||k_n - g0||_{L2(T)}
  double l2_J = 0.0;       // ||k_n - g0||_{L2(J)}
  double primal = 0.0;
  bool certificate_valid = false;
};

/// Distance between k_n and the continuous solution on the grid.
inline std::pair<double, double> poly_distance(const Eigen::VectorXcd& c, const BepSolution& g0, const BepProblem& bp) {
  FourierSeries diff = g0.g0;
  for (Eigen::Index k = 0; k < c.size(); ++k) diff.data()[static_cast<std::size_t>(k)] -= c(k);
  return {diff.l2_norm(), norm_l2(fft_synthesize(diff), bp.wJ)};
}

/// Polynomial solutions for every degree against the continuous solution g0 of the same
/// (M = 1) problem. Degrees run in parallel; rows keep the input order.
inline std::vector<ConvergenceRow> convergence_study(const BepProblem& bp, const BepSolution& g0,
                                                     const std::vector<int>& degrees, const PolyOptions& opt = {}) {
  if (!bp.unit_bound()) throw InvalidArgument("convergence_study: normalize the problem to M = 1 first");
  return parallel_map(degrees.size(), [&](std::size_t i) {
    PolyProblem pp = PolyProblem::create(bp.I, bp.f, degrees[i]);
    PolySolution ps = solve_fbep(pp, opt);
    ConvergenceRow row;
    row.degree = degrees[i];
    auto [lt, lj] = poly_distance(ps.coeffs, g0, bp);
    row.l2_circle = lt;
    row.l2_J = lj;
    row.primal = ps.primal;
    row.certificate_valid = ps.certificate_valid;
    return row;
  });
}

}  // namespace bep
