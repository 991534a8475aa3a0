#pragma once

#include <cmath>

#include "bep/arcs.hpp"
#include "bep/core.hpp"
#include "bep/grid.hpp"
#include "bep/hardy.hpp"
#include "bep/quadrature.hpp"

namespace bep {

/// Outer function phi with log|phi| = s on I and 0 on J. The Herglotz transform of the
/// indicator of an arc has a closed form, used for all evaluations.
class QuenchingFunction {
 public:
  QuenchingFunction(ArcSet I, double strength) : I_(std::move(I)), s_(strength) {
    if (!(strength > 0.0) || !std::isfinite(strength)) throw InvalidArgument("quenching strength must be positive");
    if (I_.empty()) throw InvalidArgument("quenching function needs a non-empty arc set");
  }

  const ArcSet& arcs() const noexcept { return I_; }
  double strength() const noexcept { return s_; }

  /// log phi(z) for |z| < 1.
  cplx log_value(cplx z) const {
    require_inside_disk(z, "QuenchingFunction");
    cplx out{};
    for (const auto& arc : I_.arcs()) {
      cplx ratio = (std::polar(1.0, arc.b) - z) / (std::polar(1.0, arc.a) - z);
      double delta = wrap_angle(std::arg(ratio));
      out += s_ / kTwoPi * cplx(-arc.length() + 2.0 * delta, -2.0 * std::log(std::abs(ratio)));
    }
    return out;
  }
  cplx operator()(cplx z) const { return std::exp(log_value(z)); }

  /// Boundary value of log phi at a point of arc `arc`, given by its distance t > 0 to the
  /// start (from_start) or to the end of that arc. Carrying t avoids cancellation near
  /// the endpoints, where the imaginary part is log-singular.
  cplx boundary_log(std::size_t arc, double t, bool from_start) const {
    const auto& arcs = I_.arcs();
    const Arc& own = arcs.at(arc);
    const double theta = from_start ? own.a + t : own.b - t;
    double im = 0.0;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      double num, den;
      if (k == arc) {
        double near = std::sin(0.5 * t);
        double far = std::sin(0.5 * (own.length() - t));
        num = from_start ? far : near;
        den = from_start ? near : far;
      } else {
        num = std::abs(std::sin(0.5 * (arcs[k].b - theta)));
        den = std::abs(std::sin(0.5 * (arcs[k].a - theta)));
      }
      im -= s_ / kPi * std::log(num / den);
    }
    return {s_, im};
  }

  /// Grid-based representative (log-modulus s times the membership weights of I).
  OuterFunction outer(const Grid& grid) const {
    const RVector w = I_.weights(grid);
    CVector u(grid.size());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = s_ * w[k];
    return OuterFunction(GridFunction(grid, std::move(u)));
  }

 private:
  ArcSet I_;
  double s_;
};

inline QuenchingFunction quenching_function(const ArcSet& I, double strength) { return {I, strength}; }

enum class RecoveryQuadrature { graded, grid };

namespace detail {

struct RecoveryNode {
  double weight;  // dtheta weight, 2pi normalization not included
  cplx xi;
  cplx log_phi;
  cplx f;
};

/// Nodes clustered geometrically at both ends of every arc: t = L e^{-v}, v in [0, 90],
/// 20-point Gauss panels of width 0.25 in v.
inline std::vector<RecoveryNode> graded_nodes(const QuenchingFunction& phi, const ArcSampler& f) {
  static const auto rule = gauss_legendre<20>();
  constexpr double kVMax = 90.0;
  constexpr double kPanel = 0.25;
  std::vector<RecoveryNode> nodes;
  const auto& arcs = phi.arcs().arcs();
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const double len = arcs[i].length();
    const double half = 0.5 * len;
    for (double lo = 0.0; lo < kVMax - 1e-12; lo += kPanel) {
      for (const auto& q : rule) {
        const double v = lo + 0.5 * kPanel * (q.x + 1.0);
        const double t = half * std::exp(-v);
        const double w = 0.5 * kPanel * q.w * t;
        for (bool from_start : {true, false}) {
          const double theta = from_start ? arcs[i].a + t : arcs[i].b - t;
          const double off = from_start ? t : len - t;
          nodes.push_back({w, std::polar(1.0, theta), phi.boundary_log(i, t, from_start), f.at_offset(i, off)});
        }
      }
    }
  }
  return nodes;
}

}  // namespace detail

/// f_n(z) = (1/2pi i) int_I (phi(xi)/phi(z))^n f(xi)/(xi - z) dxi for n = 1..n_max.
/// The graded rule evaluates phi in closed form and interpolates f between grid samples;
/// the grid rule uses the rectangle rule on the grid and the FFT conjugate for arg phi.
inline CVector recover_sequence(const GridFunction& f_on_I, const QuenchingFunction& phi, cplx z, int n_max,
                                RecoveryQuadrature quad = RecoveryQuadrature::graded) {
  if (!(std::abs(z) <= 0.99)) throw InvalidArgument("recover_sequence: |z| must be at most 0.99");
  if (n_max < 1) throw InvalidArgument("recover_sequence: n_max must be at least 1");
  const Grid& grid = f_on_I.grid();
  if (!phi.arcs().is_snapped(grid)) throw InvalidArgument("recover_sequence: arcs are not snapped to the data grid");

  std::vector<detail::RecoveryNode> nodes;
  cplx log_phi_z;
  if (quad == RecoveryQuadrature::graded) {
    nodes = detail::graded_nodes(phi, ArcSampler(f_on_I, phi.arcs()));
    log_phi_z = phi.log_value(z);
  } else {
    const OuterFunction w = phi.outer(grid);
    const RVector wI = phi.arcs().weights(grid);
    const GridFunction& u = w.log_modulus();
    const GridFunction ut = conjugate_function(u);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (wI[k] == 0.0) continue;
      nodes.push_back({wI[k] * grid.step(), grid.point(k), cplx(u[k].real(), ut[k].real()), f_on_I[k]});
    }
    log_phi_z = riesz_herglotz(u, {z})[0];
  }

  CVector out(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    cplx s{};
    for (const auto& nd : nodes) {
      s += nd.weight * std::exp(static_cast<double>(n) * (nd.log_phi - log_phi_z)) * nd.f * nd.xi / (nd.xi - z);
    }
    out[static_cast<std::size_t>(n - 1)] = s / kTwoPi;
  }
  return out;
}

}  // namespace bep
