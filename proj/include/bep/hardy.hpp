#pragma once

#include <cmath>
#include <optional>

#include "bep/arcs.hpp"
#include "bep/core.hpp"
#include "bep/fourier.hpp"
#include "bep/grid.hpp"
#include "bep/quadrature.hpp"

namespace bep {

inline constexpr double kModulusFloor = 1e-8;
inline constexpr double kDiskMargin = 1e-6;

inline void require_inside_disk(cplx z, const char* where) {
  if (!(std::abs(z) <= 1.0 - kDiskMargin)) {
    throw InvalidArgument(std::string(where) + ": evaluation point too close to the unit circle");
  }
}

/// (1/2pi) int (e^{it}+z)/(e^{it}-z) h(t) dt by the grid rectangle rule.
inline CVector riesz_herglotz(const GridFunction& h, const CVector& zs) {
  if (!h.is_real()) throw InvalidArgument("riesz_herglotz: density is not real-valued");
  for (const auto& z : zs) require_inside_disk(z, "riesz_herglotz");
  const Grid& g = h.grid();
  CVector out(zs.size());
  for (std::size_t j = 0; j < zs.size(); ++j) {
    cplx s{};
    for (std::size_t k = 0; k < g.size(); ++k) {
      cplx xi = g.point(k);
      s += (xi + zs[j]) / (xi - zs[j]) * h[k].real();
    }
    out[j] = s / static_cast<double>(g.size());
  }
  return out;
}

/// Outer function exp(u + i u~) determined by the boundary log-modulus u.
class OuterFunction {
 public:
  explicit OuterFunction(GridFunction log_modulus)
      : log_modulus_(std::move(log_modulus)), conjugate_(conjugate_function(log_modulus_)) {
    FourierSeries s = fft_analyze(log_modulus_);
    const std::size_t n = s.size();
    analytic_log_ = FourierSeries(n);
    analytic_log_.data()[0] = s.data()[0].real();
    for (std::size_t i = 1; i < n / 2; ++i) analytic_log_.data()[i] = 2.0 * s.data()[i];
  }

  const Grid& grid() const noexcept { return log_modulus_.grid(); }
  const GridFunction& log_modulus() const noexcept { return log_modulus_; }
  const FourierSeries& analytic_log() const noexcept { return analytic_log_; }

  /// Boundary values exp(u + i u~) on the grid.
  GridFunction trace() const { return exp_trace(1.0); }
  /// Boundary values of 1/w.
  GridFunction inverse_trace() const { return exp_trace(-1.0); }

  /// Boundary values restricted to a coarser grid whose size divides this one.
  GridFunction trace_on(const Grid& coarse, double power = 1.0) const {
    const std::size_t n = grid().size();
    if (coarse.size() > n || n % coarse.size() != 0) throw InvalidArgument("OuterFunction: incompatible grid");
    GridFunction full = exp_trace(power);
    const std::size_t r = n / coarse.size();
    CVector v(coarse.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = full[k * r];
    return {coarse, std::move(v)};
  }

  /// w(0) = exp(mean u), real and positive.
  double value_at_origin() const { return std::exp(mean(log_modulus_)); }

  CVector operator()(const CVector& zs) const {
    CVector logs = riesz_herglotz(log_modulus_, zs);
    for (auto& v : logs) v = std::exp(v);
    return logs;
  }
  cplx operator()(cplx z) const { return (*this)(CVector{z})[0]; }

 private:
  GridFunction exp_trace(double power) const {
    CVector v(grid().size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = std::exp(power * cplx(log_modulus_[k].real(), conjugate_[k].real()));
    }
    return {grid(), std::move(v)};
  }

  GridFunction log_modulus_;
  GridFunction conjugate_;
  FourierSeries analytic_log_{8};
};

/// Outer function with |w| = rho on the circle; rho is floored at kModulusFloor first.
inline OuterFunction outer_from_modulus(const GridFunction& rho, double floor = kModulusFloor) {
  if (!rho.is_real()) throw InvalidArgument("outer_from_modulus: modulus is not real-valued");
  CVector logs(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    double r = rho[k].real();
    if (!std::isfinite(r) || r < 0.0) {
      throw InvalidArgument("outer_from_modulus: modulus must be finite and non-negative");
    }
    logs[k] = std::log(std::max(r, floor));
  }
  return OuterFunction(GridFunction(rho.grid(), std::move(logs)));
}

/// Outer function with modulus 1 on I and rho on J = complement of I, built on a grid
/// `oversample` times finer than rho's grid. rho is read only on J and interpolated
/// there; the log-modulus at the snapped endpoints is weighted by the J membership.
inline OuterFunction concatenated_outer(const ArcSet& I, const GridFunction& rho, std::size_t oversample = 4,
                                        double floor = kModulusFloor) {
  const Grid& coarse = rho.grid();
  const ArcSet Is = I.snapped(coarse);
  const ArcSet J = Is.complement();
  CVector logrho(coarse.size());
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    double r = rho[k].real();
    if (!std::isfinite(r) || r < 0.0) throw InvalidArgument("concatenated_outer: modulus must be non-negative");
    logrho[k] = std::log(std::max(r, floor));
  }
  const Grid fine(coarse.size() * oversample);
  const RVector wJ = J.weights(fine);
  const ArcSampler sampler(GridFunction(coarse, std::move(logrho)), J);
  CVector u(fine.size());
  for (std::size_t k = 0; k < fine.size(); ++k) {
    if (wJ[k] > 0.0) u[k] = wJ[k] * sampler(fine.theta(k)).real();
  }
  return OuterFunction(GridFunction(fine, std::move(u)));
}

/// Finite Blaschke product c z^k prod_l (|a_l|/a_l) (a_l - z)/(1 - conj(a_l) z).
class BlaschkeProduct {
 public:
  BlaschkeProduct(std::vector<cplx> zeros, cplx unimodular = 1.0, unsigned order_at_origin = 0)
      : constant_(unimodular), order_(order_at_origin) {
    if (std::abs(std::abs(unimodular) - 1.0) > 1e-12) throw InvalidArgument("BlaschkeProduct: constant must be unimodular");
    for (const auto& a : zeros) {
      if (!(std::abs(a) < 1.0)) throw InvalidArgument("BlaschkeProduct: zeros must lie in the open disk");
      if (a == cplx{}) {
        ++order_;
      } else {
        zeros_.push_back(a);
      }
    }
  }

  const std::vector<cplx>& zeros() const noexcept { return zeros_; }
  cplx unimodular_constant() const noexcept { return constant_; }
  unsigned order_at_origin() const noexcept { return order_; }

  cplx operator()(cplx z) const {
    cplx v = constant_ * std::pow(z, static_cast<int>(order_));
    for (const auto& a : zeros_) {
      cplx den = 1.0 - std::conj(a) * z;
      if (std::abs(den) < 1e-14) throw InvalidArgument("BlaschkeProduct: evaluation at a pole");
      v *= (std::abs(a) / a) * (a - z) / den;
    }
    return v;
  }

  GridFunction trace(const Grid& grid) const {
    return GridFunction::sample(grid, [this](double t) { return (*this)(std::polar(1.0, t)); });
  }

 private:
  std::vector<cplx> zeros_;
  cplx constant_;
  unsigned order_;
};

inline cplx blaschke_eval(const BlaschkeProduct& b, cplx z) { return b(z); }

inline void require_analytic(const FourierSeries& g, const char* where) {
  if (!g.is_analytic(1e-12)) throw InvalidArgument(std::string(where) + ": series has negative frequencies");
}

/// Power series sum_m c_m z^m of an analytic series.
inline CVector eval_disk(const FourierSeries& g, const CVector& zs) {
  require_analytic(g, "eval_disk");
  for (const auto& z : zs) require_inside_disk(z, "eval_disk");
  const auto& c = g.data();
  const std::size_t top = c.size() / 2;
  CVector out(zs.size());
  for (std::size_t j = 0; j < zs.size(); ++j) {
    cplx acc{};
    for (std::size_t m = top; m-- > 0;) acc = acc * zs[j] + c[m];
    out[j] = acc;
  }
  return out;
}

inline cplx eval_disk(const FourierSeries& g, cplx z) { return eval_disk(g, CVector{z})[0]; }

/// (1/2pi i) int g(xi)/(xi - z) dxi by the grid rectangle rule.
inline CVector cauchy_integral(const GridFunction& g, const CVector& zs) {
  for (const auto& z : zs) require_inside_disk(z, "cauchy_integral");
  const Grid& grid = g.grid();
  CVector out(zs.size());
  for (std::size_t j = 0; j < zs.size(); ++j) {
    cplx s{};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      cplx xi = grid.point(k);
      s += g[k] * xi / (xi - zs[j]);
    }
    out[j] = s / static_cast<double>(grid.size());
  }
  return out;
}

}  // namespace bep
