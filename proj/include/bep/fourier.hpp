#pragma once

#include <algorithm>
#include <cmath>

#include "bep/arcs.hpp"
#include "bep/core.hpp"
#include "bep/fft.hpp"
#include "bep/grid.hpp"

namespace bep {

inline FourierSeries fft_analyze(const GridFunction& u) { return FourierSeries(detail::forward(u.values())); }

inline GridFunction fft_synthesize(const FourierSeries& s) {
  return GridFunction(Grid(s.size()), detail::backward(s.data()));
}

/// Keeps frequencies m >= 0.
inline FourierSeries project_plus(const FourierSeries& s) {
  FourierSeries out(s);
  auto& c = out.data();
  std::fill(c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2), c.end(), cplx{});
  return out;
}

/// Keeps frequencies m < 0.
inline FourierSeries project_minus(const FourierSeries& s) {
  FourierSeries out(s);
  auto& c = out.data();
  std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2), cplx{});
  return out;
}

inline GridFunction project_plus(const GridFunction& u) { return fft_synthesize(project_plus(fft_analyze(u))); }
inline GridFunction project_minus(const GridFunction& u) { return fft_synthesize(project_minus(fft_analyze(u))); }

/// Harmonic conjugate: multiplier -i sign(m). The Nyquist mode has no real partner and is dropped.
inline GridFunction conjugate_function(const GridFunction& h) {
  if (!h.is_real()) throw InvalidArgument("conjugate_function: input is not real-valued");
  FourierSeries s = fft_analyze(h);
  auto& c = s.data();
  const std::size_t n = c.size();
  c[0] = 0.0;
  c[n / 2] = 0.0;
  for (std::size_t i = 1; i < n / 2; ++i) c[i] *= -kI;
  for (std::size_t i = n / 2 + 1; i < n; ++i) c[i] *= kI;
  GridFunction out = fft_synthesize(s);
  for (auto& v : out.values()) v = v.real();
  return out;
}

inline double mean(const GridFunction& u) {
  double s = 0.0;
  for (const auto& v : u.values()) s += v.real();
  return s / static_cast<double>(u.size());
}

/// (1/n) sum_k w_k u_k conj(v_k): the weighted rectangle rule for (1/2pi) int u conj(v).
inline cplx inner_product(const GridFunction& u, const GridFunction& v, const RVector& w) {
  require_same_grid(u.grid(), v.grid(), "inner_product");
  if (w.size() != u.size()) throw InvalidArgument("inner_product: weight length mismatch");
  cplx s{};
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (w[k] != 0.0) s += w[k] * u[k] * std::conj(v[k]);
  }
  return s / static_cast<double>(u.size());
}

inline cplx inner_product(const GridFunction& u, const GridFunction& v, const ArcSet& e) {
  if (e.empty()) throw InvalidArgument("inner_product: empty arc set");
  return inner_product(u, v, e.weights(u.grid()));
}

/// Full circle.
inline cplx inner_product(const GridFunction& u, const GridFunction& v) {
  return inner_product(u, v, RVector(u.size(), 1.0));
}

inline double norm_l2(const GridFunction& u, const RVector& w) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += w[k] * std::norm(u[k]);
  return std::sqrt(s / static_cast<double>(u.size()));
}

inline double norm_l2(const GridFunction& u, const ArcSet& e) {
  if (e.empty()) throw InvalidArgument("norm_l2: empty arc set");
  return norm_l2(u, e.weights(u.grid()));
}

inline double norm_l2(const GridFunction& u) { return norm_l2(u, RVector(u.size(), 1.0)); }

inline double norm_sup(const GridFunction& u, const RVector& w) {
  double m = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (w[k] > 0.0) {
      m = std::max(m, std::abs(u[k]));
      any = true;
    }
  }
  if (!any) throw InvalidArgument("norm_sup: no grid point in the set");
  return m;
}

inline double norm_sup(const GridFunction& u, const ArcSet& e) {
  if (e.empty()) throw InvalidArgument("norm_sup: empty arc set");
  return norm_sup(u, e.weights(u.grid()));
}

inline double norm_sup(const GridFunction& u) { return norm_sup(u, RVector(u.size(), 1.0)); }

/// L^p norm over the weighted grid set, normalized measure.
inline double norm_lp(const GridFunction& u, const RVector& w, double p) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += w[k] * std::pow(std::abs(u[k]), p);
  return std::pow(s / static_cast<double>(u.size()), 1.0 / p);
}

}  // namespace bep
