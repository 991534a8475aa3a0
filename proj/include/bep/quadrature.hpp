#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include "bep/arcs.hpp"
#include "bep/core.hpp"
#include "bep/grid.hpp"

namespace bep {

struct QuadNode {
  double x;
  double w;
};

/// Gauss-Legendre rule with N nodes on [-1, 1]; boost stores only the non-negative half.
template <unsigned N>
std::vector<QuadNode> gauss_legendre() {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  std::vector<QuadNode> nodes;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    nodes.push_back({xs[i], ws[i]});
    if (xs[i] != 0.0) nodes.push_back({-xs[i], ws[i]});
  }
  std::sort(nodes.begin(), nodes.end(), [](const QuadNode& a, const QuadNode& b) { return a.x < b.x; });
  return nodes;
}

/// Evaluates grid data between grid points of a snapped arc by local Lagrange
/// interpolation that only uses samples lying on the arc itself.
class ArcSampler {
 public:
  static constexpr std::size_t kDegree = 11;

  ArcSampler(const GridFunction& u, const ArcSet& set) : u_(u), set_(set), arcs_(set.grid_arcs(u.grid())) {}

  const ArcSet& set() const noexcept { return set_; }

  /// Value at theta = arc.a + offset, 0 <= offset <= arc length, for arc number `arc`.
  cplx at_offset(std::size_t arc, double offset) const {
    const GridArc& ga = arcs_.at(arc);
    const double h = u_.grid().step();
    const std::size_t n = u_.size();
    const std::size_t deg = std::min(kDegree, ga.cells);
    const double s = offset / h;
    auto cell = static_cast<long long>(std::floor(s));
    long long start = cell - static_cast<long long>(deg / 2);
    start = std::clamp(start, 0LL, static_cast<long long>(ga.cells - deg));
    std::array<double, kDegree + 1> xs{};
    for (std::size_t i = 0; i <= deg; ++i) xs[i] = static_cast<double>(start) + static_cast<double>(i);
    cplx sum{};
    for (std::size_t i = 0; i <= deg; ++i) {
      if (s == xs[i]) return u_[(ga.first + static_cast<std::size_t>(xs[i])) % n];
    }
    for (std::size_t i = 0; i <= deg; ++i) {
      double li = 1.0;
      for (std::size_t m = 0; m <= deg; ++m) {
        if (m != i) li *= (s - xs[m]) / (xs[i] - xs[m]);
      }
      sum += li * u_[(ga.first + static_cast<std::size_t>(xs[i])) % n];
    }
    return sum;
  }

  /// Value at an angle lying on the set.
  cplx operator()(double theta) const {
    const auto& arcs = set_.arcs();
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      double off = wrap_angle(theta - arcs[i].a);
      if (off <= arcs[i].length() + 1e-12) return at_offset(i, std::min(off, arcs[i].length()));
    }
    throw InvalidArgument("ArcSampler: angle outside the arc set");
  }

 private:
  GridFunction u_;
  ArcSet set_;
  std::vector<GridArc> arcs_;
};

/// (1/2pi) int_E fn(theta) dtheta by 8-point Gauss-Legendre on every grid cell of the
/// snapped set E; fn receives (arc index, offset from the arc start, theta).
template <typename Fn>
cplx integrate_over_cells(const Grid& grid, const ArcSet& e, Fn&& fn) {
  static const auto rule = gauss_legendre<8>();
  const double h = grid.step();
  cplx total{};
  const auto& arcs = e.arcs();
  const auto gas = e.grid_arcs(grid);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    for (std::size_t c = 0; c < gas[i].cells; ++c) {
      cplx cell{};
      for (const auto& q : rule) {
        double off = h * (static_cast<double>(c) + 0.5 * (q.x + 1.0));
        cell += q.w * fn(i, off, arcs[i].a + off);
      }
      total += 0.5 * h * cell;
    }
  }
  return total / kTwoPi;
}

}  // namespace bep
