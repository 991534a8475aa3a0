#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "bep/core.hpp"
#include "bep/grid.hpp"

namespace bep {

/// Closed circle arc from angle a counter-clockwise to angle b, with 0 <= a < 2pi and
/// a < b < a + 2pi (b is left unwrapped when the arc crosses angle 0).
struct Arc {
  double a = 0.0;
  double b = 0.0;

  double length() const noexcept { return b - a; }
  bool contains(double theta) const noexcept {
    double u = wrap_angle(theta - a);
    return u <= length() || std::abs(u - kTwoPi) < 1e-15;
  }
};

/// Grid-index form of an arc whose endpoints sit on grid points: indices
/// first, first+1, ..., first+cells (mod n).
struct GridArc {
  std::size_t first = 0;
  std::size_t cells = 0;
};

/// Finite union of pairwise-disjoint closed arcs.
class ArcSet {
 public:
  ArcSet() = default;

  explicit ArcSet(std::vector<Arc> arcs) {
    for (auto& arc : arcs) {
      if (!std::isfinite(arc.a) || !std::isfinite(arc.b)) throw InvalidArgument("arc endpoints must be finite");
      double len = arc.b - arc.a;
      if (!(len > 0.0)) throw InvalidArgument("arc must have positive length");
      if (len >= kTwoPi) throw InvalidArgument("arc must be shorter than the full circle");
      arc.a = wrap_angle(arc.a);
      arc.b = arc.a + len;
    }
    std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) { return x.a < y.a; });
    // Merge arcs that touch; reject overlaps.
    std::vector<Arc> merged;
    for (const auto& arc : arcs) {
      if (!merged.empty()) {
        Arc& last = merged.back();
        if (arc.a < last.b - 1e-14) throw InvalidArgument("arcs overlap");
        if (arc.a <= last.b + 1e-14) {
          last.b = std::max(last.b, arc.b);
          continue;
        }
      }
      merged.push_back(arc);
    }
    if (merged.size() > 1) {
      Arc& last = merged.back();
      Arc& first = merged.front();
      if (last.b > first.a + kTwoPi + 1e-14) throw InvalidArgument("arcs overlap");
      if (last.b >= first.a + kTwoPi - 1e-14) {
        last.b = first.b + kTwoPi;
        merged.erase(merged.begin());
      }
    }
    double total = 0.0;
    for (const auto& arc : merged) total += arc.length();
    if (total >= kTwoPi - 1e-14) throw InvalidArgument("arc set covers the whole circle");
    arcs_ = std::move(merged);
  }

  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  bool empty() const noexcept { return arcs_.empty(); }

  /// Total length in radians.
  double measure() const noexcept {
    double total = 0.0;
    for (const auto& arc : arcs_) total += arc.length();
    return total;
  }
  /// Length under the normalized measure (full circle = 1).
  double normalized_measure() const noexcept { return measure() / kTwoPi; }

  bool contains(double theta) const noexcept {
    return std::any_of(arcs_.begin(), arcs_.end(), [theta](const Arc& arc) { return arc.contains(theta); });
  }

  /// Closure of the circle minus this set.
  ArcSet complement() const {
    if (arcs_.empty()) throw InvalidArgument("complement of the empty arc set is the full circle");
    std::vector<Arc> gaps;
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
      const Arc& cur = arcs_[i];
      const Arc& next = arcs_[(i + 1) % arcs_.size()];
      double start = cur.b;
      double stop = (i + 1 < arcs_.size()) ? next.a : next.a + kTwoPi;
      gaps.push_back({start, stop});
    }
    return ArcSet(std::move(gaps));
  }

  /// Same arcs with endpoints moved to the nearest grid angles.
  ArcSet snapped(const Grid& grid) const {
    std::vector<Arc> out;
    for (const auto& arc : arcs_) {
      double h = grid.step();
      double a = std::round(arc.a / h) * h;
      double b = std::round(arc.b / h) * h;
      if (b - a < 0.5 * h) {
        throw InvalidArgument("arc shorter than one grid cell collapses when snapped");
      }
      out.push_back({a, b});
    }
    return ArcSet(std::move(out));
  }

  bool is_snapped(const Grid& grid) const {
    double h = grid.step();
    return std::all_of(arcs_.begin(), arcs_.end(), [h](const Arc& arc) {
      return std::abs(arc.a / h - std::round(arc.a / h)) < 1e-9 &&
             std::abs(arc.b / h - std::round(arc.b / h)) < 1e-9;
    });
  }

  /// Index form of every arc; the set must already be snapped to this grid.
  std::vector<GridArc> grid_arcs(const Grid& grid) const {
    if (!is_snapped(grid)) throw InvalidArgument("arc set is not snapped to the grid");
    std::vector<GridArc> out;
    double h = grid.step();
    for (const auto& arc : arcs_) {
      auto first = static_cast<long long>(std::llround(arc.a / h));
      auto last = static_cast<long long>(std::llround(arc.b / h));
      out.push_back({static_cast<std::size_t>(first % static_cast<long long>(grid.size())),
                     static_cast<std::size_t>(last - first)});
    }
    return out;
  }

  /// Quadrature weights of the set on the grid: 1 strictly inside, 1/2 at the snapped
  /// endpoints, 0 outside. The set is snapped first.
  RVector weights(const Grid& grid) const {
    RVector w(grid.size(), 0.0);
    const ArcSet s = is_snapped(grid) ? *this : snapped(grid);
    for (const auto& ga : s.grid_arcs(grid)) {
      for (std::size_t j = 0; j <= ga.cells; ++j) {
        std::size_t k = (ga.first + j) % grid.size();
        w[k] += (j == 0 || j == ga.cells) ? 0.5 : 1.0;
      }
    }
    return w;
  }

  /// Mask of grid points lying in the set at index distance >= cells from every endpoint.
  std::vector<bool> interior_mask(const Grid& grid, std::size_t cells) const {
    std::vector<bool> mask(grid.size(), false);
    const ArcSet s = is_snapped(grid) ? *this : snapped(grid);
    for (const auto& ga : s.grid_arcs(grid)) {
      for (std::size_t j = cells; j + cells <= ga.cells; ++j) mask[(ga.first + j) % grid.size()] = true;
    }
    return mask;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
      os << (i ? ", " : "") << '[' << arcs_[i].a << ", " << arcs_[i].b << ']';
    }
    os << '}';
    return os.str();
  }

 private:
  std::vector<Arc> arcs_;
};

}  // namespace bep
