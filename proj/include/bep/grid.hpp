#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <span>

#include "bep/core.hpp"

namespace bep {

/// Uniform grid theta_k = 2 pi k / n on the unit circle, n a power of two >= 8.
class Grid {
 public:
  explicit Grid(std::size_t n) : n_(n) {
    if (n < 8 || !std::has_single_bit(n)) {
      throw InvalidArgument("grid size must be a power of two >= 8, got " + std::to_string(n));
    }
  }

  std::size_t size() const noexcept { return n_; }
  double step() const noexcept { return kTwoPi / static_cast<double>(n_); }
  double theta(std::size_t k) const noexcept { return step() * static_cast<double>(k); }
  cplx point(std::size_t k) const noexcept { return std::polar(1.0, theta(k)); }

  /// Index of the grid point nearest to theta (mod 2pi).
  std::size_t nearest_index(double theta) const {
    auto k = static_cast<long long>(std::llround(wrap_angle(theta) / step()));
    return static_cast<std::size_t>(k % static_cast<long long>(n_));
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) {
    throw InvalidArgument(std::string(where) + ": grid mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
}

/// Complex samples on a Grid. Real-valued data is stored with zero imaginary part.
class GridFunction {
 public:
  explicit GridFunction(Grid grid) : grid_(grid), values_(grid.size()) {}

  GridFunction(Grid grid, CVector values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw InvalidArgument("GridFunction: " + std::to_string(values_.size()) +
                            " samples for a grid of " + std::to_string(grid_.size()));
    }
  }

  static GridFunction real(Grid grid, std::span<const double> values) {
    if (values.size() != grid.size()) throw InvalidArgument("GridFunction::real: size mismatch");
    CVector v(values.begin(), values.end());
    return {grid, std::move(v)};
  }

  static GridFunction constant(Grid grid, cplx c) { return {grid, CVector(grid.size(), c)}; }

  static GridFunction sample(Grid grid, const std::function<cplx(double)>& fn) {
    CVector v(grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(grid.theta(k));
    return {grid, std::move(v)};
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  const CVector& values() const noexcept { return values_; }
  CVector& values() noexcept { return values_; }
  const cplx& operator[](std::size_t k) const { return values_[k]; }
  cplx& operator[](std::size_t k) { return values_[k]; }

  bool is_real(double tol = 1e-12) const {
    return std::all_of(values_.begin(), values_.end(),
                       [tol](const cplx& v) { return std::abs(v.imag()) <= tol; });
  }

  RVector real_part() const {
    RVector r(values_.size());
    std::transform(values_.begin(), values_.end(), r.begin(), [](const cplx& v) { return v.real(); });
    return r;
  }

  RVector modulus() const {
    RVector r(values_.size());
    std::transform(values_.begin(), values_.end(), r.begin(), [](const cplx& v) { return std::abs(v); });
    return r;
  }

  GridFunction& operator+=(const GridFunction& o) {
    require_same_grid(grid_, o.grid_, "GridFunction +=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    require_same_grid(grid_, o.grid_, "GridFunction -=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  GridFunction& operator*=(const GridFunction& o) {
    require_same_grid(grid_, o.grid_, "GridFunction *=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] *= o.values_[k];
    return *this;
  }
  GridFunction& operator*=(cplx s) {
    for (auto& v : values_) v *= s;
    return *this;
  }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(GridFunction a, const GridFunction& b) { return a *= b; }
  friend GridFunction operator*(cplx s, GridFunction a) { return a *= s; }

 private:
  Grid grid_;
  CVector values_;
};

/// Discrete Fourier coefficients c_m, m in [-n/2, n/2 - 1], with
/// u(theta_k) = sum_m c_m e^{i m theta_k}. Stored in FFT order.
class FourierSeries {
 public:
  explicit FourierSeries(std::size_t n) : coeffs_(n) { (void)Grid(n); }
  explicit FourierSeries(CVector fft_ordered) : coeffs_(std::move(fft_ordered)) {
    (void)Grid(coeffs_.size());
  }

  std::size_t size() const noexcept { return coeffs_.size(); }
  int min_frequency() const noexcept { return -static_cast<int>(coeffs_.size() / 2); }
  int max_frequency() const noexcept { return static_cast<int>(coeffs_.size() / 2) - 1; }

  std::size_t index(int m) const {
    if (m < min_frequency() || m > max_frequency()) {
      throw InvalidArgument("frequency " + std::to_string(m) + " out of range");
    }
    return m >= 0 ? static_cast<std::size_t>(m) : coeffs_.size() - static_cast<std::size_t>(-m);
  }
  int frequency(std::size_t idx) const noexcept {
    return idx < coeffs_.size() / 2 ? static_cast<int>(idx)
                                    : static_cast<int>(idx) - static_cast<int>(coeffs_.size());
  }

  cplx operator[](int m) const { return coeffs_[index(m)]; }
  cplx& operator[](int m) { return coeffs_[index(m)]; }

  const CVector& data() const noexcept { return coeffs_; }
  CVector& data() noexcept { return coeffs_; }

  /// True when every coefficient of negative frequency is below tol * max |c|.
  bool is_analytic(double tol = 0.0) const {
    double scale = 0.0;
    for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
    for (std::size_t i = coeffs_.size() / 2; i < coeffs_.size(); ++i) {
      if (std::abs(coeffs_[i]) > tol * scale) return false;
    }
    return true;
  }

  /// Zeroes every coefficient outside [-d, d].
  FourierSeries truncated(int d) const {
    FourierSeries out(*this);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (std::abs(frequency(i)) > d) out.coeffs_[i] = 0.0;
    }
    return out;
  }

  /// sqrt(sum |c_m|^2), the L2(T) norm under the normalized measure.
  double l2_norm() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return std::sqrt(s);
  }

  FourierSeries& operator+=(const FourierSeries& o) {
    check(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  FourierSeries& operator-=(const FourierSeries& o) {
    check(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  FourierSeries& operator*=(cplx s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend FourierSeries operator+(FourierSeries a, const FourierSeries& b) { return a += b; }
  friend FourierSeries operator-(FourierSeries a, const FourierSeries& b) { return a -= b; }
  friend FourierSeries operator*(cplx s, FourierSeries a) { return a *= s; }

 private:
  void check(const FourierSeries& o) const {
    if (o.size() != size()) throw InvalidArgument("FourierSeries: length mismatch");
  }
  CVector coeffs_;
};

}  // namespace bep
