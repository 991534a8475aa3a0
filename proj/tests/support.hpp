#pragma once

#include <cmath>
#include <random>

#include "bep/bep.hpp"

namespace bep::testing {

inline ArcSet upper_half() { return ArcSet({{0.0, kPi}}); }

/// Real trigonometric polynomial with random coefficients decaying like 1/k^2.
inline GridFunction random_real_trig(const Grid& grid, int degree, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  std::vector<double> a(degree + 1), b(degree + 1);
  for (int k = 0; k <= degree; ++k) {
    a[k] = nd(rng) / (1.0 + k * k);
    b[k] = nd(rng) / (1.0 + k * k);
  }
  return GridFunction::sample(grid, [&](double t) {
    double s = a[0];
    for (int k = 1; k <= degree; ++k) s += a[k] * std::cos(k * t) + b[k] * std::sin(k * t);
    return cplx(s);
  });
}

/// Random analytic trigonometric polynomial of the given degree.
inline FourierSeries random_analytic(std::size_t n, int degree, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  FourierSeries s(n);
  for (int k = 0; k <= degree; ++k) s[k] = cplx(nd(rng), nd(rng)) / (1.0 + k);
  return s;
}

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto e = [](double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; };
  return e(x) / (e(x) + e(1.0 - x));
}

/// exp(amp * bump(theta) * sin(2 s + phase)) on the lower half circle (s = theta - pi),
/// with a C-infinity bump equal to 0 near its endpoints; 1 on the upper half. For
/// |amp| <= log 10 the values stay in [0.1, 10].
inline GridFunction smooth_mu(const Grid& grid, double amp, double phase) {
  return GridFunction::sample(grid, [=](double t) {
    if (t <= kPi) return cplx(1.0);
    double s = t - kPi;
    double w = smooth_step(s / 0.6) * smooth_step((kPi - s) / 0.6);
    return cplx(std::exp(amp * w * std::sin(2.0 * s + phase)));
  });
}

/// Smooth data on the upper half circle vanishing to all orders at its endpoints.
inline GridFunction smooth_data(const Grid& grid, cplx c0, cplx c1) {
  return GridFunction::sample(grid, [=](double t) {
    if (t >= kPi) return cplx{};
    double w = smooth_step(t / 0.5) * smooth_step((kPi - t) / 0.5);
    return w * (c0 + c1 * std::polar(1.0, t));
  });
}

}  // namespace bep::testing
