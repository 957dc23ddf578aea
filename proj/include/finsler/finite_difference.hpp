#pragma once

#include <cmath>

namespace finsler::fd {

// Default step for the finite-difference fallback paths.
inline constexpr double kDefaultStep = 1e-4;

/// Richardson-extrapolated central difference of fn along the scalar parameter t at t = 0.
/// fn may return double or any Eigen type supporting linear combinations.
template <class Fn>
auto central_derivative(Fn&& fn, double step) {
  auto central = [&](double h) { return decltype(fn(0.0))((fn(h) - fn(-h)) / (2.0 * h)); };
  auto coarse = central(step);
  auto fine = central(0.5 * step);
  return decltype(coarse)((4.0 * fine - coarse) / 3.0);
}

/// Richardson-extrapolated second derivative d^2/dt ds of fn(t, s) at (0, 0).
template <class Fn>
double mixed_second_derivative(Fn&& fn, double step) {
  auto stencil = [&](double h) {
    return (fn(h, h) - fn(h, -h) - fn(-h, h) + fn(-h, -h)) / (4.0 * h * h);
  };
  return (4.0 * stencil(0.5 * step) - stencil(step)) / 3.0;
}

/// Richardson-extrapolated third mixed derivative d^3/ds1 ds2 ds3 of fn at the origin.
template <class Fn>
double mixed_third_derivative(Fn&& fn, double step) {
  auto stencil = [&](double h) {
    double sum = 0.0;
    for (int a = -1; a <= 1; a += 2) {
      for (int b = -1; b <= 1; b += 2) {
        for (int c = -1; c <= 1; c += 2) {
          sum += a * b * c * fn(a * h, b * h, c * h);
        }
      }
    }
    return sum / (8.0 * h * h * h);
  };
  return (4.0 * stencil(0.5 * step) - stencil(step)) / 3.0;
}

}  // namespace finsler::fd
