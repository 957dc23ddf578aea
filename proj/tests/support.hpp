#pragma once

// Hand-rolled generators shared by the test suites.

#include <cmath>
#include <cstdint>
#include <random>

#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace test_support {

using finsler::Mat;
using finsler::Vec;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Vec vector(int n, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  // Nonzero vector with norm in [0.1, 2].
  Vec nonzero(int n) {
    for (;;) {
      Vec v = vector(n);
      const double r = v.norm();
      if (r > 1e-3) return v * (uniform(0.1, 2.0) / r);
    }
  }

  // Symmetric positive definite with eigenvalues in [0.3, 3].
  Mat spd(int n) {
    const Mat A = Mat::NullaryExpr(n, n, [this](Eigen::Index, Eigen::Index) { return uniform(-1.0, 1.0); });
    const Eigen::HouseholderQR<Mat> qr(A);
    const Mat Q = qr.householderQ() * Mat::Identity(n, n);
    Vec d(n);
    for (int i = 0; i < n; ++i) d(i) = uniform(0.3, 3.0);
    return Q * d.asDiagonal() * Q.transpose();
  }

  // Wind with h(W, W) = norm^2.
  Vec wind(const Mat& h, double norm) {
    const Vec w = nonzero(static_cast<int>(h.rows()));
    return w * (norm / std::sqrt(w.dot(h * w)));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct RandersDraw {
  Mat h;
  Vec wind;
  finsler::MetricSpec metric;
};

inline RandersDraw random_randers(Rng& rng, int n, double max_wind = 0.9) {
  const Mat h = rng.spd(n);
  const Vec w = rng.wind(h, rng.uniform(0.0, max_wind));
  return {h, w, finsler::MetricSpec::randers(finsler::RiemannianMetric::constant(h), finsler::WindField::constant(w))};
}

// Zermelo navigation oracle: the F-unit vectors are u + W with h(u, u) = 1, so F(v) is the
// root of h(v/F - W, v/F - W) = 1. Solved by bisection on F.
inline double zermelo_norm(const Mat& h, const Vec& W, const Vec& v) {
  auto excess = [&](double F) {
    const Vec u = v / F - W;
    return u.dot(h * u) - 1.0;
  };
  double lo = 1e-12;
  double hi = 1.0;
  while (excess(hi) > 0.0) hi *= 2.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace test_support
