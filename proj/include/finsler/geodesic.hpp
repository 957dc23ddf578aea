#pragma once

#include <iosfwd>
#include <vector>

#include "finsler/manifold.hpp"

namespace finsler {

inline constexpr double kDefaultStep = 1e-3;

struct GeodesicSample {
  double time = 0.0;
  ChartVector state;  // base point and velocity
  double arc_length = 0.0;
};

struct GeodesicTrajectory {
  std::vector<GeodesicSample> samples;
  double initial_speed = 0.0;
  double speed_drift = 0.0;  // max |F(velocity) - F(v0)| over the run

  const GeodesicSample& back() const { return samples.back(); }
  double arc_length() const { return samples.empty() ? 0.0 : samples.back().arc_length; }
};

struct IntegratorOptions {
  double step = kDefaultStep;
  double max_time = 50.0;
};

struct CrossingEvent {
  double time = 0.0;
  ChartPoint point;
  Vec velocity;
  double level_value = 0.0;
  double arc_length = 0.0;
  double orthogonality_defect = 0.0;
};

/// Acceleration a with g_v a = L_x - L_yx v, L = F^2/2; curves with x'' = a are geodesics.
Vec spray_coefficients(const MetricSpec& F, const TangentVector& v);

/// Classical RK4 on (x, x', arc length) with uniform steps no longer than `step`.
GeodesicTrajectory integrate_geodesic(const Manifold& M, const ChartVector& v0, double t_end,
                                      double step = kDefaultStep);
GeodesicTrajectory integrate_geodesic(const MetricSpec& F, const TangentVector& v0, double t_end,
                                      double step = kDefaultStep);
GeodesicTrajectory integrate_geodesic(const MetricSpec& F, const Domain& domain, const TangentVector& v0,
                                      double t_end, double step = kDefaultStep);

ChartPoint exp_map(const Manifold& M, const ChartVector& v, double step = kDefaultStep);
Vec exp_map(const MetricSpec& F, const TangentVector& v, double step = kDefaultStep);

/// max over u of |g_v(v, u)| / (F(v) sqrt(g_v(u, u))).
double orthogonality_defect(const MetricSpec& F, const TangentVector& velocity, const std::vector<Vec>& basis);

/// Orthonormal basis of ker(df).
std::vector<Vec> level_tangent_basis(const Vec& df);

/// Integrates until f(gamma) crosses target; the step with the sign change is refined by
/// 80 bisections. Throws NeverReached when the time budget runs out or the curve leaves
/// the atlas first.
CrossingEvent integrate_to_level(const Manifold& M, const ChartVector& v0, double target,
                                 const IntegratorOptions& options = {});

/// Integrates until df(gamma') changes sign from + to - (f stops increasing).
CrossingEvent integrate_to_stationary(const Manifold& M, const ChartVector& v0,
                                      const IntegratorOptions& options = {});

/// CSV columns: t, chart, coordinates, velocity, arc_length.
void write_trajectory_csv(std::ostream& out, const GeodesicTrajectory& trajectory);

}  // namespace finsler
