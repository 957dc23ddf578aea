#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finsler/geodesic.hpp"
#include "finsler/level_set.hpp"

namespace finsler {

enum class Direction { Forward, Backward };
std::string_view direction_name(Direction d);

/// F-unit vector at p orthogonal to the level set: grad f / F(grad f) forward,
/// L^-1(-df) / F(L^-1(-df)) backward.
ChartVector unit_normal(const Manifold& M, const ChartPoint& p, Direction direction);

/// Piecewise-cubic Hermite interpolant of b with three-point knot slopes, clamped so the
/// curve stays monotone wherever the data is (linear for two knots).
class BFit {
 public:
  BFit(std::vector<double> t, std::vector<double> b);

  double operator()(double t) const;
  double derivative(double t) const;
  double lower() const { return t_.front(); }
  double upper() const { return t_.back(); }
  const std::vector<double>& knots() const { return t_; }
  const std::vector<double>& values() const { return b_; }
  double left_derivative() const { return left_slope_; }
  double right_derivative() const { return right_slope_; }

 private:
  struct Spline;
  std::vector<double> t_;
  std::vector<double> b_;
  double left_slope_ = 0.0;
  double right_slope_ = 0.0;
  std::shared_ptr<const Spline> spline_;
};

struct LevelValues {
  double level = 0.0;
  std::vector<double> values;  // F(grad f)^2
  double median = 0.0;
  double spread = 0.0;
};

struct TransnormalityReport {
  std::size_t sample_count = 0;
  std::size_t skipped_critical = 0;
  std::vector<LevelValues> b_table;
  double max_spread = 0.0;
  double tolerance = 0.0;
  double bin_width = 0.0;  // 0 when samples come grouped by exact level
  std::optional<BFit> b_fit;
  bool verdict = false;
};

struct TransnormalOptions {
  double tolerance = 1e-6;
  double bin_width = 0.0;  // 0 selects max(1e-3, range/200)
  double critical_threshold = 1e-8;
};

/// Samples grouped by exact level: one bin per level.
TransnormalityReport check_transnormal(const Manifold& M, const std::vector<LevelSetSample>& levels,
                                       const TransnormalOptions& options = {});
/// Scattered samples binned by f-value.
TransnormalityReport check_transnormal(const Manifold& M, const std::vector<ChartPoint>& points,
                                       const TransnormalOptions& options = {});

/// Level sets at `count` evenly spaced values in [lo, hi] with `per_level` points each.
std::vector<LevelSetSample> sample_levels(const Manifold& M, double lo, double hi, int count, int per_level);

struct FSegment {
  Direction direction = Direction::Forward;
  GeodesicTrajectory trajectory;
  std::vector<CrossingEvent> level_crossings;
  double reparametrization_residual = 0.0;  // max |x'' - spray(x, x')| along the curve
  double speed_defect = 0.0;                 // max |F(x') - 1|
  bool monotone = true;
  bool left_domain = false;
  bool reached_critical = false;
};

struct SegmentOptions {
  double step = kDefaultStep;
  double max_length = 10.0;
  std::vector<double> levels;          // crossings to record
  std::optional<double> stop_level;    // stop (and record) here; LeftDomain if never reached
  std::size_t residual_samples = 200;  // spray residual checks spread along the curve
};

/// Arc-length parametrized integral curve of the forward or backward unit normal field.
FSegment trace_f_segment(const Manifold& M, const ChartPoint& start, Direction direction,
                         const SegmentOptions& options = {});

struct DistanceOptions {
  double step = kDefaultStep;
  double guard = 1e-6;
  int knots = 200;
  double max_time = 50.0;
};

struct DistanceCheck {
  double geodesic_distance = 0.0;
  double quadrature = 0.0;
  double defect = 0.0;
  bool critical_end = false;
  std::vector<double> probe_lengths;
  std::size_t probes_failed = 0;
  std::optional<BFit> b_fit;
};

/// Shortest probe geodesic from f^-1(c) to f^-1(d) against the integral of 1/sqrt(b).
/// A critical d is approached up to d - guard and the remaining tail added in closed form.
DistanceCheck verify_distance_formula(const Manifold& M, double c, double d, int probes,
                                      const DistanceOptions& options = {});

struct HatDefects {
  double gradient_defect = 0.0;  // |grad f - hat grad f| in the hat norm
  double norm_defect = 0.0;      // |F(grad f) - hat F(hat grad f)|
};

/// Riemannian metric g_{grad f(x)} on one chart.
MetricSpec hat_metric(const Manifold& M, std::size_t chart);
Manifold hat_manifold(const Manifold& M);

HatDefects check_hat_metric_reduction(const Manifold& M, const ChartPoint& p);

/// Max ambient distance between the F-geodesic and the hat geodesic launched with
/// scale * (unit gradient) from p, over [0, t_end].
double compare_hat_geodesic(const Manifold& M, const ChartPoint& p, double t_end, double scale,
                            double step = kDefaultStep);

struct HessianSample {
  ChartPoint point;
  double level = 0.0;
  double hessian = 0.0;    // Hess f(grad f, grad f)
  double expected = 0.0;   // b'(f) b(f) / 2 from the fit
  double defect = 0.0;     // |2 Hess / b - b'| / (1 + |b'|)
};

struct HessianIdentityReport {
  std::vector<HessianSample> samples;
  double max_defect = 0.0;
};

HessianIdentityReport check_hessian_identity(const Manifold& M, const std::vector<ChartPoint>& points, const BFit& fit);

struct CriticalPointInfo {
  ChartPoint point;
  AmbientVec ambient;
  double value = 0.0;
  Mat hessian;
  Vec eigenvalues;
  int kernel_dim = 0;
  int tangent_dim = 0;
  int codimension = 0;
  bool transversal_nondegenerate = false;
  double b_prime = 0.0;                   // local estimate of b' at the critical value
  std::vector<double> unit_hessians;      // Hess f(u, u) for F-unit transversal u
  double hessian_defect = 0.0;            // max |Hess f(u, u) - b'/2|
};

struct MorseBottReport {
  std::vector<CriticalPointInfo> critical_points;
  bool verdict = false;
};

std::vector<ChartPoint> default_critical_seeds(const Manifold& M, int per_axis = 9);

/// Newton on df = 0 from each seed; duplicates (ambient distance < 1e-6) are merged.
std::vector<ChartPoint> find_critical_points(const Manifold& M, const std::vector<ChartPoint>& seeds);

/// Throws NoCriticalPoint when no seed converges.
MorseBottReport check_morse_bott(const Manifold& M, const std::vector<ChartPoint>& seeds);

}  // namespace finsler
