#include "finsler/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "finsler/errors.hpp"
#include "finsler/kernels.hpp"

namespace finsler {

namespace {

double min_pairwise(const Manifold& M, const std::vector<ChartPoint>& points) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<AmbientVec> amb;
  for (const ChartPoint& p : points) amb.push_back(M.ambient(p));
  for (std::size_t i = 0; i < amb.size(); ++i) {
    for (std::size_t j = i + 1; j < amb.size(); ++j) best = std::min(best, (amb[i] - amb[j]).norm());
  }
  return best;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double spread_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace

OrthogonalCone orthogonal_cone(const Manifold& M, const ChartPoint& p) {
  OrthogonalCone cone;
  cone.at = p;
  cone.forward_ray = unit_normal(M, p, Direction::Forward);
  cone.backward_ray = unit_normal(M, p, Direction::Backward);
  const Chart& c = M.chart(p.chart);
  const std::vector<Vec> basis = level_tangent_basis(c.field.differential(p.coords));
  cone.forward_defect = orthogonality_defect(c.metric, cone.forward_ray.local(), basis);
  cone.backward_defect = orthogonality_defect(c.metric, cone.backward_ray.local(), basis);
  const Vec& a = cone.forward_ray.components;
  const Vec& b = cone.backward_ray.components;
  const double cosine = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
  cone.angle_defect = std::numbers::pi - std::acos(cosine);
  return cone;
}

ParallelismReport check_parallel(const Manifold& M, double c, double d, Direction direction, int probes,
                                 const ParallelOptions& options) {
  if (c == d) throw FinslerError(ErrorCode::ValidationError, "parallelism needs two distinct levels");
  ParallelismReport report;
  report.direction = direction;
  report.tolerance = options.tolerance;
  const double lo = std::min(c, d);
  const double hi = std::max(c, d);
  report.source_level = direction == Direction::Forward ? lo : hi;
  report.target_level = direction == Direction::Forward ? hi : lo;
  const LevelSetSample source = extract_level_set(M, report.source_level, probes);
  std::vector<ChartVector> launches;
  for (const ChartPoint& p : source.points) launches.push_back(unit_normal(M, p, direction));
  const auto arrivals = shoot_to_level_parallel(M, launches, report.target_level, options.integrator);
  std::optional<FinslerError> first;
  for (const auto& a : arrivals) {
    if (!a.ok()) {
      report.failures.push_back(a.message);
      if (!first) first.emplace(a.error, a.message);
      continue;
    }
    report.per_probe_defects.push_back(a.value->orthogonality_defect);
    report.arrival_lengths.push_back(a.value->arc_length);
    report.max_defect = std::max(report.max_defect, a.value->orthogonality_defect);
  }
  if (report.per_probe_defects.empty()) throw *first;
  report.verdict = report.max_defect <= options.tolerance;
  report.decisive = report.verdict || report.max_defect >= options.separation;
  return report;
}

CylinderResult build_cylinder(const Manifold& M, const LevelSetSample& source, double r, Direction direction,
                              double step, int fan) {
  if (!(r >= 0.0)) throw FinslerError(ErrorCode::ValidationError, "cylinder radius must be nonnegative");
  CylinderResult out;
  std::vector<ChartVector> vectors;
  for (std::size_t i = 0; i < source.points.size(); ++i) {
    const ChartPoint& p = source.points[i];
    if (!source.tangent_bases[i].empty() || M.dimension() == 1) {
      ChartVector v = unit_normal(M, p, direction);
      v.components *= r;
      vectors.push_back(v);
      continue;
    }
    if (M.dimension() != 2) throw FinslerError(ErrorCode::ValidationError, "point cylinders need a 2D chart");
    const MetricSpec& F = M.chart(p.chart).metric;
    for (int k = 0; k < fan; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / fan;
      Vec e(2);
      e << std::cos(angle), std::sin(angle);
      const double scale = direction == Direction::Forward ? eval_metric(F, {p.coords, e}) : eval_metric(F, {p.coords, -e});
      vectors.push_back({p.chart, p.coords, (direction == Direction::Forward ? r : -r) * e / scale});
    }
  }
  const auto images = exp_map_parallel(M, vectors, step);
  out.f_min = std::numeric_limits<double>::infinity();
  out.f_max = -std::numeric_limits<double>::infinity();
  for (const auto& img : images) {
    if (!img.ok()) {
      out.failures.push_back(img.message);
      continue;
    }
    out.points.push_back(*img.value);
    const double f = M.value(*img.value);
    out.f_min = std::min(out.f_min, f);
    out.f_max = std::max(out.f_max, f);
  }
  return out;
}

EndPointMap end_point_map(const Manifold& M, const LevelSetSample& source, double t, double step) {
  EndPointMap out;
  std::vector<ChartVector> vectors;
  for (const ChartPoint& p : source.points) {
    ChartVector v = unit_normal(M, p, Direction::Forward);
    v.components *= t;
    vectors.push_back(v);
  }
  const auto images = exp_map_parallel(M, vectors, step);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& img : images) {
    if (!img.ok()) {
      out.failures.push_back(img.message);
      continue;
    }
    out.images.push_back(*img.value);
    const double f = M.value(*img.value);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  if (out.images.empty()) throw FinslerError(ErrorCode::LeftDomain, "every end-point image left the domain");
  out.f_spread = hi - lo;
  out.min_pairwise_distance = min_pairwise(M, out.images);
  out.source_spacing = min_pairwise(M, source.points);
  return out;
}

PartitionReport check_finsler_partition(const Manifold& M, std::vector<double> levels, int probes,
                                        const ParallelOptions& options) {
  if (levels.size() < 2) throw FinslerError(ErrorCode::ValidationError, "partition check needs two levels");
  std::sort(levels.begin(), levels.end());
  PartitionReport report;
  report.levels = levels;
  report.tolerance = options.tolerance;
  bool ok = true;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const double a = levels[i];
    const double b = levels[i + 1];
    ParallelismReport fwd = check_parallel(M, a, b, Direction::Forward, probes, options);
    ParallelismReport bwd = check_parallel(M, a, b, Direction::Backward, probes, options);
    ok = ok && fwd.verdict && bwd.verdict;

    // Equal arrival lengths, and the cylinder of that radius landing on the target level.
    const double fwd_spread = spread_of(fwd.arrival_lengths);
    const double bwd_spread = spread_of(bwd.arrival_lengths);
    const CylinderResult up = build_cylinder(M, extract_level_set(M, a, probes), median_of(fwd.arrival_lengths),
                                             Direction::Forward, options.integrator.step);
    const CylinderResult down = build_cylinder(M, extract_level_set(M, b, probes), median_of(bwd.arrival_lengths),
                                               Direction::Backward, options.integrator.step);
    const double up_defect = up.points.empty() ? std::numeric_limits<double>::infinity()
                                               : std::max(std::abs(up.f_max - b), std::abs(up.f_min - b));
    const double down_defect = down.points.empty() ? std::numeric_limits<double>::infinity()
                                                   : std::max(std::abs(down.f_max - a), std::abs(down.f_min - a));
    for (double defect : {fwd_spread, bwd_spread, up_defect, down_defect}) {
      report.cylinder_match_defects.push_back(defect);
      ok = ok && defect <= options.tolerance;
    }
    report.forward.push_back(std::move(fwd));
    report.backward.push_back(std::move(bwd));
  }
  report.finsler_partition_verdict = ok;
  return report;
}

}  // namespace finsler
