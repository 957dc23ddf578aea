#pragma once

#include <string>
#include <vector>

#include "finsler/level_set.hpp"
#include "finsler/transnormal.hpp"

namespace finsler {

struct OrthogonalCone {
  ChartPoint at;
  ChartVector forward_ray;   // F-unit, df > 0
  ChartVector backward_ray;  // F-unit, df < 0
  double forward_defect = 0.0;
  double backward_defect = 0.0;
  double angle_defect = 0.0;  // pi minus the coordinate angle between the rays
};

OrthogonalCone orthogonal_cone(const Manifold& M, const ChartPoint& p);

struct ParallelOptions {
  IntegratorOptions integrator;
  double tolerance = 1e-4;
  double separation = 0.05;
};

struct ParallelismReport {
  Direction direction = Direction::Forward;
  double source_level = 0.0;
  double target_level = 0.0;
  std::vector<double> per_probe_defects;  // arrived probes only
  std::vector<double> arrival_lengths;
  std::vector<std::string> failures;      // probes that never arrived
  double max_defect = 0.0;
  double tolerance = 0.0;
  bool verdict = false;
  bool decisive = false;  // max_defect outside (tolerance, separation)
};

/// Forward: geodesics from f^-1(min(c, d)) along forward rays; backward: from f^-1(max(c, d))
/// along backward rays. Each arrival is scored by its orthogonality defect.
ParallelismReport check_parallel(const Manifold& M, double c, double d, Direction direction, int probes,
                                 const ParallelOptions& options = {});

struct CylinderResult {
  std::vector<ChartPoint> points;
  std::vector<std::string> failures;
  double f_min = 0.0;
  double f_max = 0.0;
};

/// exp(r * ray) from every source point. A single-point source (empty tangent basis) uses
/// `fan` F-unit directions.
CylinderResult build_cylinder(const Manifold& M, const LevelSetSample& source, double r, Direction direction,
                              double step = kDefaultStep, int fan = 32);

struct EndPointMap {
  std::vector<ChartPoint> images;
  std::vector<std::string> failures;
  double f_spread = 0.0;
  double min_pairwise_distance = 0.0;  // ambient, over images
  double source_spacing = 0.0;         // ambient, over source points
};

EndPointMap end_point_map(const Manifold& M, const LevelSetSample& source, double t, double step = kDefaultStep);

struct PartitionReport {
  std::vector<double> levels;
  std::vector<ParallelismReport> forward;
  std::vector<ParallelismReport> backward;
  std::vector<double> cylinder_match_defects;
  double tolerance = 0.0;
  bool finsler_partition_verdict = false;
};

/// Both parallelism directions on every adjacent level pair, plus arrival-length spreads and
/// cylinder/level coincidence; the verdict is their conjunction.
PartitionReport check_finsler_partition(const Manifold& M, std::vector<double> levels, int probes,
                                        const ParallelOptions& options = {});

}  // namespace finsler
