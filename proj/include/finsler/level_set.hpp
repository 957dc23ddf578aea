#pragma once

#include <vector>

#include "finsler/manifold.hpp"

namespace finsler {

/// Points on f^-1(level) with an orthonormal basis of ker(df) at each point.
struct LevelSetSample {
  double level = 0.0;
  std::vector<ChartPoint> points;
  std::vector<std::vector<Vec>> tangent_bases;
};

/// Newton projection onto f^-1(level) along df (tolerance 1e-12, at most 25 iterations).
ChartPoint project_to_level(const Manifold& M, const ChartPoint& seed, double level);

/// n points of f^-1(c): grid edge crossings in the first chart whose interior brackets c,
/// thinned by farthest-point sampling and Newton projected. Throws LevelNotFound.
LevelSetSample extract_level_set(const Manifold& M, double c, int n);

/// Field values on a grid over every chart's sampling box, computed once and reused across
/// levels.
class LevelGrid {
 public:
  explicit LevelGrid(const Manifold& M);
  LevelSetSample extract(double c, int n) const;

 private:
  std::vector<Vec> crossings(std::size_t chart, double c) const;

  const Manifold* manifold_;
  int resolution_;
  std::vector<std::vector<double>> values_;
};

/// Clusters of the sample under single linkage. This only sees the sampled points, so it
/// can merge components closer than the sample spacing or miss ones the sampler never hit.
int sampled_components(const Manifold& M, const LevelSetSample& sample);

/// A level set made of one (critical) point; its tangent basis is empty.
LevelSetSample point_level(const Manifold& M, const ChartPoint& p);

}  // namespace finsler
