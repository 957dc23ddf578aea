#include "finsler/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "finsler/errors.hpp"
#include "finsler/geodesic.hpp"

namespace finsler {

namespace {

int grid_resolution(int dimension) {
  switch (dimension) {
    case 1: return 4096;
    case 2: return 256;
    default: return 40;
  }
}

Vec grid_node(const Chart& chart, int res, long index) {
  const int n = static_cast<int>(chart.sample_lower.size());
  Vec x(n);
  for (int i = 0; i < n; ++i) {
    const long k = index % (res + 1);
    index /= res + 1;
    x(i) = chart.sample_lower(i) + (chart.sample_upper(i) - chart.sample_lower(i)) * static_cast<double>(k) / res;
  }
  return x;
}

double safe_value(const Chart& c, const Vec& x) {
  if (!c.interior.contains(x)) return std::numeric_limits<double>::quiet_NaN();
  try {
    return c.field.value(x);
  } catch (const FinslerError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

ChartPoint project_to_level(const Manifold& M, const ChartPoint& seed, double level) {
  ChartPoint p = seed;
  for (int k = 0; k < 25; ++k) {
    const Chart& c = M.chart(p.chart);
    const double r = c.field.value(p.coords) - level;
    if (std::abs(r) <= 1e-12 * std::max(1.0, std::abs(level))) return p;
    const Vec df = c.field.differential(p.coords);
    const double norm2 = df.squaredNorm();
    if (norm2 == 0.0) throw FinslerError(ErrorCode::CriticalPoint, "df vanishes during level projection");
    p.coords -= (r / norm2) * df;
    if (!c.domain.contains(p.coords)) {
      throw FinslerError(ErrorCode::LeftDomain, "level projection left chart '" + c.name + "'");
    }
  }
  const double r = M.value(p) - level;
  if (std::abs(r) <= 1e-10) return p;
  throw FinslerError(ErrorCode::NoConvergence, "level projection did not converge");
}

LevelGrid::LevelGrid(const Manifold& M) : manifold_(&M), resolution_(grid_resolution(M.dimension())) {
  const int n = M.dimension();
  for (const Chart& chart : M.charts()) {
    long total = 1;
    for (int i = 0; i < n; ++i) total *= resolution_ + 1;
    std::vector<double> values(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(static)
    for (long i = 0; i < total; ++i) values[static_cast<std::size_t>(i)] = safe_value(chart, grid_node(chart, resolution_, i));
    values_.push_back(std::move(values));
  }
}

// Linear interpolation of the crossing on every grid edge that brackets c.
std::vector<Vec> LevelGrid::crossings(std::size_t chart_index, double c) const {
  const Chart& chart = manifold_->chart(chart_index);
  const std::vector<double>& values = values_[chart_index];
  const int n = manifold_->dimension();
  const int res = resolution_;
  const long total = static_cast<long>(values.size());
  std::vector<Vec> out;
  long stride = 1;
  for (int axis = 0; axis < n; ++axis) {
    for (long i = 0; i < total; ++i) {
      if ((i / stride) % (res + 1) == res) continue;
      const double a = values[static_cast<std::size_t>(i)] - c;
      const double b = values[static_cast<std::size_t>(i + stride)] - c;
      if (std::isnan(a) || std::isnan(b)) continue;
      if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
        const double t = a / (a - b);
        const Vec lo = grid_node(chart, res, i);
        out.push_back(lo + t * (grid_node(chart, res, i + stride) - lo));
      }
    }
    stride *= res + 1;
  }
  return out;
}

LevelSetSample LevelGrid::extract(double c, int n) const {
  if (n < 1) throw FinslerError(ErrorCode::ValidationError, "need at least one level point");
  const Manifold& M = *manifold_;
  for (std::size_t ci = 0; ci < M.chart_count(); ++ci) {
    const Chart& chart = M.chart(ci);
    const std::vector<Vec> candidates = crossings(ci, c);
    if (candidates.empty()) continue;
    std::vector<AmbientVec> ambient;
    ambient.reserve(candidates.size());
    for (const Vec& x : candidates) ambient.push_back(chart.embedding.map(x));

    // Deterministic farthest-point thinning, starting from the first candidate.
    const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(n), candidates.size());
    std::vector<std::size_t> chosen{0};
    std::vector<double> gap(candidates.size(), std::numeric_limits<double>::infinity());
    while (chosen.size() < want) {
      const AmbientVec& last = ambient[chosen.back()];
      std::size_t best = 0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        gap[i] = std::min(gap[i], (ambient[i] - last).norm());
        if (gap[i] > gap[best]) best = i;
      }
      chosen.push_back(best);
    }

    LevelSetSample out;
    out.level = c;
    for (std::size_t idx : chosen) {
      const ChartPoint p = project_to_level(M, {ci, candidates[idx]}, c);
      out.points.push_back(p);
      out.tangent_bases.push_back(level_tangent_basis(M.differential(p)));
    }
    return out;
  }
  throw FinslerError(ErrorCode::LevelNotFound, "no grid cell brackets f = " + std::to_string(c));
}

LevelSetSample extract_level_set(const Manifold& M, double c, int n) { return LevelGrid(M).extract(c, n); }

LevelSetSample point_level(const Manifold& M, const ChartPoint& p) {
  LevelSetSample out;
  out.level = M.value(p);
  out.points.push_back(p);
  out.tangent_bases.emplace_back();
  return out;
}

int sampled_components(const Manifold& M, const LevelSetSample& sample) {
  const std::size_t n = sample.points.size();
  if (n == 0) return 0;
  std::vector<AmbientVec> x;
  x.reserve(n);
  for (const ChartPoint& p : sample.points) x.push_back(M.ambient(p));

  // Link radius: twice the widest nearest-neighbour gap, so an evenly sampled curve stays whole.
  double widest = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) nearest = std::min(nearest, (x[i] - x[j]).norm());
    }
    if (std::isfinite(nearest)) widest = std::max(widest, nearest);
  }
  const double radius = 2.0 * widest;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  int components = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((x[i] - x[j]).norm() > radius) continue;
      const std::size_t a = root(i);
      const std::size_t b = root(j);
      if (a == b) continue;
      parent[a] = b;
      --components;
    }
  }
  return components;
}

}  // namespace finsler
