#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finsler/calculus.hpp"
#include "finsler/domain.hpp"
#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Chart-to-ambient map used to move points and vectors between overlapping charts.
struct Embedding {
  std::function<AmbientVec(const Vec&)> map;
  std::function<AmbientMat(const Vec&)> jacobian;             // ambient x chart
  std::function<std::optional<Vec>(const AmbientVec&)> locate;  // ambient -> chart coordinates

  static Embedding identity(int dimension);
};

struct Chart {
  std::string name;
  MetricSpec metric;
  ScalarField field;
  Domain domain;    // leaving it raises LeftDomain
  Domain interior;  // where this chart is preferred; level sets and samples live here
  Vec sample_lower;
  Vec sample_upper;
  Embedding embedding;
};

/// A metric and a scalar field on an atlas of charts. Plane scenarios use a single chart.
class Manifold {
 public:
  Manifold(std::string name, std::vector<Chart> charts);

  /// One chart with the identity embedding; the sampling box defaults to the domain bounds.
  static Manifold single(MetricSpec metric, ScalarField field, Domain domain,
                         std::optional<std::pair<Vec, Vec>> sampling = std::nullopt);

  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }
  std::size_t chart_count() const { return charts_.size(); }
  const Chart& chart(std::size_t i) const { return charts_.at(i); }
  const std::vector<Chart>& charts() const { return charts_; }

  AmbientVec ambient(const ChartPoint& p) const;
  AmbientVec ambient_vector(const ChartVector& v) const;
  double value(const ChartPoint& p) const { return chart(p.chart).field.value(p.coords); }
  Vec differential(const ChartPoint& p) const { return chart(p.chart).field.differential(p.coords); }
  const MetricSpec& metric(const ChartPoint& p) const { return chart(p.chart).metric; }

  /// Chart coordinates of an ambient point in the first chart whose interior holds it.
  std::optional<ChartPoint> locate(const AmbientVec& x) const;
  /// Expresses v in the target chart, if its base lies in that chart's domain.
  std::optional<ChartVector> transfer(const ChartVector& v, std::size_t target) const;
  /// Moves a point that left its chart's interior to the first chart whose interior holds it.
  ChartVector settle(const ChartVector& v) const;
  ChartPoint settle(const ChartPoint& p) const;

  Manifold reversed() const;
  Manifold with_derivative_mode(DerivativeMode mode) const;
  Manifold with_metric(const std::function<MetricSpec(const Chart&)>& make) const;

  /// Throws ValidationError if f or F disagree on chart overlaps beyond 1e-10 (relative).
  void validate_overlaps(int samples_per_chart = 64) const;

 private:
  std::string name_;
  int dimension_;
  std::vector<Chart> charts_;
};

}  // namespace finsler
