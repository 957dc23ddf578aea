#include "finsler/manifold.hpp"

#include <cmath>
#include <random>

#include "finsler/errors.hpp"

namespace finsler {

Embedding Embedding::identity(int dimension) {
  return {[](const Vec& x) -> AmbientVec { return x; },
          [dimension](const Vec&) -> AmbientMat { return AmbientMat::Identity(dimension, dimension); },
          [](const AmbientVec& x) -> std::optional<Vec> { return Vec(x); }};
}

Manifold::Manifold(std::string name, std::vector<Chart> charts) : name_(std::move(name)), charts_(std::move(charts)) {
  if (charts_.empty()) throw FinslerError(ErrorCode::ValidationError, "atlas needs at least one chart");
  dimension_ = charts_.front().metric.dimension();
  for (const Chart& c : charts_) {
    if (c.metric.dimension() != dimension_ || c.field.dimension() != dimension_ ||
        c.domain.dimension() != dimension_ || c.interior.dimension() != dimension_) {
      throw FinslerError(ErrorCode::DimensionMismatch, "chart '" + c.name + "' has inconsistent dimensions");
    }
  }
}

Manifold Manifold::single(MetricSpec metric, ScalarField field, Domain domain,
                          std::optional<std::pair<Vec, Vec>> sampling) {
  const int n = metric.dimension();
  Vec lo = domain.lower();
  Vec hi = domain.upper();
  if (sampling) {
    lo = sampling->first;
    hi = sampling->second;
  } else {
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(lo(i))) lo(i) = -1.0;
      if (!std::isfinite(hi(i))) hi(i) = 1.0;
    }
  }
  Chart chart{"plane", std::move(metric), std::move(field), domain, domain, lo, hi, Embedding::identity(n)};
  return Manifold(chart.field.name(), {std::move(chart)});
}

AmbientVec Manifold::ambient(const ChartPoint& p) const { return chart(p.chart).embedding.map(p.coords); }

AmbientVec Manifold::ambient_vector(const ChartVector& v) const {
  return chart(v.chart).embedding.jacobian(v.base) * AmbientVec(v.components);
}

std::optional<ChartPoint> Manifold::locate(const AmbientVec& x) const {
  for (std::size_t i = 0; i < charts_.size(); ++i) {
    const auto coords = charts_[i].embedding.locate(x);
    if (coords && charts_[i].interior.contains(*coords)) return ChartPoint{i, *coords};
  }
  return std::nullopt;
}

std::optional<ChartVector> Manifold::transfer(const ChartVector& v, std::size_t target) const {
  if (target == v.chart) return v;
  const Chart& b = chart(target);
  const auto coords = b.embedding.locate(ambient(v.point()));
  if (!coords || !b.domain.contains(*coords)) return std::nullopt;
  const AmbientMat Jb = b.embedding.jacobian(*coords);
  const AmbientVec amb = ambient_vector(v);
  const Eigen::VectorXd local = Jb.completeOrthogonalDecomposition().solve(amb);
  return ChartVector{target, *coords, Vec(local)};
}

ChartVector Manifold::settle(const ChartVector& v) const {
  if (chart(v.chart).interior.contains(v.base)) return v;
  const AmbientVec x = ambient(v.point());
  for (std::size_t i = 0; i < charts_.size(); ++i) {
    if (i == v.chart) continue;
    const auto coords = charts_[i].embedding.locate(x);
    if (coords && charts_[i].interior.contains(*coords)) {
      if (auto moved = transfer(v, i)) return *moved;
    }
  }
  if (chart(v.chart).domain.contains(v.base)) return v;
  throw FinslerError(ErrorCode::LeftDomain, "point left chart '" + chart(v.chart).name + "'");
}

ChartPoint Manifold::settle(const ChartPoint& p) const {
  const ChartVector moved = settle(ChartVector{p.chart, p.coords, Vec::Zero(dimension_)});
  return moved.point();
}

Manifold Manifold::reversed() const {
  return with_metric([](const Chart& c) { return reverse_metric(c.metric); });
}

Manifold Manifold::with_derivative_mode(DerivativeMode mode) const {
  Manifold out = with_metric([mode](const Chart& c) {
    if (c.metric.kind() == MetricKind::Custom) return c.metric;
    return c.metric.with_derivative_mode(mode);
  });
  if (mode == DerivativeMode::FiniteDifference) {
    for (Chart& c : out.charts_) c.field = c.field.finite_difference_only();
  }
  return out;
}

Manifold Manifold::with_metric(const std::function<MetricSpec(const Chart&)>& make) const {
  std::vector<Chart> charts = charts_;
  for (Chart& c : charts) c.metric = make(c);
  return Manifold(name_, std::move(charts));
}

void Manifold::validate_overlaps(int samples_per_chart) const {
  if (charts_.size() < 2) return;
  std::mt19937_64 rng(7);
  for (std::size_t a = 0; a < charts_.size(); ++a) {
    const Chart& ca = charts_[a];
    int checked = 0;
    for (int attempt = 0; attempt < 50 * samples_per_chart && checked < samples_per_chart; ++attempt) {
      Vec x(dimension_);
      for (int i = 0; i < dimension_; ++i) {
        std::uniform_real_distribution<double> u(ca.sample_lower(i), ca.sample_upper(i));
        x(i) = u(rng);
      }
      if (!ca.domain.contains(x)) continue;
      Vec v(dimension_);
      std::normal_distribution<double> g;
      for (int i = 0; i < dimension_; ++i) v(i) = g(rng);
      const ChartVector va{a, x, v};
      for (std::size_t b = 0; b < charts_.size(); ++b) {
        if (b == a) continue;
        const auto vb = transfer(va, b);
        if (!vb) continue;
        ++checked;
        const double fa = ca.field.value(x);
        const double fb = charts_[b].field.value(vb->base);
        const double Fa = eval_metric(ca.metric, va.local());
        const double Fb = eval_metric(charts_[b].metric, vb->local());
        if (std::abs(fa - fb) > 1e-10 * (1.0 + std::abs(fa)) || std::abs(Fa - Fb) > 1e-10 * (1.0 + Fa)) {
          throw FinslerError(ErrorCode::ValidationError,
                             "charts '" + ca.name + "' and '" + charts_[b].name + "' disagree on their overlap");
        }
      }
    }
  }
}

}  // namespace finsler
