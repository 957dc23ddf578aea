#include "finsler/transnormal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "finsler/errors.hpp"
#include "finsler/finite_difference.hpp"
#include "finsler/kernels.hpp"

namespace finsler {

std::string_view direction_name(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

namespace {

Vec normal_in_chart(const Chart& c, const Vec& x, Direction direction) {
  if (!c.domain.contains(x)) throw FinslerError(ErrorCode::LeftDomain, "left chart '" + c.name + "'");
  Vec df = c.field.differential(x);
  if (df.norm() < kCriticalGradientNorm) throw FinslerError(ErrorCode::CriticalPoint, "df vanishes");
  if (direction == Direction::Backward) df = -df;
  const Vec v = legendre_inverse(c.metric, {x, df}).components;
  return v / eval_metric(c.metric, {x, v});
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

LevelValues summarize(double level, std::vector<double> values) {
  LevelValues out;
  out.level = level;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.spread = *hi - *lo;
  out.median = median_of(values);
  out.values = std::move(values);
  return out;
}

// Collects F(grad f)^2, separating points that are critical at the given threshold.
std::vector<std::optional<double>> squared_norms(const Manifold& M, const std::vector<ChartPoint>& points,
                                                 double critical_threshold, std::size_t& skipped) {
  const auto outcomes = squared_gradient_norms_parallel(M, points);
  std::vector<std::optional<double>> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (M.differential(points[i]).norm() < critical_threshold) {
      ++skipped;
      continue;
    }
    if (!outcomes[i].ok()) {
      if (outcomes[i].error == ErrorCode::CriticalPoint) {
        ++skipped;
        continue;
      }
      throw FinslerError(outcomes[i].error, outcomes[i].message);
    }
    out[i] = *outcomes[i].value;
  }
  return out;
}

TransnormalityReport finish(TransnormalityReport report, const TransnormalOptions& options) {
  if (report.b_table.empty()) throw FinslerError(ErrorCode::EmptySample, "no regular sample points");
  std::sort(report.b_table.begin(), report.b_table.end(),
            [](const LevelValues& a, const LevelValues& b) { return a.level < b.level; });
  std::vector<double> t;
  std::vector<double> b;
  for (const LevelValues& row : report.b_table) {
    report.max_spread = std::max(report.max_spread, row.spread);
    if (!t.empty() && row.level <= t.back()) continue;
    t.push_back(row.level);
    b.push_back(row.median);
  }
  report.b_fit.emplace(std::move(t), std::move(b));
  report.tolerance = options.tolerance;
  report.verdict = report.max_spread <= options.tolerance;
  return report;
}

}  // namespace

ChartVector unit_normal(const Manifold& M, const ChartPoint& p, Direction direction) {
  return {p.chart, p.coords, normal_in_chart(M.chart(p.chart), p.coords, direction)};
}

// ---------------------------------------------------------------------------------------------
// b fit

struct BFit::Spline {
  std::optional<boost::math::interpolators::cubic_hermite<std::vector<double>>> hermite;
};

BFit::BFit(std::vector<double> t, std::vector<double> b) : t_(std::move(t)), b_(std::move(b)) {
  if (t_.empty() || t_.size() != b_.size()) throw FinslerError(ErrorCode::EmptySample, "b fit needs knots");
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (!(t_[i] > t_[i - 1])) throw FinslerError(ErrorCode::ValidationError, "b fit knots must increase");
  }
  auto spline = std::make_shared<Spline>();
  const std::size_t n = t_.size();
  if (n >= 3) {
    // Three-point slope at x1 from (x0, x1, x2), second order on uneven knots.
    auto centered = [](double x0, double x1, double x2, double y0, double y1, double y2) {
      const double h1 = x1 - x0;
      const double h2 = x2 - x1;
      return -h2 / (h1 * (h1 + h2)) * y0 + (h2 - h1) / (h1 * h2) * y1 + h1 / (h2 * (h1 + h2)) * y2;
    };
    auto one_sided = [](double x0, double x1, double x2, double y0, double y1, double y2) {
      const double h1 = x1 - x0;
      const double h2 = x2 - x1;
      return -(2 * h1 + h2) / (h1 * (h1 + h2)) * y0 + (h1 + h2) / (h1 * h2) * y1 - h1 / (h2 * (h1 + h2)) * y2;
    };
    std::vector<double> secant(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) secant[k] = (b_[k + 1] - b_[k]) / (t_[k + 1] - t_[k]);
    // Keeps the cubic monotone on stretches where the data is monotone; flat at data extrema.
    auto clamp = [](double slope, double a, double b) {
      if (a * b <= 0.0) return 0.0;
      const double bound = 3.0 * std::min(std::abs(a), std::abs(b));
      return std::copysign(std::clamp(std::copysign(1.0, a) * slope, 0.0, bound), a);
    };
    std::vector<double> slopes(n);
    slopes[0] = clamp(one_sided(t_[0], t_[1], t_[2], b_[0], b_[1], b_[2]), secant[0], secant[0]);
    slopes[n - 1] = clamp(-one_sided(-t_[n - 1], -t_[n - 2], -t_[n - 3], b_[n - 1], b_[n - 2], b_[n - 3]),
                          secant[n - 2], secant[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      slopes[k] = clamp(centered(t_[k - 1], t_[k], t_[k + 1], b_[k - 1], b_[k], b_[k + 1]), secant[k - 1], secant[k]);
    }
    left_slope_ = slopes.front();
    right_slope_ = slopes.back();
    spline->hermite.emplace(std::vector<double>(t_), std::vector<double>(b_), std::move(slopes));
  } else if (n == 2) {
    left_slope_ = right_slope_ = (b_[1] - b_[0]) / (t_[1] - t_[0]);
  }
  spline_ = std::move(spline);
}

double BFit::operator()(double t) const {
  if (t <= t_.front()) return b_.front() + left_slope_ * (t - t_.front());
  if (t >= t_.back()) return b_.back() + right_slope_ * (t - t_.back());
  if (spline_->hermite) return (*spline_->hermite)(t);
  const auto hi = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
  const double w = (t - t_[hi - 1]) / (t_[hi] - t_[hi - 1]);
  return (1 - w) * b_[hi - 1] + w * b_[hi];
}

double BFit::derivative(double t) const {
  if (t <= t_.front()) return left_slope_;
  if (t >= t_.back()) return right_slope_;
  if (spline_->hermite) return spline_->hermite->prime(t);
  const auto hi = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
  return (b_[hi] - b_[hi - 1]) / (t_[hi] - t_[hi - 1]);
}

// ---------------------------------------------------------------------------------------------
// Transnormality

TransnormalityReport check_transnormal(const Manifold& M, const std::vector<LevelSetSample>& levels,
                                       const TransnormalOptions& options) {
  TransnormalityReport report;
  for (const LevelSetSample& level : levels) {
    const auto values = squared_norms(M, level.points, options.critical_threshold, report.skipped_critical);
    std::vector<double> kept;
    for (const auto& v : values) {
      if (v) kept.push_back(*v);
    }
    if (kept.empty()) continue;
    report.sample_count += kept.size();
    report.b_table.push_back(summarize(level.level, std::move(kept)));
  }
  return finish(std::move(report), options);
}

TransnormalityReport check_transnormal(const Manifold& M, const std::vector<ChartPoint>& points,
                                       const TransnormalOptions& options) {
  TransnormalityReport report;
  const auto values = squared_norms(M, points, options.critical_threshold, report.skipped_critical);
  std::vector<std::pair<double, double>> samples;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (values[i]) samples.emplace_back(M.value(points[i]), *values[i]);
  }
  if (samples.empty()) throw FinslerError(ErrorCode::EmptySample, "no regular sample points");
  std::sort(samples.begin(), samples.end());
  const double lo = samples.front().first;
  const double range = samples.back().first - lo;
  report.bin_width = options.bin_width > 0.0 ? options.bin_width : std::max(1e-3, range / 200.0);
  report.sample_count = samples.size();
  std::size_t i = 0;
  while (i < samples.size()) {
    const auto bin = static_cast<long>(std::floor((samples[i].first - lo) / report.bin_width));
    std::vector<double> f_values;
    std::vector<double> b_values;
    while (i < samples.size() &&
           static_cast<long>(std::floor((samples[i].first - lo) / report.bin_width)) == bin) {
      f_values.push_back(samples[i].first);
      b_values.push_back(samples[i].second);
      ++i;
    }
    report.b_table.push_back(summarize(median_of(f_values), std::move(b_values)));
  }
  return finish(std::move(report), options);
}

std::vector<LevelSetSample> sample_levels(const Manifold& M, double lo, double hi, int count, int per_level) {
  const LevelGrid grid(M);
  std::vector<LevelSetSample> out;
  for (int k = 0; k < count; ++k) {
    const double level = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    out.push_back(grid.extract(level, per_level));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// f-segments

namespace {

struct FlowState {
  std::size_t chart;
  Vec x;
};

FlowState flow_step(const Manifold& M, const FlowState& S, double h, Direction direction) {
  const Chart& c = M.chart(S.chart);
  const Vec k1 = normal_in_chart(c, S.x, direction);
  const Vec k2 = normal_in_chart(c, S.x + 0.5 * h * k1, direction);
  const Vec k3 = normal_in_chart(c, S.x + 0.5 * h * k2, direction);
  const Vec k4 = normal_in_chart(c, S.x + h * k3, direction);
  FlowState out{S.chart, S.x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)};
  if (!c.domain.contains(out.x)) throw FinslerError(ErrorCode::LeftDomain, "left chart '" + c.name + "'");
  return out;
}

double spray_residual(const Manifold& M, const GeodesicSample& s, Direction direction) {
  const Chart& c = M.chart(s.state.chart);
  const Vec& x = s.state.base;
  const Vec& xi = s.state.components;
  const Vec flow_acceleration = fd::central_derivative(
      [&](double tau) -> Vec { return normal_in_chart(c, x + tau * xi, direction); }, fd::kDefaultStep);
  return (flow_acceleration - spray_coefficients(c.metric, {x, xi})).norm();
}

}  // namespace

FSegment trace_f_segment(const Manifold& M, const ChartPoint& start, Direction direction,
                         const SegmentOptions& options) {
  if (!(options.step > 0.0)) throw FinslerError(ErrorCode::ValidationError, "step must be positive");
  const double sign = direction == Direction::Forward ? 1.0 : -1.0;
  FSegment seg;
  seg.direction = direction;
  seg.trajectory.initial_speed = 1.0;

  FlowState S{start.chart, start.coords};
  {
    const ChartPoint p = M.settle(start);
    S = {p.chart, p.coords};
  }
  const double f_start = M.chart(S.chart).field.value(S.x);
  std::vector<double> pending;
  for (double level : options.levels) {
    if (sign * (level - f_start) > 0.0) pending.push_back(level);
  }
  if (options.stop_level) {
    if (!(sign * (*options.stop_level - f_start) > 0.0)) {
      throw FinslerError(ErrorCode::ValidationError, "stop level lies behind the start point");
    }
    pending.push_back(*options.stop_level);
  }
  std::sort(pending.begin(), pending.end(), [sign](double a, double b) { return sign * a < sign * b; });
  pending.erase(std::unique(pending.begin(), pending.end()), pending.end());

  auto record = [&](double t, const FlowState& state) {
    const Chart& c = M.chart(state.chart);
    const Vec xi = normal_in_chart(c, state.x, direction);
    seg.trajectory.samples.push_back({t, {state.chart, state.x, xi}, t});
    seg.speed_defect = std::max(seg.speed_defect, std::abs(eval_metric(c.metric, {state.x, xi}) - 1.0));
  };
  record(0.0, S);

  double t = 0.0;
  bool done = false;
  while (!done && t < options.max_length) {
    FlowState next;
    double f0 = 0.0;
    double f1 = 0.0;
    try {
      const ChartPoint p = M.settle(ChartPoint{S.chart, S.x});
      S = {p.chart, p.coords};
      f0 = M.chart(S.chart).field.value(S.x);
      next = flow_step(M, S, options.step, direction);
      f1 = M.chart(next.chart).field.value(next.x);
    } catch (const FinslerError& e) {
      if (e.code() == ErrorCode::CriticalPoint) {
        seg.reached_critical = true;
        break;
      }
      if (e.code() != ErrorCode::LeftDomain || options.stop_level) throw;
      seg.left_domain = true;
      break;
    }
    if (!(sign * (f1 - f0) > 0.0)) {
      seg.monotone = false;
      seg.reached_critical = true;
      break;
    }
    while (!pending.empty() && sign * (f1 - pending.front()) >= 0.0) {
      const double level = pending.front();
      double lo = 0.0;
      double hi = options.step;
      FlowState best = next;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const FlowState trial = flow_step(M, S, mid, direction);
        const double g = sign * (M.chart(trial.chart).field.value(trial.x) - level);
        if (g < 0.0) {
          lo = mid;
        } else {
          hi = mid;
          best = trial;
        }
      }
      const Chart& c = M.chart(best.chart);
      CrossingEvent e;
      e.time = t + hi;
      e.point = {best.chart, best.x};
      e.velocity = normal_in_chart(c, best.x, direction);
      e.level_value = c.field.value(best.x);
      e.arc_length = e.time;
      e.orthogonality_defect =
          orthogonality_defect(c.metric, {best.x, e.velocity}, level_tangent_basis(c.field.differential(best.x)));
      seg.level_crossings.push_back(e);
      pending.erase(pending.begin());
      if (options.stop_level && level == *options.stop_level) {
        seg.trajectory.samples.push_back({e.time, {e.point.chart, e.point.coords, e.velocity}, e.time});
        done = true;
        break;
      }
    }
    if (done) break;
    S = next;
    t += options.step;
    record(t, S);
  }
  if (options.stop_level && !done) {
    throw FinslerError(ErrorCode::LeftDomain, "f-segment ended before reaching the stop level");
  }

  const auto& samples = seg.trajectory.samples;
  const std::size_t count = std::max<std::size_t>(1, std::min(options.residual_samples, samples.size()));
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = count == 1 ? 0 : k * (samples.size() - 1) / (count - 1);
    try {
      seg.reparametrization_residual =
          std::max(seg.reparametrization_residual, spray_residual(M, samples[i], direction));
    } catch (const FinslerError& e) {
      if (e.code() != ErrorCode::LeftDomain && e.code() != ErrorCode::CriticalPoint) throw;
    }
  }
  return seg;
}

// ---------------------------------------------------------------------------------------------
// Distance formula

DistanceCheck verify_distance_formula(const Manifold& M, double c, double d, int probes,
                                      const DistanceOptions& options) {
  if (!(c < d)) throw FinslerError(ErrorCode::ValidationError, "distance check needs c < d");
  if (probes < 1) throw FinslerError(ErrorCode::ValidationError, "need at least one probe");
  DistanceCheck out;
  for (const ChartPoint& p : find_critical_points(M, default_critical_seeds(M))) {
    const double v = M.value(p);
    const double slack = 1e-9 * (1.0 + std::abs(v));
    if (v > c + slack && v < d - slack) {
      throw FinslerError(ErrorCode::IntervalContainsCriticalValue,
                         "critical value " + std::to_string(v) + " inside (c, d)");
    }
    if (std::abs(v - c) <= slack) {
      throw FinslerError(ErrorCode::IntervalContainsCriticalValue, "source level c is a critical value");
    }
    if (std::abs(v - d) <= slack) out.critical_end = true;
  }

  const LevelSetSample source = extract_level_set(M, c, probes);
  std::vector<ChartVector> launches;
  for (const ChartPoint& p : source.points) launches.push_back(unit_normal(M, p, Direction::Forward));
  IntegratorOptions integrator{options.step, options.max_time};
  const auto arrivals = out.critical_end ? shoot_to_stationary_parallel(M, launches, integrator)
                                         : shoot_to_level_parallel(M, launches, d, integrator);
  out.geodesic_distance = std::numeric_limits<double>::infinity();
  std::optional<FinslerError> stored;
  std::vector<std::pair<double, std::size_t>> arrived;
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    const auto& a = arrivals[i];
    if (!a.ok()) {
      ++out.probes_failed;
      if (!stored) stored.emplace(a.error, a.message);
      continue;
    }
    arrived.emplace_back(a.value->arc_length, i);
    out.probe_lengths.push_back(a.value->arc_length);
    out.geodesic_distance = std::min(out.geodesic_distance, a.value->arc_length);
  }
  if (out.probe_lengths.empty()) throw *stored;

  // Knots for b: uniform in s, or uniform in u = sqrt(d - s) towards a critical end.
  const int K = std::max(options.knots, 4);
  const double end = out.critical_end ? d - options.guard : d;
  std::vector<double> levels;
  for (int k = 1; k < K; ++k) {
    if (out.critical_end) {
      const double u0 = std::sqrt(d - c);
      const double u1 = std::sqrt(options.guard);
      const double u = u0 + (u1 - u0) * k / (K - 1);
      levels.push_back(k == K - 1 ? end : d - u * u);
    } else {
      levels.push_back(k == K - 1 ? end : c + (d - c) * k / (K - 1));
    }
  }
  SegmentOptions seg_options;
  seg_options.step = options.step;
  seg_options.max_length = options.max_time;
  seg_options.levels = levels;
  seg_options.stop_level = end;
  seg_options.residual_samples = 0;
  // Trace from the sources whose probes arrived, shortest first, so the curve stays in the domain.
  std::sort(arrived.begin(), arrived.end());
  std::optional<FSegment> seg;
  ChartPoint start;
  for (const auto& [length, index] : arrived) {
    start = source.points[index];
    try {
      seg = trace_f_segment(M, start, Direction::Forward, seg_options);
      break;
    } catch (const FinslerError& e) {
      if (e.code() != ErrorCode::LeftDomain && e.code() != ErrorCode::NeverReached) throw;
    }
  }
  if (!seg) throw FinslerError(ErrorCode::LeftDomain, "no normal curve from f^-1(c) reaches f^-1(d) inside the domain");
  std::vector<ChartPoint> knot_points{start};
  for (const CrossingEvent& e : seg->level_crossings) knot_points.push_back(e.point);
  const auto values = squared_gradient_norms_parallel(M, knot_points);
  std::vector<double> t;
  std::vector<double> b;
  for (std::size_t i = 0; i < knot_points.size(); ++i) {
    if (!values[i].ok()) throw FinslerError(values[i].error, values[i].message);
    const double s = M.value(knot_points[i]);
    if (!t.empty() && s <= t.back()) continue;
    t.push_back(s);
    b.push_back(*values[i].value);
  }
  if (*std::min_element(b.begin(), b.end()) < 1e-10) {
    throw FinslerError(ErrorCode::IntervalContainsCriticalValue, "fitted b vanishes inside (c, d)");
  }
  out.b_fit.emplace(std::move(t), std::move(b));
  const BFit& fit = *out.b_fit;

  using boost::math::quadrature::gauss_kronrod;
  if (out.critical_end) {
    auto integrand = [&](double u) { return 2.0 * u / std::sqrt(std::max(fit(d - u * u), 1e-300)); };
    out.quadrature = gauss_kronrod<double, 31>::integrate(integrand, std::sqrt(options.guard), std::sqrt(d - c), 15,
                                                          1e-12);
    out.quadrature += 2.0 * options.guard / std::sqrt(fit(end));
  } else {
    auto integrand = [&](double s) { return 1.0 / std::sqrt(std::max(fit(s), 1e-300)); };
    out.quadrature = gauss_kronrod<double, 31>::integrate(integrand, c, d, 15, 1e-12);
  }
  out.defect = std::abs(out.geodesic_distance - out.quadrature);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Hat metric

MetricSpec hat_metric(const Manifold& M, std::size_t chart) {
  const Chart& c = M.chart(chart);
  MetricSpec F = c.metric;
  ScalarField f = c.field;
  return MetricSpec::riemannian(RiemannianMetric(c.metric.dimension(), [F, f](const Vec& x) -> Mat {
    const Vec grad = legendre_inverse(F, {x, f.differential(x)}).components;
    return fundamental_tensor(F, {x, grad});
  }));
}

Manifold hat_manifold(const Manifold& M) {
  std::vector<Chart> charts = M.charts();
  for (std::size_t i = 0; i < charts.size(); ++i) charts[i].metric = hat_metric(M, i);
  return Manifold(M.name() + "-hat", std::move(charts));
}

HatDefects check_hat_metric_reduction(const Manifold& M, const ChartPoint& p) {
  const Chart& c = M.chart(p.chart);
  const Vec df = c.field.differential(p.coords);
  if (df.norm() < kCriticalGradientNorm) throw FinslerError(ErrorCode::CriticalPoint, "df vanishes");
  const Vec grad = legendre_inverse(c.metric, {p.coords, df}).components;
  const Mat ghat = fundamental_tensor(c.metric, {p.coords, grad});
  const Vec hat_grad = ghat.ldlt().solve(df);
  const Vec diff = grad - hat_grad;
  HatDefects out;
  out.gradient_defect = std::sqrt(std::max(0.0, diff.dot(ghat * diff)));
  out.norm_defect = std::abs(eval_metric(c.metric, {p.coords, grad}) - std::sqrt(hat_grad.dot(ghat * hat_grad)));
  return out;
}

double compare_hat_geodesic(const Manifold& M, const ChartPoint& p, double t_end, double scale, double step) {
  ChartVector v0 = unit_normal(M, p, Direction::Forward);
  v0.components *= scale;
  const GeodesicTrajectory finsler = integrate_geodesic(M, v0, t_end, step);
  const GeodesicTrajectory hat = integrate_geodesic(hat_manifold(M), v0, t_end, step);
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min(finsler.samples.size(), hat.samples.size()); ++i) {
    worst = std::max(worst, (M.ambient(finsler.samples[i].state.point()) - M.ambient(hat.samples[i].state.point())).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------------------------
// Hessian identity

HessianIdentityReport check_hessian_identity(const Manifold& M, const std::vector<ChartPoint>& points,
                                             const BFit& fit) {
  HessianIdentityReport out;
  for (const ChartPoint& p : points) {
    const Chart& c = M.chart(p.chart);
    if (c.field.differential(p.coords).norm() < kCriticalPointTolerance) continue;
    HessianSample s;
    s.point = p;
    s.level = c.field.value(p.coords);
    s.hessian = hessian_along_gradient(c.metric, c.field, p.coords);
    const double b = fit(s.level);
    const double bp = fit.derivative(s.level);
    s.expected = 0.5 * bp * b;
    s.defect = std::abs(2.0 * s.hessian / b - bp) / (1.0 + std::abs(bp));
    out.max_defect = std::max(out.max_defect, s.defect);
    out.samples.push_back(s);
  }
  if (out.samples.empty()) throw FinslerError(ErrorCode::EmptySample, "no regular points for the Hessian check");
  return out;
}

// ---------------------------------------------------------------------------------------------
// Critical points and Morse-Bott

std::vector<ChartPoint> default_critical_seeds(const Manifold& M, int per_axis) {
  std::vector<ChartPoint> seeds;
  const int n = M.dimension();
  long total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  for (std::size_t ci = 0; ci < M.chart_count(); ++ci) {
    const Chart& c = M.chart(ci);
    for (long index = 0; index < total; ++index) {
      Vec x(n);
      long rest = index;
      for (int i = 0; i < n; ++i) {
        const long k = rest % per_axis;
        rest /= per_axis;
        x(i) = c.sample_lower(i) + (c.sample_upper(i) - c.sample_lower(i)) * (static_cast<double>(k) + 0.5) / per_axis;
      }
      if (c.interior.contains(x)) seeds.push_back({ci, x});
    }
  }
  return seeds;
}

namespace {

std::optional<ChartPoint> newton_critical(const Manifold& M, const ChartPoint& seed) {
  const Chart& c = M.chart(seed.chart);
  Vec x = seed.coords;
  try {
    for (int k = 0; k < 50; ++k) {
      const Vec df = c.field.differential(x);
      if (df.norm() <= 1e-13) break;
      const Mat H = c.field.hessian(x);
      const Vec step = H.completeOrthogonalDecomposition().solve(df);
      if (!step.allFinite() || step.norm() == 0.0) return std::nullopt;
      x -= step;
      if (!c.domain.contains(x)) return std::nullopt;
    }
    if (c.field.differential(x).norm() > 1e-10 || !c.domain.contains(x)) return std::nullopt;
  } catch (const FinslerError&) {
    return std::nullopt;
  }
  return ChartPoint{seed.chart, x};
}

}  // namespace

std::vector<ChartPoint> find_critical_points(const Manifold& M, const std::vector<ChartPoint>& seeds) {
  std::vector<ChartPoint> found;
  std::vector<AmbientVec> ambient;
  for (const ChartPoint& seed : seeds) {
    auto p = newton_critical(M, seed);
    if (!p) continue;
    const AmbientVec a = M.ambient(*p);
    const bool seen = std::any_of(ambient.begin(), ambient.end(),
                                  [&](const AmbientVec& b) { return (a - b).norm() < 1e-6; });
    if (seen) continue;
    if (auto located = M.locate(a)) {
      if (auto refined = newton_critical(M, *located)) p = refined;
    }
    found.push_back(*p);
    ambient.push_back(a);
  }
  return found;
}

namespace {

// b' at the critical value from points at f-offsets delta and 4 delta along a ray:
// b(s)/(s - b) = b' + C sqrt|s - b| near the end, eliminated between the two offsets.
double local_b_prime(const Chart& c, const Vec& p, double value, const Vec& dir, double curvature) {
  const double sign = curvature > 0.0 ? 1.0 : -1.0;
  auto at_offset = [&](double delta) {
    double r = std::sqrt(2.0 * delta / std::abs(curvature));
    for (int k = 0; k < 30; ++k) {
      const Vec x = p + r * dir;
      const double g = c.field.value(x) - value - sign * delta;
      const double slope = c.field.differential(x).dot(dir);
      if (slope == 0.0) break;
      const double next = r - g / slope;
      if (std::abs(next - r) <= 1e-15 * r) {
        r = next;
        break;
      }
      r = next;
    }
    const Vec x = p + r * dir;
    const double offset = c.field.value(x) - value;
    const Vec grad = legendre_inverse(c.metric, {x, c.field.differential(x)}).components;
    const double F = eval_metric(c.metric, {x, grad});
    return std::pair{std::abs(offset), F * F / offset};
  };
  const auto [d1, q1] = at_offset(1e-8);
  const auto [d2, q2] = at_offset(4e-8);
  const double r1 = std::sqrt(d1);
  const double r2 = std::sqrt(d2);
  return (q1 * r2 - q2 * r1) / (r2 - r1);
}

}  // namespace

MorseBottReport check_morse_bott(const Manifold& M, const std::vector<ChartPoint>& seeds) {
  const std::vector<ChartPoint> points = find_critical_points(M, seeds);
  if (points.empty()) throw FinslerError(ErrorCode::NoCriticalPoint, "Newton on df = 0 failed from every seed");
  const int n = M.dimension();
  MorseBottReport report;
  report.verdict = true;
  for (const ChartPoint& p : points) {
    const Chart& c = M.chart(p.chart);
    CriticalPointInfo info;
    info.point = p;
    info.ambient = M.ambient(p);
    info.value = c.field.value(p.coords);
    info.hessian = coordinate_hessian_at_critical(c.field, p.coords);
    Eigen::SelfAdjointEigenSolver<Mat> eig(info.hessian);
    info.eigenvalues = eig.eigenvalues();
    for (int i = 0; i < n; ++i) info.kernel_dim += std::abs(info.eigenvalues(i)) < 1e-6 ? 1 : 0;

    // Tangent directions of the critical set: spread of critical points reached from nearby seeds.
    std::vector<Vec> offsets;
    for (int i = 0; i < n; ++i) {
      for (double s : {-1e-2, 1e-2}) {
        Vec seed = p.coords;
        seed(i) += s;
        if (auto q = newton_critical(M, {p.chart, seed})) offsets.push_back(q->coords - p.coords);
      }
    }
    Mat spread = Mat::Zero(n, n);
    for (const Vec& o : offsets) spread += o * o.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> pca(spread);
    std::vector<Vec> normals;
    for (int i = 0; i < n; ++i) {
      if (std::sqrt(std::max(0.0, pca.eigenvalues()(i))) > 1e-6) {
        ++info.tangent_dim;
      } else {
        normals.push_back(pca.eigenvectors().col(i));
      }
    }
    info.codimension = n - info.tangent_dim;
    Mat N(n, static_cast<Eigen::Index>(normals.size()));
    for (std::size_t k = 0; k < normals.size(); ++k) N.col(static_cast<Eigen::Index>(k)) = normals[k];
    if (!normals.empty()) {
      const Mat restricted = N.transpose() * info.hessian * N;
      Eigen::SelfAdjointEigenSolver<Mat> r(restricted);
      info.transversal_nondegenerate = r.eigenvalues().cwiseAbs().minCoeff() > 1e-6;
    }

    // Transversal Hessian eigendirections, both orientations, scaled to F-unit length.
    std::vector<double> estimates;
    for (int i = 0; i < n; ++i) {
      const double lambda = info.eigenvalues(i);
      if (std::abs(lambda) < 1e-6) continue;
      const Vec e = eig.eigenvectors().col(i);
      for (double s : {1.0, -1.0}) {
        const Vec dir = s * e;
        const Vec u = dir / eval_metric(c.metric, {p.coords, dir});
        info.unit_hessians.push_back(u.dot(info.hessian * u));
        try {
          estimates.push_back(local_b_prime(c, p.coords, info.value, dir, lambda));
        } catch (const FinslerError&) {
        }
      }
    }
    if (!estimates.empty()) {
      double sum = 0.0;
      for (double e : estimates) sum += e;
      info.b_prime = sum / static_cast<double>(estimates.size());
      for (double h : info.unit_hessians) info.hessian_defect = std::max(info.hessian_defect, std::abs(h - 0.5 * info.b_prime));
    }
    const bool ok = info.kernel_dim == info.tangent_dim && info.transversal_nondegenerate;
    report.verdict = report.verdict && ok;
    report.critical_points.push_back(std::move(info));
  }
  return report;
}

}  // namespace finsler
