#include "finsler/geodesic.hpp"

#include <cmath>
#include <ostream>

#include "finsler/errors.hpp"
#include "finsler/format.hpp"

namespace finsler {

namespace {

struct State {
  std::size_t chart = 0;
  Vec x;
  Vec v;
  double s = 0.0;
};

struct Rate {
  Vec dx;
  Vec dv;
  double ds;
};

Rate rate(const Chart& c, const Vec& x, const Vec& v) {
  if (!c.domain.contains(x)) {
    throw FinslerError(ErrorCode::LeftDomain, "trajectory left chart '" + c.name + "' (" + c.domain.describe() + ")");
  }
  const TangentVector tv{x, v};
  return {v, spray_coefficients(c.metric, tv), eval_metric(c.metric, tv)};
}

State rk4_step(const Chart& c, const State& S, double h) {
  const Rate k1 = rate(c, S.x, S.v);
  const Rate k2 = rate(c, S.x + 0.5 * h * k1.dx, S.v + 0.5 * h * k1.dv);
  const Rate k3 = rate(c, S.x + 0.5 * h * k2.dx, S.v + 0.5 * h * k2.dv);
  const Rate k4 = rate(c, S.x + h * k3.dx, S.v + h * k3.dv);
  State out;
  out.chart = S.chart;
  out.x = S.x + (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  out.v = S.v + (h / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  out.s = S.s + (h / 6.0) * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds);
  if (!c.domain.contains(out.x)) {
    throw FinslerError(ErrorCode::LeftDomain, "trajectory left chart '" + c.name + "' (" + c.domain.describe() + ")");
  }
  return out;
}

State settle(const Manifold& M, const State& S) {
  const ChartVector moved = M.settle(ChartVector{S.chart, S.x, S.v});
  return {moved.chart, moved.base, moved.components, S.s};
}

void require_step(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw FinslerError(ErrorCode::ValidationError, "step must be positive");
}

bool crossed(double before, double after) { return (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0); }

// Refines a sign change of g over one step of size h from S by bisection on the step length.
template <class G>
std::pair<State, double> bisect_step(const Manifold& M, const State& S, double h, double g0, G&& g) {
  const Chart& c = M.chart(S.chart);
  double lo = 0.0;
  double hi = h;
  double g_lo = g0;
  State s_lo = S;
  State s_hi = rk4_step(c, S, h);
  double g_hi = g(s_hi);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const State s_mid = rk4_step(c, S, mid);
    const double g_mid = g(s_mid);
    if ((g_mid < 0.0) == (g_lo < 0.0) && g_mid != 0.0) {
      lo = mid;
      g_lo = g_mid;
      s_lo = s_mid;
    } else {
      hi = mid;
      g_hi = g_mid;
      s_hi = s_mid;
    }
  }
  if (std::abs(g_lo) < std::abs(g_hi)) return {s_lo, lo};
  return {s_hi, hi};
}

CrossingEvent make_event(const Manifold& M, const State& S, double time, bool with_defect) {
  const Chart& c = M.chart(S.chart);
  CrossingEvent e;
  e.time = time;
  e.point = {S.chart, S.x};
  e.velocity = S.v;
  e.level_value = c.field.value(S.x);
  e.arc_length = S.s;
  if (with_defect) {
    const Vec df = c.field.differential(S.x);
    if (df.norm() > 0.0) e.orthogonality_defect = orthogonality_defect(c.metric, {S.x, S.v}, level_tangent_basis(df));
  }
  return e;
}

template <class G>
CrossingEvent integrate_to_event(const Manifold& M, const ChartVector& v0, const IntegratorOptions& options,
                                 G&& g, bool level_event, const char* what) {
  require_step(options.step);
  if (v0.components.isZero(0.0)) throw FinslerError(ErrorCode::ZeroVector, "initial velocity is zero");
  State S{v0.chart, v0.base, v0.components, 0.0};
  double t = 0.0;
  try {
    S = settle(M, S);
    if (level_event && g(S) == 0.0) return make_event(M, S, 0.0, true);
    while (t < options.max_time) {
      S = settle(M, S);
      const double g0 = g(S);
      const State next = rk4_step(M.chart(S.chart), S, options.step);
      const double g1 = g(next);
      const bool hit = level_event ? crossed(g0, g1) : (g0 > 0.0 && g1 <= 0.0);
      if (hit) {
        const auto [refined, tau] = bisect_step(M, S, options.step, g0, g);
        return make_event(M, refined, t + tau, level_event);
      }
      S = next;
      t += options.step;
    }
  } catch (const FinslerError& e) {
    if (e.code() != ErrorCode::LeftDomain) throw;
    throw FinslerError(ErrorCode::NeverReached, std::string(what) + " not reached before leaving the domain (" +
                                                    e.what() + ")");
  }
  throw FinslerError(ErrorCode::NeverReached,
                     std::string(what) + " not reached within time " + format_double(options.max_time));
}

}  // namespace

Vec spray_coefficients(const MetricSpec& F, const TangentVector& v) {
  const SprayJet jet = spray_jet(F, v);
  const Vec rhs = jet.L_x - jet.L_yx * v.components;
  Eigen::LDLT<Mat> ldlt(jet.vertical.g);
  const Vec d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-14 * std::max(1.0, d.cwiseAbs().maxCoeff()))) {
    throw FinslerError(ErrorCode::SingularTensor, "fundamental tensor is numerically singular");
  }
  return ldlt.solve(rhs);
}

GeodesicTrajectory integrate_geodesic(const Manifold& M, const ChartVector& v0, double t_end, double step) {
  require_step(step);
  if (!(t_end >= 0.0)) throw FinslerError(ErrorCode::ValidationError, "t_end must be nonnegative");
  if (v0.components.isZero(0.0)) throw FinslerError(ErrorCode::ZeroVector, "initial velocity is zero");
  const auto n = static_cast<long>(std::max(1.0, std::ceil(t_end / step - 1e-9)));
  const double h = t_end / static_cast<double>(n);
  GeodesicTrajectory out;
  State S = settle(M, {v0.chart, v0.base, v0.components, 0.0});
  out.initial_speed = eval_metric(M.chart(S.chart).metric, {S.x, S.v});
  out.samples.reserve(static_cast<std::size_t>(n) + 1);
  out.samples.push_back({0.0, {S.chart, S.x, S.v}, 0.0});
  if (t_end == 0.0) return out;
  for (long i = 1; i <= n; ++i) {
    S = settle(M, S);
    S = rk4_step(M.chart(S.chart), S, h);
    const double speed = eval_metric(M.chart(S.chart).metric, {S.x, S.v});
    out.speed_drift = std::max(out.speed_drift, std::abs(speed - out.initial_speed));
    out.samples.push_back({static_cast<double>(i) * h, {S.chart, S.x, S.v}, S.s});
  }
  return out;
}

GeodesicTrajectory integrate_geodesic(const MetricSpec& F, const Domain& domain, const TangentVector& v0,
                                      double t_end, double step) {
  require_dimension(F, v0);
  const Manifold M = Manifold::single(F, ScalarField::zero(F.dimension()), domain);
  return integrate_geodesic(M, ChartVector{0, v0.base, v0.components}, t_end, step);
}

GeodesicTrajectory integrate_geodesic(const MetricSpec& F, const TangentVector& v0, double t_end, double step) {
  return integrate_geodesic(F, Domain::unbounded(F.dimension()), v0, t_end, step);
}

ChartPoint exp_map(const Manifold& M, const ChartVector& v, double step) {
  if (v.components.isZero(0.0)) return v.point();
  const GeodesicSample& end = integrate_geodesic(M, v, 1.0, step).back();
  return end.state.point();
}

Vec exp_map(const MetricSpec& F, const TangentVector& v, double step) {
  require_dimension(F, v);
  if (v.components.isZero(0.0)) return v.base;
  return integrate_geodesic(F, v, 1.0, step).back().state.base;
}

double orthogonality_defect(const MetricSpec& F, const TangentVector& velocity, const std::vector<Vec>& basis) {
  const VerticalJet jet = vertical_jet(F, velocity);
  const Vec pairing = jet.F * jet.dF;
  double worst = 0.0;
  for (const Vec& u : basis) {
    const double scale = std::sqrt(u.dot(jet.g * u));
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(pairing.dot(u)) / (jet.F * scale));
  }
  return worst;
}

std::vector<Vec> level_tangent_basis(const Vec& df) {
  const auto n = df.size();
  std::vector<Vec> basis;
  if (n < 2) return basis;
  const Mat column = df;
  Eigen::HouseholderQR<Mat> qr(column);
  const Mat Q = qr.householderQ() * Mat::Identity(n, n);
  for (Eigen::Index k = 1; k < n; ++k) basis.emplace_back(Q.col(k));
  return basis;
}

CrossingEvent integrate_to_level(const Manifold& M, const ChartVector& v0, double target,
                                 const IntegratorOptions& options) {
  auto g = [&](const State& S) { return M.chart(S.chart).field.value(S.x) - target; };
  return integrate_to_event(M, v0, options, g, true, "target level");
}

CrossingEvent integrate_to_stationary(const Manifold& M, const ChartVector& v0, const IntegratorOptions& options) {
  auto g = [&](const State& S) { return M.chart(S.chart).field.differential(S.x).dot(S.v); };
  return integrate_to_event(M, v0, options, g, false, "stationary point of f");
}

void write_trajectory_csv(std::ostream& out, const GeodesicTrajectory& trajectory) {
  if (trajectory.samples.empty()) return;
  const auto n = trajectory.samples.front().state.base.size();
  out << "t,chart";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < n; ++i) out << ",v" << i;
  out << ",arc_length\n";
  for (const GeodesicSample& s : trajectory.samples) {
    out << format_double(s.time) << ',' << s.state.chart;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(s.state.base(i));
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(s.state.components(i));
    out << ',' << format_double(s.arc_length) << '\n';
  }
}

}  // namespace finsler
