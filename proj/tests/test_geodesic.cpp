#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "finsler/errors.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/scenario.hpp"
#include "support.hpp"

using namespace finsler;
using test_support::Rng;

namespace {

Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

ErrorCode code_of(const std::function<void()>& action) {
  try {
    action();
  } catch (const FinslerError& e) {
    return e.code();
  }
  return ErrorCode::EvalError;
}

const Manifold& example(const std::string& name) {
  static std::map<std::string, Manifold> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, build_manifold(load_example(name))).first;
  return it->second;
}

ChartVector unit_gradient(const Manifold& M, const ChartPoint& p) {
  const Chart& c = M.chart(p.chart);
  const GradientResult g = finsler_gradient(c.metric, c.field, p.coords);
  return {p.chart, p.coords, g.gradient.components / g.finsler_norm};
}

// F-length of a polyline, midpoint rule on each of `sub` pieces per edge.
double polyline_length(const MetricSpec& F, const std::vector<Vec>& nodes, int sub) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const Vec d = (nodes[k + 1] - nodes[k]) / sub;
    for (int j = 0; j < sub; ++j) total += eval_metric(F, {Vec(nodes[k] + (j + 0.5) * d), d});
  }
  return total;
}

}  // namespace

TEST_CASE("spray of a constant metric vanishes") {
  Rng rng(41);
  for (int k = 0; k < 20; ++k) {
    const auto draw = test_support::random_randers(rng, 2);
    CHECK(spray_coefficients(draw.metric, {rng.vector(2), rng.nonzero(2)}).norm() <= 1e-12);
  }
}

TEST_CASE("Riemannian spray is minus the Christoffel contraction") {
  // h = diag(1, e^{2x}): Gamma^x_yy = -e^{2x}, Gamma^y_xy = 1.
  const RiemannianMetric h(2, [](const Vec& x) {
    Mat m = Mat::Identity(2, 2);
    m(1, 1) = std::exp(2 * x(0));
    return m;
  });
  const MetricSpec F = MetricSpec::riemannian(h);
  Rng rng(42);
  for (int k = 0; k < 20; ++k) {
    const Vec x = rng.vector(2, -0.5, 0.5);
    const Vec v = rng.nonzero(2);
    const Vec expected = vec({std::exp(2 * x(0)) * v(1) * v(1), -2 * v(0) * v(1)});
    CHECK((spray_coefficients(F, {x, v}) - expected).norm() <= 1e-6 * (1 + expected.norm()));
  }
}

TEST_CASE("radial geodesics of the radial-wind disc stay radial") {
  const MetricSpec& F = example("disc-radial").chart(0).metric;
  const Vec a = spray_coefficients(F, {vec({0.3, 0}), vec({1, 0})});
  CHECK(std::abs(a(1)) <= 1e-10 * (1 + a.norm()));
  CHECK(code_of([&] { spray_coefficients(F, {vec({0.3, 0}), vec({0, 0})}); }) == ErrorCode::ZeroVector);
}

TEST_CASE("straight lines in constant metrics") {
  const Manifold& M = example("minkowski-randers-distance");
  const GeodesicTrajectory t = integrate_geodesic(M, {0, vec({0, 0}), vec({1, 0})}, 1.0);
  CHECK((t.back().state.base - vec({1, 0})).norm() <= 1e-12);
  CHECK(t.arc_length() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  Rng rng(43);
  for (int k = 0; k < 20; ++k) {
    const auto draw = test_support::random_randers(rng, rng.integer(2, 3));
    const Vec x0 = rng.vector(static_cast<int>(draw.h.rows()));
    const Vec v0 = rng.nonzero(static_cast<int>(draw.h.rows()));
    const GeodesicTrajectory g = integrate_geodesic(draw.metric, {x0, v0}, 1.0, 0.01);
    double deviation = 0.0;
    for (const GeodesicSample& s : g.samples) {
      deviation = std::max(deviation, (s.state.base - (x0 + s.time * v0)).norm());
    }
    CHECK(deviation <= 1e-9);
  }
}

TEST_CASE("Euclidean unit-speed geodesic") {
  const Manifold& M = example("euclidean-linear");
  const Vec v = vec({0.6, 0.8});
  const GeodesicTrajectory t = integrate_geodesic(M.chart(0).metric, {vec({0, 0}), v}, 3.0);
  CHECK((t.back().state.base - 3 * v).norm() <= 1e-12);
  CHECK(t.arc_length() == doctest::Approx(3.0).epsilon(1e-12));
  for (std::size_t i = 1; i < t.samples.size(); ++i) CHECK(t.samples[i].time > t.samples[i - 1].time);
}

TEST_CASE("great circle on the round sphere") {
  const Manifold& M = example("round-sphere-height");
  // Equator point (1, 0, 0), heading north at unit speed.
  const GeodesicTrajectory t = integrate_geodesic(M, {0, vec({0, 0}), vec({0, 1})}, std::numbers::pi);
  const AmbientVec end = M.ambient(t.back().state.point());
  CHECK((end - Eigen::Vector3d(-1, 0, 0)).norm() <= 1e-5);
  CHECK(t.arc_length() == doctest::Approx(std::numbers::pi).epsilon(1e-6));
  CHECK(t.speed_drift <= 1e-6);
}

TEST_CASE("fourth-order speed drift") {
  const Manifold& M = example("randers-sphere-height");
  const ChartVector v0{0, vec({0.2, 0.1}), vec({0.7, 0.9})};
  std::vector<double> drift;
  for (double h : {0.08, 0.04, 0.02}) drift.push_back(integrate_geodesic(M, v0, 1.0, h).speed_drift);
  CAPTURE(drift[0]);
  CAPTURE(drift[1]);
  CAPTURE(drift[2]);
  CHECK(drift[0] / drift[1] >= 8.0);
  CHECK(drift[1] / drift[2] >= 8.0);
  const GeodesicTrajectory fine = integrate_geodesic(M, v0, 1.0);
  CHECK(fine.speed_drift <= 1e-6 * fine.initial_speed);
}

TEST_CASE("exponential map") {
  const Manifold& M = example("minkowski-randers-distance");
  CHECK((exp_map(M.chart(0).metric, {vec({0.3, -0.2}), vec({0, 0})}) - vec({0.3, -0.2})).norm() == 0.0);
  Rng rng(44);
  for (int k = 0; k < 10; ++k) {
    const Vec x = rng.vector(2);
    const Vec v = rng.nonzero(2);
    CHECK((exp_map(M.chart(0).metric, {x, v}) - (x + v)).norm() <= 1e-12);
  }
  const ChartPoint p = exp_map(example("euclidean-linear"), {0, vec({0.1, 0.2}), vec({0.3, -0.4})});
  CHECK((p.coords - vec({0.4, -0.2})).norm() <= 1e-12);
  CHECK(code_of([] { exp_map(example("euclidean-linear"), {0, vec({0.5, 0}), vec({2, 0})}); }) ==
        ErrorCode::LeftDomain);
}

TEST_CASE("orthogonality defects") {
  const Manifold& E = example("euclidean-linear");
  CHECK(orthogonality_defect(E.chart(0).metric, {vec({0, 0}), vec({1, 0})}, {vec({0, 1})}) <= 1e-15);

  const Manifold& M = example("minkowski-randers-distance");
  const Chart& c = M.chart(0);
  const Vec p = vec({1, 0});
  const ChartVector g = unit_gradient(M, {0, p});
  const auto basis = level_tangent_basis(c.field.differential(p));
  REQUIRE(basis.size() == 1);
  CHECK(orthogonality_defect(c.metric, g.local(), basis) <= 1e-8);
  // The unit sphere is not orthogonal to the reversed ray off the wind axis.
  const Vec q = vec({0, 1.0 / std::sqrt(0.75)});
  const ChartVector gq = unit_gradient(M, {0, q});
  const auto bq = level_tangent_basis(c.field.differential(q));
  CHECK(orthogonality_defect(c.metric, gq.local(), bq) <= 1e-8);
  CHECK(orthogonality_defect(c.metric, {q, Vec(-gq.components)}, bq) >= 0.05);
}

TEST_CASE("level tangent basis is orthonormal and annihilated by df") {
  Rng rng(45);
  for (int n = 1; n <= 3; ++n) {
    const Vec df = rng.nonzero(n);
    const auto basis = level_tangent_basis(df);
    CHECK(static_cast<int>(basis.size()) == n - 1);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      CHECK(std::abs(df.dot(basis[i])) <= 1e-12);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        CHECK(basis[i].dot(basis[j]) == doctest::Approx(i == j ? 1.0 : 0.0));
      }
    }
  }
}

TEST_CASE("integration to a level") {
  SUBCASE("radial-wind disc from 0.04 to 0.25") {
    const Manifold& M = example("disc-radial");
    const CrossingEvent e = integrate_to_level(M, unit_gradient(M, {0, vec({0.2, 0})}), 0.25);
    CHECK(e.arc_length == doctest::Approx(std::log(1.25)).epsilon(1e-4));
    CHECK(std::abs(M.value(e.point) - 0.25) <= 1e-10);
    CHECK(e.level_value == 0.25);
    CHECK(e.orthogonality_defect <= 1e-6);
  }
  SUBCASE("Minkowski spheres one unit apart") {
    const Manifold& M = example("minkowski-randers-distance");
    Rng rng(46);
    for (int k = 0; k < 8; ++k) {
      const double angle = rng.uniform(0, 2 * std::numbers::pi);
      ChartPoint p{0, vec({std::cos(angle), std::sin(angle)})};
      p.coords /= M.value(p);
      const CrossingEvent e = integrate_to_level(M, unit_gradient(M, p), 2.0);
      CHECK(e.arc_length == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("a lower target is never reached going up") {
    const Manifold& M = example("disc-radial");
    CHECK(code_of([&] { integrate_to_level(M, unit_gradient(M, {0, vec({0.2, 0})}), 0.01, {1e-3, 2.0}); }) ==
          ErrorCode::NeverReached);
  }
}

TEST_CASE("reversed curves are geodesics of the reverse metric") {
  const MetricSpec& F = example("disc-radial").chart(0).metric;
  const MetricSpec back = reverse_metric(F);
  Rng rng(47);
  for (int k = 0; k < 5; ++k) {
    const Vec x0 = rng.vector(2, -0.3, 0.3);
    const Vec v0 = 0.3 * rng.nonzero(2) / 2.0;
    const GeodesicTrajectory there = integrate_geodesic(F, {x0, v0}, 1.0);
    const GeodesicSample& end = there.back();
    const GeodesicTrajectory home = integrate_geodesic(back, {end.state.base, Vec(-end.state.components)}, 1.0);
    CHECK((home.back().state.base - x0).norm() <= 1e-6);
  }
}

TEST_CASE("gradient geodesics beat perturbed paths") {
  const Manifold& M = example("disc-radial");
  const MetricSpec& F = M.chart(0).metric;
  const ChartVector start = unit_gradient(M, {0, vec({0.2, 0})});
  const CrossingEvent e = integrate_to_level(M, start, 0.25);
  const Vec a = start.base;
  const Vec b = e.point.coords;
  Rng rng(48);
  for (int k = 0; k < 20; ++k) {
    std::vector<Vec> nodes{a};
    for (int j = 1; j < 5; ++j) {
      const Vec on_line = a + (b - a) * (j / 5.0);
      nodes.push_back(on_line + rng.vector(2, -0.05, 0.05));
    }
    nodes.push_back(b);
    CHECK(polyline_length(F, nodes, 50) >= e.arc_length - 1e-9);
  }
}

TEST_CASE("trajectory CSV") {
  const GeodesicTrajectory t =
      integrate_geodesic(example("euclidean-linear"), {0, vec({0, 0}), vec({0.5, 0})}, 0.01, 0.005);
  std::ostringstream out;
  write_trajectory_csv(out, t);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,chart,x0,x1,v0,v1,arc_length");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == static_cast<int>(t.samples.size()));
}
