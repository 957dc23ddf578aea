#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "finsler/errors.hpp"
#include "finsler/metric.hpp"
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

MetricSpec constant_randers(const Vec& w) {
  return MetricSpec::randers(RiemannianMetric::euclidean(static_cast<int>(w.size())), WindField::constant(w));
}

double half_square(const MetricSpec& F, const Vec& x, const Vec& y) {
  const double f = eval_metric(F, {x, y});
  return 0.5 * f * f;
}

ErrorCode code_of(const std::function<void()>& action) {
  try {
    action();
  } catch (const FinslerError& e) {
    return e.code();
  }
  return ErrorCode::EvalError;  // sentinel: nothing thrown
}

}  // namespace

TEST_CASE("Randers norm of a constant half-speed wind") {
  const MetricSpec F = constant_randers(vec({0.5, 0.0}));
  const Vec o = vec({0, 0});
  // With the wind, covering one unit downwind takes 1/1.5, upwind 1/0.5.
  CHECK(eval_metric(F, {o, vec({1, 0})}) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(eval_metric(F, {o, vec({-1, 0})}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eval_metric(F, {o, vec({0, 1})}) == doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-14));
  CHECK(eval_metric(F, {o, vec({0, 0})}) == 0.0);
}

TEST_CASE("Randers conversion agrees with Zermelo navigation") {
  Rng rng(21);
  for (int k = 0; k < 100; ++k) {
    const int n = rng.integer(1, 3);
    const auto draw = test_support::random_randers(rng, n, 0.95);
    const Vec x = rng.vector(n);
    const Vec v = rng.nonzero(n);
    const double expected = test_support::zermelo_norm(draw.h, draw.wind, v);
    CHECK(eval_metric(draw.metric, {x, v}) == doctest::Approx(expected).epsilon(1e-10));
    const auto z = draw.metric.zermelo(x);
    REQUIRE(z.has_value());
    CHECK((z->h - draw.h).norm() == doctest::Approx(0.0));
    CHECK((z->wind - draw.wind).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("Riemannian norm and tensor") {
  Rng rng(22);
  const Mat h = rng.spd(3);
  const MetricSpec F = MetricSpec::riemannian(RiemannianMetric::constant(h));
  for (int k = 0; k < 20; ++k) {
    const Vec x = rng.vector(3);
    const Vec v = rng.nonzero(3);
    CHECK(eval_metric(F, {x, v}) == doctest::Approx(std::sqrt(v.dot(h * v))).epsilon(1e-14));
    CHECK((fundamental_tensor(F, {x, v}) - h).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("tensor identities on random Randers draws") {
  Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const int n = rng.integer(2, 3);
    const auto draw = test_support::random_randers(rng, n);
    const MetricSpec& F = draw.metric;
    const Vec x = rng.vector(n);
    const Vec v = rng.nonzero(n);
    const Vec u = rng.nonzero(n);
    const Vec w = rng.nonzero(n);
    const double lambda = rng.uniform(0.2, 5.0);
    const Mat g = fundamental_tensor(F, {x, v});
    const double Fv = eval_metric(F, {x, v});

    CHECK(eval_metric(F, {x, lambda * v}) == doctest::Approx(lambda * Fv).epsilon(1e-13));
    CHECK((fundamental_tensor(F, {x, lambda * v}) - g).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(std::abs(v.dot(g * v) - Fv * Fv) <= 1e-8 * Fv * Fv);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::LLT<Mat>(g).info() == Eigen::Success);

    // g_v(u, w) = d2/ds dt (F^2/2)(v + s u + t w) at 0, against a test-side stencil.
    // Step scaled to v so the stencil's truncation error stays relative.
    const double e = 2e-4 * v.norm() / std::max(u.norm(), w.norm());
    const double mixed = (half_square(F, x, v + e * u + e * w) - half_square(F, x, v + e * u - e * w) -
                          half_square(F, x, v - e * u + e * w) + half_square(F, x, v - e * u - e * w)) /
                         (4 * e * e);
    CHECK(std::abs(u.dot(g * w) - mixed) <= 1e-6 * (1.0 + std::abs(mixed)));

    // The Cartan tensor vanishes whenever v is one of its arguments.
    CHECK(std::abs(cartan_tensor(F, {x, v}, v, u, w)) <= 1e-6);
    CHECK(std::abs(cartan_tensor(F, {x, v}, u, v, w)) <= 1e-6);
  }
}

TEST_CASE("Cartan tensor vanishes for Riemannian metrics and not for Randers") {
  const Vec x = vec({0, 0});
  const Vec v = vec({1, 0.3});
  const Vec u = vec({0, 1});
  const MetricSpec R = MetricSpec::riemannian(RiemannianMetric::euclidean(2));
  CHECK(std::abs(cartan_tensor(R, {x, v}, u, u, u)) <= 1e-12);
  CHECK(std::abs(cartan_tensor(constant_randers(vec({0.5, 0})), {x, v}, u, u, u)) > 1e-3);
}

TEST_CASE("analytic and finite-difference derivative modes agree") {
  const Manifold M = build_manifold(load_example("disc-radial"));
  const MetricSpec& analytic = M.chart(0).metric;
  const MetricSpec fd = analytic.with_derivative_mode(DerivativeMode::FiniteDifference);
  CHECK(fd.derivative_mode() == DerivativeMode::FiniteDifference);
  Rng rng(24);
  for (int k = 0; k < 30; ++k) {
    const Vec x = rng.vector(2, -0.6, 0.6);
    const Vec v = rng.nonzero(2);
    const SprayJet a = spray_jet(analytic, {x, v});
    const SprayJet b = spray_jet(fd, {x, v});
    CHECK(std::abs(a.vertical.F - b.vertical.F) <= 1e-14);
    CHECK((a.vertical.g - b.vertical.g).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((a.L_x - b.L_x).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((a.L_yx - b.L_yx).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("custom metrics run on finite differences only") {
  const MetricSpec quartic = MetricSpec::custom(2, [](const Vec&, const Vec& y) {
    return std::pow(std::pow(y(0), 4) + std::pow(y(1), 4), 0.25);
  });
  CHECK(quartic.kind() == MetricKind::Custom);
  CHECK(code_of([&] { (void)quartic.with_derivative_mode(DerivativeMode::Analytic); }) == ErrorCode::ValidationError);
  const Vec x = vec({0, 0});
  const Vec v = vec({1, 0.5});
  const Mat g = fundamental_tensor(quartic, {x, v});
  CHECK(std::abs(v.dot(g * v) - std::pow(eval_metric(quartic, {x, v}), 2)) <= 1e-6);
}

TEST_CASE("reverse metric") {
  Rng rng(25);
  const auto draw = test_support::random_randers(rng, 2);
  const MetricSpec back = reverse_metric(draw.metric);
  const MetricSpec twice = reverse_metric(back);
  CHECK(back.kind() == MetricKind::Randers);
  CHECK(reverse_metric(MetricSpec::custom(2, [](const Vec&, const Vec& y) { return y.norm(); })).kind() ==
        MetricKind::Reverse);
  for (int k = 0; k < 20; ++k) {
    const Vec x = rng.vector(2);
    const Vec v = rng.nonzero(2);
    CHECK(eval_metric(back, {x, v}) == doctest::Approx(eval_metric(draw.metric, {x, Vec(-v)})).epsilon(1e-14));
    CHECK(eval_metric(twice, {x, v}) == doctest::Approx(eval_metric(draw.metric, {x, v})).epsilon(1e-14));
    // Randers(h, W) reversed is the Randers metric of (h, -W).
    CHECK(eval_metric(back, {x, v}) ==
          doctest::Approx(test_support::zermelo_norm(draw.h, Vec(-draw.wind), v)).epsilon(1e-10));
  }
}

TEST_CASE("reverse of a variable-wind metric keeps its spray consistent") {
  const Manifold M = build_manifold(load_example("disc-radial"));
  const MetricSpec back = reverse_metric(M.chart(0).metric);
  const MetricSpec fd = back.with_derivative_mode(DerivativeMode::FiniteDifference);
  const Vec x = vec({0.2, -0.3});
  const Vec v = vec({0.4, 0.9});
  const SprayJet a = spray_jet(back, {x, v});
  const SprayJet b = spray_jet(fd, {x, v});
  CHECK((a.L_x - b.L_x).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((a.L_yx - b.L_yx).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("error conditions") {
  const MetricSpec strong = constant_randers(vec({1.2, 0}));
  CHECK(code_of([&] { eval_metric(strong, {vec({0, 0}), vec({1, 0})}); }) == ErrorCode::NonConvexWind);
  const MetricSpec F = constant_randers(vec({0.3, 0}));
  CHECK(code_of([&] { fundamental_tensor(F, {vec({0, 0}), vec({0, 0})}); }) == ErrorCode::ZeroVector);
  CHECK(code_of([&] { eval_metric(F, {vec({0, 0, 0}), vec({1, 0, 0})}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { eval_metric(F, {vec({0, 0}), vec({1, 0, 0})}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] {
          MetricSpec::randers(RiemannianMetric::euclidean(2), WindField::constant(vec({0.1, 0.1, 0.1})));
        }) == ErrorCode::DimensionMismatch);
}
