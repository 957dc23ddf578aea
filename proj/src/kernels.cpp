#include "finsler/kernels.hpp"

#include "finsler/calculus.hpp"

namespace finsler {

namespace {

template <class T, class Fn>
Outcome<T> capture(Fn&& fn) {
  Outcome<T> out;
  try {
    out.value = fn();
  } catch (const FinslerError& e) {
    out.error = e.code();
    out.message = e.what();
  }
  return out;
}

template <class T, class Fn>
std::vector<Outcome<T>> run_serial(std::size_t n, Fn&& item) {
  std::vector<Outcome<T>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = capture<T>([&] { return item(i); });
  return out;
}

template <class T, class Fn>
std::vector<Outcome<T>> run_parallel(std::size_t n, Fn&& item) {
  std::vector<Outcome<T>> out(n);
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = capture<T>([&] { return item(k); });
  }
  return out;
}

double squared_norm_at(const Manifold& M, const ChartPoint& p) {
  const Chart& c = M.chart(p.chart);
  const GradientResult g = finsler_gradient(c.metric, c.field, p.coords);
  return g.finsler_norm * g.finsler_norm;
}

}  // namespace

std::vector<Outcome<double>> squared_gradient_norms_serial(const Manifold& M, const std::vector<ChartPoint>& points) {
  return run_serial<double>(points.size(), [&](std::size_t i) { return squared_norm_at(M, points[i]); });
}

std::vector<Outcome<double>> squared_gradient_norms_parallel(const Manifold& M,
                                                             const std::vector<ChartPoint>& points) {
  return run_parallel<double>(points.size(), [&](std::size_t i) { return squared_norm_at(M, points[i]); });
}

std::vector<Outcome<CrossingEvent>> shoot_to_level_serial(const Manifold& M, const std::vector<ChartVector>& launches,
                                                          double target, const IntegratorOptions& options) {
  return run_serial<CrossingEvent>(launches.size(),
                                   [&](std::size_t i) { return integrate_to_level(M, launches[i], target, options); });
}

std::vector<Outcome<CrossingEvent>> shoot_to_level_parallel(const Manifold& M,
                                                            const std::vector<ChartVector>& launches, double target,
                                                            const IntegratorOptions& options) {
  return run_parallel<CrossingEvent>(
      launches.size(), [&](std::size_t i) { return integrate_to_level(M, launches[i], target, options); });
}

std::vector<Outcome<CrossingEvent>> shoot_to_stationary_serial(const Manifold& M,
                                                               const std::vector<ChartVector>& launches,
                                                               const IntegratorOptions& options) {
  return run_serial<CrossingEvent>(launches.size(),
                                   [&](std::size_t i) { return integrate_to_stationary(M, launches[i], options); });
}

std::vector<Outcome<CrossingEvent>> shoot_to_stationary_parallel(const Manifold& M,
                                                                 const std::vector<ChartVector>& launches,
                                                                 const IntegratorOptions& options) {
  return run_parallel<CrossingEvent>(
      launches.size(), [&](std::size_t i) { return integrate_to_stationary(M, launches[i], options); });
}

std::vector<Outcome<ChartPoint>> exp_map_serial(const Manifold& M, const std::vector<ChartVector>& vectors,
                                                double step) {
  return run_serial<ChartPoint>(vectors.size(), [&](std::size_t i) { return exp_map(M, vectors[i], step); });
}

std::vector<Outcome<ChartPoint>> exp_map_parallel(const Manifold& M, const std::vector<ChartVector>& vectors,
                                                  double step) {
  return run_parallel<ChartPoint>(vectors.size(), [&](std::size_t i) { return exp_map(M, vectors[i], step); });
}

}  // namespace finsler
