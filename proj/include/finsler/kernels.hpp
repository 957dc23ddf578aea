#pragma once

// Per-item loops over sample points and probe geodesics. Each kernel has a serial reference
// and an OpenMP version producing identical results; failures are captured per item.

#include <optional>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/geodesic.hpp"

namespace finsler {

template <class T>
struct Outcome {
  std::optional<T> value;
  ErrorCode error = ErrorCode::EvalError;
  std::string message;

  bool ok() const { return value.has_value(); }
};

/// F(grad f)^2 at each point.
std::vector<Outcome<double>> squared_gradient_norms_serial(const Manifold& M, const std::vector<ChartPoint>& points);
std::vector<Outcome<double>> squared_gradient_norms_parallel(const Manifold& M, const std::vector<ChartPoint>& points);

/// integrate_to_level from each launch vector.
std::vector<Outcome<CrossingEvent>> shoot_to_level_serial(const Manifold& M, const std::vector<ChartVector>& launches,
                                                          double target, const IntegratorOptions& options);
std::vector<Outcome<CrossingEvent>> shoot_to_level_parallel(const Manifold& M,
                                                            const std::vector<ChartVector>& launches, double target,
                                                            const IntegratorOptions& options);

/// integrate_to_stationary from each launch vector.
std::vector<Outcome<CrossingEvent>> shoot_to_stationary_serial(const Manifold& M,
                                                               const std::vector<ChartVector>& launches,
                                                               const IntegratorOptions& options);
std::vector<Outcome<CrossingEvent>> shoot_to_stationary_parallel(const Manifold& M,
                                                                 const std::vector<ChartVector>& launches,
                                                                 const IntegratorOptions& options);

/// exp_map of each vector.
std::vector<Outcome<ChartPoint>> exp_map_serial(const Manifold& M, const std::vector<ChartVector>& vectors,
                                                double step);
std::vector<Outcome<ChartPoint>> exp_map_parallel(const Manifold& M, const std::vector<ChartVector>& vectors,
                                                  double step);

}  // namespace finsler
