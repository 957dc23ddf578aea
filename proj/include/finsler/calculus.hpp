#pragma once

#include <functional>
#include <optional>
#include <string>

#include "finsler/expression.hpp"
#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Smooth function on a chart with value, differential and Hessian oracles. Missing
/// oracles fall back to finite differences of the value.
class ScalarField {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;
  using HessianFn = std::function<Mat(const Vec&)>;

  ScalarField(std::string name, int dimension, ValueFn value, GradientFn differential = {},
              HessianFn hessian = {});

  /// Differential and Hessian by symbolic differentiation of the expression.
  static ScalarField from_expression(std::string name, int dimension, const expr::Expression& f);
  static ScalarField zero(int dimension);

  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }
  bool has_closed_form_derivatives() const { return static_cast<bool>(differential_); }

  double value(const Vec& x) const { return value_(x); }
  Vec differential(const Vec& x) const;
  Covector differential_at(const Vec& x) const { return {x, differential(x)}; }
  Mat hessian(const Vec& x) const;

  /// Same field with every derivative taken by finite differences.
  ScalarField finite_difference_only() const;

 private:
  std::string name_;
  int dimension_;
  ValueFn value_;
  GradientFn differential_;
  HessianFn hessian_;
};

/// Below this norm df is treated as zero and the gradient direction as undefined.
inline constexpr double kCriticalGradientNorm = 1e-12;
/// Upper bound on |df| for a point to count as critical in Hessian queries.
inline constexpr double kCriticalPointTolerance = 1e-8;

/// L(v) = g_v(v, .) = F(v) F_y(v).
Covector legendre(const MetricSpec& F, const TangentVector& v);

/// Inverse Legendre map by damped Newton on v -> F(v)^2/2 - omega(v). The iteration count
/// is written to `iterations` when given.
TangentVector legendre_inverse(const MetricSpec& F, const Covector& omega, int* iterations = nullptr);

struct RandersLemmaDefects {
  double vector_defect = 0.0;  // h-norm of the vector identity residual
  double scalar_defect = 0.0;  // |Z(grad f) - |grad_h f|_h - df(W)|
};

struct GradientResult {
  TangentVector gradient;
  double finsler_norm = 0.0;
  std::optional<TangentVector> riemannian_gradient;  // h^-1 df, Randers metrics only
  std::optional<RandersLemmaDefects> lemma_defects;
  int newton_iterations = 0;
};

GradientResult finsler_gradient(const MetricSpec& F, const ScalarField& f, const Vec& p);

/// Both sides of the Randers gradient relations computed independently; throws
/// ValidationError for metrics without Zermelo data.
RandersLemmaDefects check_randers_gradient_lemma(const MetricSpec& F, const ScalarField& f, const Vec& p);

/// Hess f(grad f, grad f) = (1/2) D_{grad f}[F(grad f)^2] by a 5-point stencil.
double hessian_along_gradient(const MetricSpec& F, const ScalarField& f, const Vec& p);

/// Symmetrized coordinate Hessian; throws NotCritical when |df_p| > tolerance.
Mat coordinate_hessian_at_critical(const ScalarField& f, const Vec& p,
                                   double tolerance = kCriticalPointTolerance);

}  // namespace finsler
