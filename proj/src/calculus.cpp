#include "finsler/calculus.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "finsler/errors.hpp"
#include "finsler/finite_difference.hpp"

namespace finsler {

namespace {

Vec unit(int dim, int k) {
  Vec e = Vec::Zero(dim);
  e(k) = 1.0;
  return e;
}

std::array<double, 3> padded(const Vec& x) {
  std::array<double, 3> vars{0.0, 0.0, 0.0};
  for (int i = 0; i < x.size() && i < 3; ++i) vars[static_cast<std::size_t>(i)] = x(i);
  return vars;
}

// Second derivatives from values alone lose half the digits at the first-derivative step.
constexpr double kSecondDerivativeStep = 1e-3;

}  // namespace

ScalarField::ScalarField(std::string name, int dimension, ValueFn value, GradientFn differential,
                         HessianFn hessian)
    : name_(std::move(name)),
      dimension_(dimension),
      value_(std::move(value)),
      differential_(std::move(differential)),
      hessian_(std::move(hessian)) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw FinslerError(ErrorCode::DimensionMismatch, "field dimension must be in [1, 3]");
  }
}

ScalarField ScalarField::from_expression(std::string name, int dimension, const expr::Expression& f) {
  if (f.max_variable() >= dimension) {
    throw FinslerError(ErrorCode::ValidationError,
                       "field '" + name + "' uses a variable beyond dimension " + std::to_string(dimension));
  }
  auto value = std::make_shared<expr::Program>(f);
  auto grad = std::make_shared<std::vector<expr::Program>>();
  auto hess = std::make_shared<std::vector<expr::Program>>();
  for (int i = 0; i < dimension; ++i) {
    const expr::Expression di = f.derivative(i);
    grad->emplace_back(di);
    for (int j = 0; j < dimension; ++j) hess->emplace_back(di.derivative(j));
  }
  const int n = dimension;
  return ScalarField(
      std::move(name), dimension, [value](const Vec& x) { return (*value)(padded(x).data()); },
      [grad, n](const Vec& x) {
        const auto vars = padded(x);
        Vec g(n);
        for (int i = 0; i < n; ++i) g(i) = (*grad)[static_cast<std::size_t>(i)](vars.data());
        return g;
      },
      [hess, n](const Vec& x) {
        const auto vars = padded(x);
        Mat H(n, n);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) H(i, j) = (*hess)[static_cast<std::size_t>(i * n + j)](vars.data());
        }
        return H;
      });
}

ScalarField ScalarField::zero(int dimension) {
  return ScalarField(
      "zero", dimension, [](const Vec&) { return 0.0; },
      [dimension](const Vec&) -> Vec { return Vec::Zero(dimension); },
      [dimension](const Vec&) -> Mat { return Mat::Zero(dimension, dimension); });
}

Vec ScalarField::differential(const Vec& x) const {
  if (differential_) return differential_(x);
  Vec g(dimension_);
  for (int k = 0; k < dimension_; ++k) {
    const Vec e = unit(dimension_, k);
    g(k) = fd::central_derivative([&](double t) { return value_(x + t * e); }, fd::kDefaultStep);
  }
  return g;
}

Mat ScalarField::hessian(const Vec& x) const {
  if (hessian_) return hessian_(x);
  Mat H(dimension_, dimension_);
  if (differential_) {
    for (int k = 0; k < dimension_; ++k) {
      const Vec e = unit(dimension_, k);
      H.col(k) = fd::central_derivative([&](double t) -> Vec { return differential_(x + t * e); },
                                        fd::kDefaultStep);
    }
    return 0.5 * (H + H.transpose());
  }
  for (int i = 0; i < dimension_; ++i) {
    for (int j = i; j < dimension_; ++j) {
      const Vec ei = unit(dimension_, i);
      const Vec ej = unit(dimension_, j);
      H(i, j) = fd::mixed_second_derivative([&](double t, double s) { return value_(x + t * ei + s * ej); },
                                            kSecondDerivativeStep);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

ScalarField ScalarField::finite_difference_only() const { return ScalarField(name_, dimension_, value_); }

// ---------------------------------------------------------------------------------------------

Covector legendre(const MetricSpec& F, const TangentVector& v) {
  const VerticalJet jet = vertical_jet(F, v);
  return {v.base, jet.F * jet.dF};
}

TangentVector legendre_inverse(const MetricSpec& F, const Covector& omega, int* iterations) {
  constexpr int kBudget = 50;
  constexpr double kTolerance = 1e-12;
  require_dimension(F, {omega.base, omega.components});
  const Vec& x = omega.base;
  const Vec& w = omega.components;
  const double scale = w.norm();
  if (scale == 0.0) throw FinslerError(ErrorCode::ZeroVector, "cannot invert the Legendre map at 0");
  // Finite-difference tensors carry ~1e-9 noise, so the stagnation floor is looser there.
  const bool analytic = F.derivative_mode() == DerivativeMode::Analytic && F.kind() != MetricKind::Custom;
  const double accept = analytic ? 1e-10 : 1e-6;

  Vec v;
  if (F.kind() == MetricKind::Custom) {
    v = w;
  } else {
    try {
      v = F.alpha_beta(x, false).A.ldlt().solve(w);
    } catch (const FinslerError& e) {
      if (e.code() == ErrorCode::NonConvexWind) throw;
      v = w;
    }
  }

  auto objective = [&](const Vec& y) {
    const double Fy = eval_metric(F, {x, y});
    return 0.5 * Fy * Fy - w.dot(y);
  };

  double residual = std::numeric_limits<double>::infinity();
  int k = 0;
  for (; k < kBudget; ++k) {
    const VerticalJet jet = vertical_jet(F, {x, v});
    const Vec r = jet.F * jet.dF - w;
    const double previous = residual;
    residual = r.norm();
    if (residual <= kTolerance * scale) break;
    if (residual >= previous && residual <= accept * scale) break;
    Eigen::LDLT<Mat> ldlt(jet.g);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw FinslerError(ErrorCode::SingularTensor, "fundamental tensor not positive definite");
    }
    const Vec step = -ldlt.solve(r);
    const double phi = objective(v);
    const double slope = r.dot(step);
    double t = 1.0;
    // Close to the root the objective is flat to rounding, so Armijo tests are meaningless
    // there; take the full Newton step.
    const bool local = residual <= 1e-6 * scale;
    while (!local && t > 1e-12) {
      const Vec trial = v + t * step;
      if (!trial.isZero(0.0) && objective(trial) <= phi + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (t <= 1e-12) {
      if (residual <= accept * scale) break;
      throw FinslerError(ErrorCode::NoConvergence, "line search stalled in Legendre inversion");
    }
    v += t * step;
  }
  if (k == kBudget && !(residual <= accept * scale)) {
    throw FinslerError(ErrorCode::NoConvergence, "Legendre inversion exceeded 50 Newton iterations");
  }
  if (iterations) *iterations = k;
  return {x, v};
}

RandersLemmaDefects check_randers_gradient_lemma(const MetricSpec& F, const ScalarField& f, const Vec& p) {
  const auto zermelo = F.zermelo(p);
  if (!zermelo) throw FinslerError(ErrorCode::ValidationError, "metric has no Zermelo data");
  const Vec df = f.differential(p);
  if (df.norm() < kCriticalGradientNorm) throw FinslerError(ErrorCode::CriticalPoint, "df vanishes");
  const Mat& h = zermelo->h;
  const Vec& W = zermelo->wind;
  const Vec grad = legendre_inverse(F, {p, df}).components;
  const double Z = eval_metric(F, {p, grad});
  const Vec tgrad = h.ldlt().solve(df);
  const double tnorm = std::sqrt(tgrad.dot(h * tgrad));
  const Vec r = (tnorm / Z) * (grad - Z * W) - tgrad;
  return {std::sqrt(std::max(0.0, r.dot(h * r))), std::abs(Z - tnorm - df.dot(W))};
}

GradientResult finsler_gradient(const MetricSpec& F, const ScalarField& f, const Vec& p) {
  const Vec df = f.differential(p);
  if (df.norm() < kCriticalGradientNorm) {
    throw FinslerError(ErrorCode::CriticalPoint, "df vanishes; gradient direction undefined");
  }
  GradientResult out;
  out.gradient = legendre_inverse(F, {p, df}, &out.newton_iterations);
  out.finsler_norm = eval_metric(F, out.gradient);
  if (F.kind() == MetricKind::Randers) {
    const auto zermelo = F.zermelo(p);
    out.riemannian_gradient = TangentVector{p, zermelo->h.ldlt().solve(df)};
    out.lemma_defects = check_randers_gradient_lemma(F, f, p);
  }
  return out;
}

double hessian_along_gradient(const MetricSpec& F, const ScalarField& f, const Vec& p) {
  const Vec df = f.differential(p);
  if (df.norm() < kCriticalGradientNorm) throw FinslerError(ErrorCode::CriticalPoint, "df vanishes");
  const Vec grad = legendre_inverse(F, {p, df}).components;
  const double speed = grad.norm();
  const Vec e = grad / speed;
  const double h = 1e-3 * (1.0 + p.norm());
  auto q = [&](double s) {
    const Vec x = p + s * e;
    const Vec g = legendre_inverse(F, {x, f.differential(x)}).components;
    const double value = eval_metric(F, {x, g});
    return value * value;
  };
  const double derivative = (-q(2 * h) + 8 * q(h) - 8 * q(-h) + q(-2 * h)) / (12 * h);
  return 0.5 * speed * derivative;
}

Mat coordinate_hessian_at_critical(const ScalarField& f, const Vec& p, double tolerance) {
  const double norm = f.differential(p).norm();
  if (norm > tolerance) {
    throw FinslerError(ErrorCode::NotCritical, "|df| = " + std::to_string(norm) + " at the query point");
  }
  const Mat H = f.hessian(p);
  return 0.5 * (H + H.transpose());
}

}  // namespace finsler
