#include "finsler/metric.hpp"

#include <cmath>

#include "finsler/errors.hpp"
#include "finsler/finite_difference.hpp"

namespace finsler {

struct MetricSpec::Node {
  MetricKind kind = MetricKind::Riemannian;
  int dimension = 0;
  DerivativeMode mode = DerivativeMode::Analytic;
  std::optional<RiemannianMetric> h;
  std::optional<WindField> wind;
  NormFn norm;
  std::optional<MetricSpec> inner;
  std::string name;
};

namespace {

Vec unit(int dim, int k) {
  Vec e = Vec::Zero(dim);
  e(k) = 1.0;
  return e;
}

double vertical_step(const Vec& y) { return fd::kDefaultStep * std::max(y.norm(), 1e-300); }

}  // namespace

// ---------------------------------------------------------------------------------------------
// Fields

RiemannianMetric::RiemannianMetric(int dimension, MatrixFn matrix, PartialsFn partials)
    : dimension_(dimension), matrix_(std::move(matrix)), partials_(std::move(partials)) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw FinslerError(ErrorCode::DimensionMismatch, "chart dimension must be in [1, 3]");
  }
}

RiemannianMetric RiemannianMetric::euclidean(int dimension) { return constant(Mat::Identity(dimension, dimension)); }

RiemannianMetric RiemannianMetric::constant(const Mat& h) {
  const int n = static_cast<int>(h.rows());
  return RiemannianMetric(
      n, [h](const Vec&) { return h; },
      [n](const Vec&, MatrixPartials& out) {
        for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = Mat::Zero(n, n);
      });
}

void RiemannianMetric::partials(const Vec& x, MatrixPartials& out) const {
  if (partials_) {
    partials_(x, out);
    return;
  }
  for (int k = 0; k < dimension_; ++k) {
    const Vec e = unit(dimension_, k);
    out[static_cast<std::size_t>(k)] =
        fd::central_derivative([&](double t) -> Mat { return matrix_(x + t * e); }, fd::kDefaultStep);
  }
}

WindField::WindField(int dimension, VectorFn vector, JacobianFn jacobian)
    : dimension_(dimension), vector_(std::move(vector)), jacobian_(std::move(jacobian)) {}

WindField WindField::zero(int dimension) { return constant(Vec::Zero(dimension)); }

WindField WindField::constant(const Vec& w) {
  const int n = static_cast<int>(w.size());
  return WindField(n, [w](const Vec&) { return w; }, [n](const Vec&) -> Mat { return Mat::Zero(n, n); });
}

Mat WindField::jacobian(const Vec& x) const {
  if (jacobian_) return jacobian_(x);
  Mat J(dimension_, dimension_);
  for (int k = 0; k < dimension_; ++k) {
    const Vec e = unit(dimension_, k);
    J.col(k) = fd::central_derivative([&](double t) -> Vec { return vector_(x + t * e); }, fd::kDefaultStep);
  }
  return J;
}

WindField WindField::negated() const {
  auto v = vector_;
  JacobianFn jac;
  if (jacobian_) {
    auto j = jacobian_;
    jac = [j](const Vec& x) -> Mat { return -j(x); };
  }
  return WindField(dimension_, [v](const Vec& x) -> Vec { return -v(x); }, jac);
}

// ---------------------------------------------------------------------------------------------
// MetricSpec

MetricSpec MetricSpec::riemannian(RiemannianMetric h) {
  auto n = std::make_shared<Node>();
  n->kind = MetricKind::Riemannian;
  n->dimension = h.dimension();
  n->h = std::move(h);
  n->name = "riemannian";
  return MetricSpec(std::move(n));
}

MetricSpec MetricSpec::randers(RiemannianMetric h, WindField wind) {
  if (h.dimension() != wind.dimension()) {
    throw FinslerError(ErrorCode::DimensionMismatch, "metric and wind dimensions differ");
  }
  auto n = std::make_shared<Node>();
  n->kind = MetricKind::Randers;
  n->dimension = h.dimension();
  n->h = std::move(h);
  n->wind = std::move(wind);
  n->name = "randers";
  return MetricSpec(std::move(n));
}

MetricSpec MetricSpec::custom(int dimension, NormFn norm, std::string name) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw FinslerError(ErrorCode::DimensionMismatch, "chart dimension must be in [1, 3]");
  }
  auto n = std::make_shared<Node>();
  n->kind = MetricKind::Custom;
  n->dimension = dimension;
  n->norm = std::move(norm);
  n->mode = DerivativeMode::FiniteDifference;
  n->name = std::move(name);
  return MetricSpec(std::move(n));
}

MetricKind MetricSpec::kind() const { return node_->kind; }
int MetricSpec::dimension() const { return node_->dimension; }
DerivativeMode MetricSpec::derivative_mode() const { return node_->mode; }

MetricSpec MetricSpec::with_derivative_mode(DerivativeMode mode) const {
  if (node_->kind == MetricKind::Custom && mode == DerivativeMode::Analytic) {
    throw FinslerError(ErrorCode::ValidationError, "custom metrics only support finite differences");
  }
  auto n = std::make_shared<Node>(*node_);
  n->mode = mode;
  return MetricSpec(std::move(n));
}

std::optional<MetricSpec::Zermelo> MetricSpec::zermelo(const Vec& x) const {
  switch (node_->kind) {
    case MetricKind::Riemannian: return Zermelo{node_->h->at(x), Vec::Zero(node_->dimension)};
    case MetricKind::Randers: return Zermelo{node_->h->at(x), node_->wind->at(x)};
    default: return std::nullopt;
  }
}

AlphaBetaJet MetricSpec::alpha_beta(const Vec& x, bool with_partials) const {
  const Node& nd = *node_;
  const int n = nd.dimension;
  AlphaBetaJet jet;
  jet.has_partials = with_partials;
  switch (nd.kind) {
    case MetricKind::Riemannian: {
      jet.A = nd.h->at(x);
      jet.b = Vec::Zero(n);
      if (with_partials) {
        nd.h->partials(x, jet.dA);
        for (int k = 0; k < n; ++k) jet.db[static_cast<std::size_t>(k)] = Vec::Zero(n);
      }
      return jet;
    }
    case MetricKind::Randers: {
      // Zermelo data (h, W) -> alpha + beta with lambda = 1 - h(W, W):
      //   a_ij = h_ij / lambda + W_i W_j / lambda^2,  b_i = -W_i / lambda  (W_i = h_ij W^j).
      const Mat h = nd.h->at(x);
      const Vec W = nd.wind->at(x);
      const Vec Wl = h * W;
      const double wind_sq = W.dot(Wl);
      if (!(wind_sq <= kMaxWindNormSquared)) {
        throw FinslerError(ErrorCode::NonConvexWind,
                           "h(W,W) = " + std::to_string(wind_sq) + " exceeds 1 - 1e-6");
      }
      const double lambda = 1.0 - wind_sq;
      jet.A = h / lambda + Wl * Wl.transpose() / (lambda * lambda);
      jet.b = -Wl / lambda;
      if (with_partials) {
        MatrixPartials dh;
        nd.h->partials(x, dh);
        const Mat J = nd.wind->jacobian(x);
        for (int k = 0; k < n; ++k) {
          const auto kk = static_cast<std::size_t>(k);
          const Vec dW = J.col(k);
          const double dlambda = -(W.dot(dh[kk] * W) + 2.0 * Wl.dot(dW));
          const Vec dWl = dh[kk] * W + h * dW;
          const double l2 = lambda * lambda;
          jet.dA[kk] = dh[kk] / lambda - h * dlambda / l2 +
                       (dWl * Wl.transpose() + Wl * dWl.transpose()) / l2 -
                       2.0 * Wl * Wl.transpose() * dlambda / (l2 * lambda);
          jet.db[kk] = -dWl / lambda + Wl * dlambda / l2;
        }
      }
      return jet;
    }
    case MetricKind::Reverse: {
      AlphaBetaJet inner = nd.inner->alpha_beta(x, with_partials);
      inner.b = -inner.b;
      if (with_partials) {
        for (int k = 0; k < n; ++k) inner.db[static_cast<std::size_t>(k)] *= -1.0;
      }
      return inner;
    }
    case MetricKind::Custom: break;
  }
  throw FinslerError(ErrorCode::ValidationError, "metric '" + nd.name + "' has no alpha + beta form");
}

namespace {

bool has_alpha_beta(const MetricSpec& F) {
  const auto& nd = F.node();
  if (nd.kind == MetricKind::Custom) return false;
  if (nd.kind == MetricKind::Reverse) return has_alpha_beta(*nd.inner);
  return true;
}

bool use_analytic(const MetricSpec& F) {
  return F.derivative_mode() == DerivativeMode::Analytic && has_alpha_beta(F);
}

double norm_value(const MetricSpec& F, const Vec& x, const Vec& y) {
  const auto& nd = F.node();
  if (nd.kind == MetricKind::Custom) return nd.norm(x, y);
  if (nd.kind == MetricKind::Reverse && !has_alpha_beta(*nd.inner)) return norm_value(*nd.inner, x, -y);
  const AlphaBetaJet jet = F.alpha_beta(x, false);
  const double q = y.dot(jet.A * y);
  return std::sqrt(std::max(q, 0.0)) + jet.b.dot(y);
}

struct AlphaTerms {
  Vec u;       // A y
  double alpha;
};

AlphaTerms alpha_terms(const AlphaBetaJet& jet, const Vec& y) {
  const Vec u = jet.A * y;
  return {u, std::sqrt(y.dot(u))};
}

VerticalJet analytic_vertical(const AlphaBetaJet& jet, const Vec& y) {
  const auto [u, alpha] = alpha_terms(jet, y);
  VerticalJet out;
  out.F = alpha + jet.b.dot(y);
  out.dF = u / alpha + jet.b;
  const Mat alpha_yy = jet.A / alpha - u * u.transpose() / (alpha * alpha * alpha);
  const Mat g = out.dF * out.dF.transpose() + out.F * alpha_yy;
  out.g = 0.5 * (g + g.transpose());  // exact symmetry; rounding in A can break it
  return out;
}

VerticalJet finite_difference_vertical(const MetricSpec& F, const Vec& x, const Vec& y) {
  const int n = F.dimension();
  const double h = vertical_step(y);
  auto half_sq = [&](const Vec& w) {
    const double value = norm_value(F, x, w);
    return 0.5 * value * value;
  };
  VerticalJet out;
  out.F = norm_value(F, x, y);
  out.dF.resize(n);
  out.g.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const Vec ei = unit(n, i);
    const double dL = fd::central_derivative([&](double t) { return half_sq(y + t * ei); }, h);
    out.dF(i) = dL / out.F;
    for (int j = i; j < n; ++j) {
      const Vec ej = unit(n, j);
      const double gij =
          fd::mixed_second_derivative([&](double t, double s) { return half_sq(y + t * ei + s * ej); }, h);
      out.g(i, j) = gij;
      out.g(j, i) = gij;
    }
  }
  return out;
}

void check_nonzero(const TangentVector& v) {
  if (v.components.isZero(0.0)) {
    throw FinslerError(ErrorCode::ZeroVector, "tensor undefined on the zero section");
  }
}

}  // namespace

void require_dimension(const MetricSpec& F, const TangentVector& v) {
  if (v.base.size() != F.dimension() || v.components.size() != F.dimension()) {
    throw FinslerError(ErrorCode::DimensionMismatch,
                       "expected dimension " + std::to_string(F.dimension()) + ", got base " +
                           std::to_string(v.base.size()) + " and vector " + std::to_string(v.components.size()));
  }
  if (!v.base.allFinite() || !v.components.allFinite()) {
    throw FinslerError(ErrorCode::DimensionMismatch, "non-finite coordinates");
  }
}

double eval_metric(const MetricSpec& F, const TangentVector& v) {
  require_dimension(F, v);
  if (v.components.isZero(0.0)) {
    // Still validate the wind at the base point.
    if (has_alpha_beta(F)) (void)F.alpha_beta(v.base, false);
    return 0.0;
  }
  return norm_value(F, v.base, v.components);
}

VerticalJet vertical_jet(const MetricSpec& F, const TangentVector& v) {
  require_dimension(F, v);
  check_nonzero(v);
  if (use_analytic(F)) return analytic_vertical(F.alpha_beta(v.base, false), v.components);
  return finite_difference_vertical(F, v.base, v.components);
}

Mat fundamental_tensor(const MetricSpec& F, const TangentVector& v) { return vertical_jet(F, v).g; }

double cartan_tensor(const MetricSpec& F, const TangentVector& v, const Vec& w1, const Vec& w2, const Vec& w3) {
  require_dimension(F, v);
  check_nonzero(v);
  if (w1.size() != F.dimension() || w2.size() != F.dimension() || w3.size() != F.dimension()) {
    throw FinslerError(ErrorCode::DimensionMismatch, "Cartan tensor arguments have wrong dimension");
  }
  const Vec& y = v.components;
  if (!use_analytic(F)) {
    const double h = 1e-3 * y.norm();
    return 0.25 * fd::mixed_third_derivative(
                      [&](double s1, double s2, double s3) {
                        const double value = norm_value(F, v.base, y + s1 * w1 + s2 * w2 + s3 * w3);
                        return value * value;
                      },
                      h);
  }
  const AlphaBetaJet jet = F.alpha_beta(v.base, false);
  const auto [u, alpha] = alpha_terms(jet, y);
  const double Fv = alpha + jet.b.dot(y);
  const Vec dF = u / alpha + jet.b;
  const double a3 = alpha * alpha * alpha;
  auto alpha_yy = [&](const Vec& p, const Vec& q) { return p.dot(jet.A * q) / alpha - u.dot(p) * u.dot(q) / a3; };
  const double alpha_yyy =
      -(w1.dot(jet.A * w2) * u.dot(w3) + w1.dot(jet.A * w3) * u.dot(w2) + w2.dot(jet.A * w3) * u.dot(w1)) / a3 +
      3.0 * u.dot(w1) * u.dot(w2) * u.dot(w3) / (a3 * alpha * alpha);
  return 0.5 * (alpha_yy(w1, w2) * dF.dot(w3) + alpha_yy(w1, w3) * dF.dot(w2) + alpha_yy(w2, w3) * dF.dot(w1) +
                Fv * alpha_yyy);
}

MetricSpec reverse_metric(const MetricSpec& F) {
  const auto& nd = F.node();
  switch (nd.kind) {
    case MetricKind::Riemannian: return F;
    case MetricKind::Randers: {
      MetricSpec reversed = MetricSpec::randers(*nd.h, nd.wind->negated());
      return reversed.with_derivative_mode(nd.mode);
    }
    case MetricKind::Reverse: return *nd.inner;
    case MetricKind::Custom: break;
  }
  auto n = std::make_shared<MetricSpec::Node>();
  n->kind = MetricKind::Reverse;
  n->dimension = nd.dimension;
  n->mode = nd.mode;
  n->inner = F;
  n->name = "reverse(" + nd.name + ")";
  return MetricSpec(std::move(n));
}

SprayJet spray_jet(const MetricSpec& F, const TangentVector& v) {
  require_dimension(F, v);
  check_nonzero(v);
  const int n = F.dimension();
  const Vec& x = v.base;
  const Vec& y = v.components;
  SprayJet out;
  out.L_x.resize(n);
  out.L_yx.resize(n, n);
  if (use_analytic(F)) {
    const AlphaBetaJet jet = F.alpha_beta(x, true);
    out.vertical = analytic_vertical(jet, y);
    const auto [u, alpha] = alpha_terms(jet, y);
    const double Fv = out.vertical.F;
    for (int k = 0; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const Vec dAy = jet.dA[kk] * y;
      const double q = y.dot(dAy);
      const double F_xk = q / (2.0 * alpha) + jet.db[kk].dot(y);
      out.L_x(k) = Fv * F_xk;
      const Vec dFy_xk = dAy / alpha - u * q / (2.0 * alpha * alpha * alpha) + jet.db[kk];
      out.L_yx.col(k) = F_xk * out.vertical.dF + Fv * dFy_xk;
    }
    return out;
  }
  out.vertical = finite_difference_vertical(F, x, y);
  for (int k = 0; k < n; ++k) {
    const Vec e = unit(n, k);
    out.L_x(k) = fd::central_derivative(
        [&](double t) {
          const double value = norm_value(F, x + t * e, y);
          return 0.5 * value * value;
        },
        fd::kDefaultStep);
    out.L_yx.col(k) = fd::central_derivative(
        [&](double t) -> Vec {
          const VerticalJet j = finite_difference_vertical(F, x + t * e, y);
          return j.F * j.dF;
        },
        fd::kDefaultStep);
  }
  return out;
}

}  // namespace finsler
