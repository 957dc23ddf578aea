#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "finsler/types.hpp"

namespace finsler {

/// Largest admissible h(W, W); closer to 1 the Randers tensors become ill conditioned.
inline constexpr double kMaxWindNormSquared = 1.0 - 1e-6;

/// Partial derivatives of a field along each chart coordinate: partials[k] = d/dx^k.
using MatrixPartials = std::array<Mat, kMaxDimension>;

/// Symmetric positive-definite matrix field (h_ij). Partials fall back to finite differences
/// when no closed form is supplied.
class RiemannianMetric {
 public:
  using MatrixFn = std::function<Mat(const Vec&)>;
  using PartialsFn = std::function<void(const Vec&, MatrixPartials&)>;

  RiemannianMetric(int dimension, MatrixFn matrix, PartialsFn partials = {});

  static RiemannianMetric euclidean(int dimension);
  static RiemannianMetric constant(const Mat& h);

  int dimension() const { return dimension_; }
  Mat at(const Vec& x) const { return matrix_(x); }
  void partials(const Vec& x, MatrixPartials& out) const;
  bool has_closed_form_partials() const { return static_cast<bool>(partials_); }

 private:
  int dimension_;
  MatrixFn matrix_;
  PartialsFn partials_;
};

/// Wind vector field W; jacobian(x)(i, k) = dW^i/dx^k.
class WindField {
 public:
  using VectorFn = std::function<Vec(const Vec&)>;
  using JacobianFn = std::function<Mat(const Vec&)>;

  WindField(int dimension, VectorFn vector, JacobianFn jacobian = {});

  static WindField zero(int dimension);
  static WindField constant(const Vec& w);

  int dimension() const { return dimension_; }
  Vec at(const Vec& x) const { return vector_(x); }
  Mat jacobian(const Vec& x) const;
  WindField negated() const;

 private:
  int dimension_;
  VectorFn vector_;
  JacobianFn jacobian_;
};

enum class MetricKind { Riemannian, Randers, Custom, Reverse };

/// How vertical (fiber) and horizontal derivatives of F^2 are obtained.
enum class DerivativeMode { Analytic, FiniteDifference };

/// Local alpha + beta data of a Randers-type norm at one point:
/// F(y) = sqrt(y^T A y) + b^T y, with optional x-partials of A and b.
struct AlphaBetaJet {
  Mat A;
  Vec b;
  MatrixPartials dA;
  std::array<Vec, kMaxDimension> db;
  bool has_partials = false;
};

/// F, its fiber gradient F_y and the fundamental tensor g_v at a nonzero vector.
struct VerticalJet {
  double F = 0.0;
  Vec dF;
  Mat g;
};

/// Horizontal data needed by the geodesic spray: L = F^2/2, L_x and L_{y x} (row i, column k).
struct SprayJet {
  VerticalJet vertical;
  Vec L_x;
  Mat L_yx;
};

/// A Finsler structure on a coordinate chart.
class MetricSpec {
 public:
  using NormFn = std::function<double(const Vec& x, const Vec& y)>;

  static MetricSpec riemannian(RiemannianMetric h);
  static MetricSpec randers(RiemannianMetric h, WindField wind);
  /// Metric given only by its norm; every derivative comes from finite differences.
  static MetricSpec custom(int dimension, NormFn norm, std::string name = "custom");

  MetricKind kind() const;
  int dimension() const;
  DerivativeMode derivative_mode() const;

  /// Same metric evaluated through the finite-difference fallback.
  MetricSpec with_derivative_mode(DerivativeMode mode) const;

  /// Zermelo data (h, W) when the metric has it (Riemannian: W = 0).
  struct Zermelo {
    Mat h;
    Vec wind;
  };
  std::optional<Zermelo> zermelo(const Vec& x) const;

  /// Pointwise alpha + beta data; only for Riemannian/Randers and their reverses.
  AlphaBetaJet alpha_beta(const Vec& x, bool with_partials) const;

  // Internal node; public so the implementation can build it.
  struct Node;
  explicit MetricSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  const Node& node() const { return *node_; }

 private:
  std::shared_ptr<const Node> node_;
};

/// F(v); zero for v = 0.
double eval_metric(const MetricSpec& F, const TangentVector& v);

/// g_v as a symmetric positive-definite matrix.
Mat fundamental_tensor(const MetricSpec& F, const TangentVector& v);

/// C_v(w1, w2, w3) = 1/4 d^3/ds3 ds2 ds1 F^2(v + sum s_i w_i).
double cartan_tensor(const MetricSpec& F, const TangentVector& v, const Vec& w1, const Vec& w2,
                     const Vec& w3);

/// F^-(v) = F(-v). Randers(h, W) maps to Randers(h, -W); reversing twice gives F back.
MetricSpec reverse_metric(const MetricSpec& F);

VerticalJet vertical_jet(const MetricSpec& F, const TangentVector& v);
SprayJet spray_jet(const MetricSpec& F, const TangentVector& v);

/// Throws DimensionMismatch unless both base and components have the metric's dimension.
void require_dimension(const MetricSpec& F, const TangentVector& v);

}  // namespace finsler
