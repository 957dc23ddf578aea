#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace finsler {

// Charts have dimension at most 3; fixed-capacity storage keeps the inner loops allocation free.
inline constexpr int kMaxDimension = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDimension, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDimension, kMaxDimension>;

// Ambient coordinates used to compare points living in different charts.
using AmbientVec = Eigen::VectorXd;
using AmbientMat = Eigen::MatrixXd;

/// A vector v in T_pM, expressed in chart coordinates.
struct TangentVector {
  Vec base;
  Vec components;
};

/// A covector (e.g. df_p) at a base point.
struct Covector {
  Vec base;
  Vec components;
};

/// Point tagged with the chart its coordinates refer to.
struct ChartPoint {
  std::size_t chart = 0;
  Vec coords;
};

struct ChartVector {
  std::size_t chart = 0;
  Vec base;
  Vec components;

  TangentVector local() const { return {base, components}; }
  ChartPoint point() const { return {chart, base}; }
};

}  // namespace finsler
