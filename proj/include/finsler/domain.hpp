#pragma once

#include <string>

#include "finsler/types.hpp"

namespace finsler {

/// Region of a chart: all of R^n, an axis-aligned box (bounds may be infinite) or a disc.
class Domain {
 public:
  enum class Kind { Unbounded, Box, Disc };

  static Domain unbounded(int dimension);
  static Domain box(const Vec& lower, const Vec& upper);
  static Domain disc(const Vec& center, double radius);

  Kind kind() const { return kind_; }
  int dimension() const { return static_cast<int>(lower_.size()); }
  bool contains(const Vec& x) const;

  // Box bounds; for a disc the bounding box.
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }

  std::string describe() const;

 private:
  Kind kind_ = Kind::Unbounded;
  Vec lower_;
  Vec upper_;
  Vec center_;
  double radius_ = 0.0;
};

}  // namespace finsler
