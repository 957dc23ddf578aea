#include "finsler/domain.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "finsler/errors.hpp"

namespace finsler {

Domain Domain::unbounded(int dimension) {
  Domain d;
  d.kind_ = Kind::Unbounded;
  d.lower_ = Vec::Constant(dimension, -std::numeric_limits<double>::infinity());
  d.upper_ = Vec::Constant(dimension, std::numeric_limits<double>::infinity());
  d.center_ = Vec::Zero(dimension);
  d.radius_ = std::numeric_limits<double>::infinity();
  return d;
}

Domain Domain::box(const Vec& lower, const Vec& upper) {
  if (lower.size() != upper.size() || lower.size() < 1 || lower.size() > kMaxDimension) {
    throw FinslerError(ErrorCode::DimensionMismatch, "box bounds must share a dimension in [1, 3]");
  }
  if ((lower.array() >= upper.array()).any()) {
    throw FinslerError(ErrorCode::ValidationError, "box lower bound must be below the upper bound");
  }
  Domain d;
  d.kind_ = Kind::Box;
  d.lower_ = lower;
  d.upper_ = upper;
  d.center_ = Vec::Zero(lower.size());
  d.radius_ = std::numeric_limits<double>::infinity();
  return d;
}

Domain Domain::disc(const Vec& center, double radius) {
  if (!(radius > 0.0)) throw FinslerError(ErrorCode::ValidationError, "disc radius must be positive");
  Domain d;
  d.kind_ = Kind::Disc;
  d.center_ = center;
  d.radius_ = radius;
  d.lower_ = center.array() - radius;
  d.upper_ = center.array() + radius;
  return d;
}

bool Domain::contains(const Vec& x) const {
  if (x.size() != dimension() || !x.allFinite()) return false;
  switch (kind_) {
    case Kind::Unbounded: return true;
    case Kind::Box: return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
    case Kind::Disc: return (x - center_).squaredNorm() <= radius_ * radius_;
  }
  return false;
}

std::string Domain::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case Kind::Unbounded: out << "unbounded"; break;
    case Kind::Box:
      out << "box [";
      for (int i = 0; i < dimension(); ++i) out << (i ? ", " : "") << lower_(i) << ".." << upper_(i);
      out << "]";
      break;
    case Kind::Disc:
      out << "disc r=" << radius_ << " at (";
      for (int i = 0; i < dimension(); ++i) out << (i ? ", " : "") << center_(i);
      out << ")";
      break;
  }
  return out.str();
}

}  // namespace finsler
