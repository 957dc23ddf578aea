#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finsler {

enum class ErrorCode {
  NonConvexWind,
  DimensionMismatch,
  ZeroVector,
  SingularTensor,
  NoConvergence,
  CriticalPoint,
  NotCritical,
  LeftDomain,
  NeverReached,
  EmptySample,
  IntervalContainsCriticalValue,
  NoCriticalPoint,
  LevelNotFound,
  ParseError,
  ValidationError,
  EvalError,
};

std::string_view error_name(ErrorCode code);

class FinslerError : public std::runtime_error {
 public:
  FinslerError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse errors carry a 1-based source position.
class ParseError : public FinslerError {
 public:
  ParseError(const std::string& message, int line, int column)
      : FinslerError(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                                std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvexWind: return "NonConvexWind";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::SingularTensor: return "SingularTensor";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::CriticalPoint: return "CriticalPoint";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::LeftDomain: return "LeftDomain";
    case ErrorCode::NeverReached: return "NeverReached";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::IntervalContainsCriticalValue: return "IntervalContainsCriticalValue";
    case ErrorCode::NoCriticalPoint: return "NoCriticalPoint";
    case ErrorCode::LevelNotFound: return "LevelNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::EvalError: return "EvalError";
  }
  return "Unknown";
}

}  // namespace finsler
