#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace finsler {

// Shortest representation that reads back to the same double.
inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  std::string out(buffer, result.ptr);
  // 1e-06 -> 1e-6
  const auto e = out.find('e');
  if (e != std::string::npos) {
    std::size_t digits = e + 1;
    if (out[digits] == '-' || out[digits] == '+') ++digits;
    const auto first = out.find_first_not_of('0', digits);
    out.erase(digits, first - digits);
  }
  return out;
}

}  // namespace finsler
