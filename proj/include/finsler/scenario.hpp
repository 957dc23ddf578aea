#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/expression.hpp"
#include "finsler/manifold.hpp"

namespace finsler {

struct DomainConfig {
  enum class Kind { Box, Disc, SphereChart };
  Kind kind = Kind::Box;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> center;
  double radius = 0.0;
};

struct MetricConfig {
  enum class Kind { Riemannian, Randers };
  Kind kind = Kind::Riemannian;
  bool round = false;  // sphere-chart only: induced metric of the unit sphere
  std::vector<std::vector<expr::Expression>> h;
  std::vector<expr::Expression> wind;
};

struct NumericsConfig {
  double step = 1e-3;
  double transnormal_tol = 1e-6;
  double parallel_tol = 1e-4;
  double distance_tol = 1e-4;
  int probes = 32;
  std::vector<double> levels;
  double sample_lo = 0.0;
  double sample_hi = 1.0;
  int sample_levels = 40;
  int points_per_level = 8;
  double from = 0.0;
  double to = 1.0;
};

struct ScenarioConfig {
  std::string name;
  int dimension = 2;  // chart dimension
  DomainConfig domain;
  MetricConfig metric;
  expr::Expression field;
  NumericsConfig numerics;
};

/// Parses and validates a scenario file. Throws ParseError or ValidationError.
ScenarioConfig parse_scenario(std::string_view text);

/// Canonical text form; parse_scenario(print_scenario(c)) reproduces c.
std::string print_scenario(const ScenarioConfig& config);

/// Wind norm, symmetry and positivity of h, variable ranges; sphere winds must be tangent.
void validate_scenario(const ScenarioConfig& config);

Manifold build_manifold(const ScenarioConfig& config);

struct RegistryEntry {
  std::string name;
  std::string summary;
  std::string text;
  std::string b_reference;  // closed form of b in the variable x = f-value, empty if unknown
};

const std::vector<RegistryEntry>& registry();
const RegistryEntry* find_example(std::string_view name);
ScenarioConfig load_example(std::string_view name);

}  // namespace finsler
