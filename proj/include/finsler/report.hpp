#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/foliation.hpp"
#include "finsler/transnormal.hpp"

namespace finsler {

using Json = nlohmann::ordered_json;

struct RunManifest {
  std::string scenario;
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  double wall_time = 0.0;  // seconds; only written to manifest.json
};

/// Library, Eigen, Boost and compiler versions.
Json version_info();

/// Manifest block embedded in reports; excludes wall time so reruns stay byte-identical.
Json manifest_json(const RunManifest& manifest, bool with_wall_time);

Json report_json(const std::string& scenario, const std::string& verb, bool verdict, Json defects, Json data,
                 const RunManifest& manifest);

/// Two-space indented JSON plus a trailing newline. Floats use the shortest round-trip form.
std::string render(const Json& value);

/// Non-finite values become null.
Json number(double value);

Json to_json(const ChartPoint& p, const Manifold& M);
Json to_json(const TransnormalityReport& report);
Json to_json(const FSegment& segment, const Manifold& M);
Json to_json(const DistanceCheck& check);
Json to_json(const ParallelismReport& report);
Json to_json(const PartitionReport& report);
Json to_json(const MorseBottReport& report);

/// level,count,median,spread,min,max
void write_b_table_csv(std::ostream& out, const TransnormalityReport& report);

}  // namespace finsler
