#include "finsler/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "finsler/format.hpp"

namespace finsler {

namespace {

constexpr const char* kVersion = "1.0.0";

Json vector_json(const AmbientVec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Json vector_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Json numbers_json(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

Json crossing_json(const CrossingEvent& e) {
  Json out;
  out["level"] = number(e.level_value);
  out["time"] = number(e.time);
  out["arc_length"] = number(e.arc_length);
  out["chart"] = e.point.chart;
  out["coords"] = vector_json(e.point.coords);
  out["orthogonality_defect"] = number(e.orthogonality_defect);
  return out;
}

Json fit_json(const BFit& fit) {
  Json out;
  out["knots"] = numbers_json(fit.knots());
  out["values"] = numbers_json(fit.values());
  out["left_derivative"] = number(fit.left_derivative());
  out["right_derivative"] = number(fit.right_derivative());
  return out;
}

}  // namespace

Json number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

Json version_info() {
  Json out;
  out["finsler-lab"] = kVersion;
  out["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
  out["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                 std::to_string(BOOST_VERSION % 100);
#if defined(__clang__)
  out["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  out["compiler"] = std::string("gcc ") + __VERSION__;
#else
  out["compiler"] = "unknown";
#endif
  return out;
}

Json manifest_json(const RunManifest& manifest, bool with_wall_time) {
  Json out;
  out["scenario"] = manifest.scenario;
  out["command"] = manifest.command;
  out["seed"] = manifest.seed;
  out["versions"] = version_info();
  out["outputs"] = manifest.outputs;
  if (with_wall_time) out["wall_time_seconds"] = number(manifest.wall_time);
  return out;
}

Json report_json(const std::string& scenario, const std::string& verb, bool verdict, Json defects, Json data,
                 const RunManifest& manifest) {
  Json out;
  out["scenario"] = scenario;
  out["verb"] = verb;
  out["verdict"] = verdict;
  out["defects"] = std::move(defects);
  out["data"] = std::move(data);
  out["manifest"] = manifest_json(manifest, false);
  return out;
}

std::string render(const Json& value) { return value.dump(2) + "\n"; }

Json to_json(const ChartPoint& p, const Manifold& M) {
  Json out;
  out["chart"] = M.chart(p.chart).name;
  out["coords"] = vector_json(p.coords);
  out["ambient"] = vector_json(M.ambient(p));
  out["f"] = number(M.value(p));
  return out;
}

Json to_json(const TransnormalityReport& report) {
  Json out;
  out["sample_count"] = report.sample_count;
  out["skipped_critical"] = report.skipped_critical;
  out["tolerance"] = number(report.tolerance);
  out["bin_width"] = number(report.bin_width);
  out["max_spread"] = number(report.max_spread);
  Json table = Json::array();
  for (const LevelValues& row : report.b_table) {
    Json r;
    r["level"] = number(row.level);
    r["count"] = row.values.size();
    r["median"] = number(row.median);
    r["spread"] = number(row.spread);
    table.push_back(std::move(r));
  }
  out["b_table"] = std::move(table);
  if (report.b_fit) out["b_fit"] = fit_json(*report.b_fit);
  out["verdict"] = report.verdict;
  return out;
}

Json to_json(const FSegment& segment, const Manifold& M) {
  Json out;
  out["direction"] = std::string(direction_name(segment.direction));
  out["length"] = number(segment.trajectory.arc_length());
  out["samples"] = segment.trajectory.samples.size();
  out["start"] = to_json(segment.trajectory.samples.front().state.point(), M);
  out["end"] = to_json(segment.trajectory.back().state.point(), M);
  out["reparametrization_residual"] = number(segment.reparametrization_residual);
  out["speed_defect"] = number(segment.speed_defect);
  out["monotone"] = segment.monotone;
  out["left_domain"] = segment.left_domain;
  out["reached_critical"] = segment.reached_critical;
  Json crossings = Json::array();
  for (const CrossingEvent& e : segment.level_crossings) crossings.push_back(crossing_json(e));
  out["level_crossings"] = std::move(crossings);
  return out;
}

Json to_json(const DistanceCheck& check) {
  Json out;
  out["geodesic_distance"] = number(check.geodesic_distance);
  out["quadrature"] = number(check.quadrature);
  out["defect"] = number(check.defect);
  out["critical_end"] = check.critical_end;
  out["probes_failed"] = check.probes_failed;
  out["probe_lengths"] = numbers_json(check.probe_lengths);
  if (check.b_fit) out["b_fit"] = fit_json(*check.b_fit);
  return out;
}

Json to_json(const ParallelismReport& report) {
  Json out;
  out["direction"] = std::string(direction_name(report.direction));
  out["source_level"] = number(report.source_level);
  out["target_level"] = number(report.target_level);
  out["max_defect"] = number(report.max_defect);
  out["tolerance"] = number(report.tolerance);
  out["verdict"] = report.verdict;
  out["decisive"] = report.decisive;
  out["per_probe_defects"] = numbers_json(report.per_probe_defects);
  out["arrival_lengths"] = numbers_json(report.arrival_lengths);
  out["failures"] = report.failures;
  return out;
}

Json to_json(const PartitionReport& report) {
  Json out;
  out["levels"] = numbers_json(report.levels);
  out["tolerance"] = number(report.tolerance);
  Json forward = Json::array();
  for (const auto& r : report.forward) forward.push_back(to_json(r));
  Json backward = Json::array();
  for (const auto& r : report.backward) backward.push_back(to_json(r));
  out["forward"] = std::move(forward);
  out["backward"] = std::move(backward);
  out["cylinder_match_defects"] = numbers_json(report.cylinder_match_defects);
  out["finsler_partition"] = report.finsler_partition_verdict;
  return out;
}

Json to_json(const MorseBottReport& report) {
  Json out;
  Json points = Json::array();
  for (const CriticalPointInfo& c : report.critical_points) {
    Json p;
    p["chart"] = c.point.chart;
    p["coords"] = vector_json(c.point.coords);
    p["ambient"] = vector_json(c.ambient);
    p["value"] = number(c.value);
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < c.hessian.rows(); ++i) rows.push_back(vector_json(Vec(c.hessian.row(i).transpose())));
    p["hessian"] = std::move(rows);
    p["eigenvalues"] = vector_json(c.eigenvalues);
    p["kernel_dim"] = c.kernel_dim;
    p["tangent_dim"] = c.tangent_dim;
    p["codimension"] = c.codimension;
    p["transversal_nondegenerate"] = c.transversal_nondegenerate;
    p["b_prime"] = number(c.b_prime);
    p["unit_hessians"] = numbers_json(c.unit_hessians);
    p["hessian_defect"] = number(c.hessian_defect);
    points.push_back(std::move(p));
  }
  out["critical_points"] = std::move(points);
  out["verdict"] = report.verdict;
  return out;
}

void write_b_table_csv(std::ostream& out, const TransnormalityReport& report) {
  out << "level,count,median,spread,min,max\n";
  for (const LevelValues& row : report.b_table) {
    const auto [lo, hi] = std::minmax_element(row.values.begin(), row.values.end());
    out << format_double(row.level) << ',' << row.values.size() << ',' << format_double(row.median) << ','
        << format_double(row.spread) << ',' << (row.values.empty() ? "nan" : format_double(*lo)) << ','
        << (row.values.empty() ? "nan" : format_double(*hi)) << '\n';
  }
}

}  // namespace finsler
