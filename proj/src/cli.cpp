#include "finsler/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "finsler/errors.hpp"
#include "finsler/foliation.hpp"
#include "finsler/level_set.hpp"
#include "finsler/report.hpp"
#include "finsler/scenario.hpp"
#include "finsler/transnormal.hpp"

namespace finsler {

namespace {

const std::vector<std::string> kVerbs = {"check-transnormal", "trace-segment",   "verify-distance", "check-parallel",
                                         "check-partition",   "check-morse-bott", "dump-geodesic",   "list-examples"};

struct Options {
  std::string verb;
  std::string example;
  std::string scenario_file;
  std::optional<double> from;
  std::optional<double> to;
  std::optional<int> probes;
  std::optional<double> step;
  std::optional<double> tol;
  std::string out_dir;
  std::string format = "json";
  std::uint64_t seed = 1;
  std::string direction;
  std::string point;
  std::string velocity;
  std::optional<double> time;
};

struct Outcome {
  bool verdict = false;
  Json defects = Json::object();
  Json data = Json::object();
  std::map<std::string, std::string> csv;  // file name -> contents
};

struct Context {
  const Options& options;
  const ScenarioConfig& config;
  const Manifold& manifold;

  double step() const { return options.step.value_or(config.numerics.step); }
  int probes() const { return options.probes.value_or(config.numerics.probes); }
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonConvexWind:
    case ErrorCode::IntervalContainsCriticalValue:
    case ErrorCode::LevelNotFound:
    case ErrorCode::NotCritical:
    case ErrorCode::CriticalPoint:
      return kExitConfigError;
    default:
      return kExitNumericalFailure;
  }
}

std::vector<double> parse_tuple(const std::string& text, const std::string& what) {
  std::string s = text;
  std::replace(s.begin(), s.end(), '(', ' ');
  std::replace(s.begin(), s.end(), ')', ' ');
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw FinslerError(ErrorCode::ValidationError, what + ": '" + token + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw FinslerError(ErrorCode::ValidationError, what + " is empty");
  return out;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
  return out;
}

Direction parse_direction(const std::string& s) {
  if (s.empty() || s == "forward") return Direction::Forward;
  if (s == "backward") return Direction::Backward;
  throw FinslerError(ErrorCode::ValidationError, "direction must be forward or backward for this verb");
}

// --point in chart coordinates (first chart) or, on multi-chart manifolds, ambient coordinates.
ChartPoint start_point(const Context& ctx, double default_level) {
  const Manifold& M = ctx.manifold;
  if (ctx.options.point.empty()) return extract_level_set(M, default_level, 1).points.front();
  const Vec p = to_vec(parse_tuple(ctx.options.point, "--point"));
  if (M.chart_count() > 1) {
    const auto located = M.locate(AmbientVec(p));
    if (p.size() != static_cast<int>(M.ambient({0, M.chart(0).sample_lower}).size()) || !located) {
      throw FinslerError(ErrorCode::ValidationError, "--point must be an ambient point on the manifold");
    }
    return *located;
  }
  if (p.size() != M.dimension()) {
    throw FinslerError(ErrorCode::DimensionMismatch, "--point needs " + std::to_string(M.dimension()) + " coordinates");
  }
  if (!M.chart(0).domain.contains(p)) throw FinslerError(ErrorCode::ValidationError, "--point lies outside the domain");
  return {0, p};
}

std::vector<ChartPoint> random_regular_points(const Manifold& M, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ChartPoint> out;
  for (int attempt = 0; attempt < 1000 * count && static_cast<int>(out.size()) < count; ++attempt) {
    const std::size_t ci = static_cast<std::size_t>(unit(rng) * static_cast<double>(M.chart_count())) % M.chart_count();
    const Chart& c = M.chart(ci);
    Vec x(M.dimension());
    for (int i = 0; i < M.dimension(); ++i) x(i) = c.sample_lower(i) + (c.sample_upper(i) - c.sample_lower(i)) * unit(rng);
    if (!c.interior.contains(x)) continue;
    try {
      if (c.field.differential(x).norm() < 1e-6) continue;
    } catch (const FinslerError&) {
      continue;
    }
    out.push_back({ci, x});
  }
  return out;
}

std::string trajectory_csv(const GeodesicTrajectory& trajectory) {
  std::ostringstream out;
  write_trajectory_csv(out, trajectory);
  return out.str();
}

Outcome check_transnormal_verb(const Context& ctx) {
  const auto& n = ctx.config.numerics;
  const Manifold& M = ctx.manifold;
  const double lo = ctx.options.from.value_or(n.sample_lo);
  const double hi = ctx.options.to.value_or(n.sample_hi);
  const auto levels = sample_levels(M, lo, hi, n.sample_levels, n.points_per_level);
  TransnormalOptions opts;
  opts.tolerance = ctx.options.tol.value_or(n.transnormal_tol);
  const TransnormalityReport report = check_transnormal(M, levels, opts);

  Outcome out;
  out.verdict = report.verdict;
  out.defects["max_spread"] = number(report.max_spread);
  if (const RegistryEntry* entry = find_example(ctx.config.name); entry && !entry->b_reference.empty()) {
    const expr::Expression reference = expr::parse(entry->b_reference);
    double worst = 0.0;
    for (const LevelValues& row : report.b_table) {
      const std::array<double, 3> vars{row.level, 0.0, 0.0};
      worst = std::max(worst, std::abs(row.median - reference.evaluate(vars)));
    }
    out.defects["b_reference"] = number(worst);
    out.data["b_reference"] = entry->b_reference;
  }
  if (report.b_fit) {
    std::vector<ChartPoint> points;
    for (const auto& level : levels) points.insert(points.end(), level.points.begin(), level.points.end());
    out.defects["hessian_identity"] = number(check_hessian_identity(M, points, *report.b_fit).max_defect);
  }
  if (M.chart(0).metric.kind() == MetricKind::Randers) {
    double vector_defect = 0.0;
    double scalar_defect = 0.0;
    for (const ChartPoint& p : random_regular_points(M, ctx.probes(), ctx.options.seed)) {
      const auto d = check_randers_gradient_lemma(M.metric(p), M.chart(p.chart).field, p.coords);
      vector_defect = std::max(vector_defect, d.vector_defect);
      scalar_defect = std::max(scalar_defect, d.scalar_defect);
    }
    out.defects["randers_lemma_vector"] = number(vector_defect);
    out.defects["randers_lemma_scalar"] = number(scalar_defect);
  }
  out.data["transnormality"] = to_json(report);
  std::ostringstream csv;
  write_b_table_csv(csv, report);
  out.csv["b_table.csv"] = csv.str();
  return out;
}

Outcome trace_segment_verb(const Context& ctx) {
  const auto& n = ctx.config.numerics;
  const ChartPoint start = start_point(ctx, ctx.options.from.value_or(n.from));
  SegmentOptions opts;
  opts.step = ctx.step();
  opts.levels = n.levels;
  if (ctx.options.to) opts.stop_level = *ctx.options.to;
  const FSegment seg = trace_f_segment(ctx.manifold, start, parse_direction(ctx.options.direction), opts);
  const double tol = ctx.options.tol.value_or(n.distance_tol);

  Outcome out;
  out.verdict = seg.monotone && seg.speed_defect <= 1e-6 && seg.reparametrization_residual <= tol;
  out.defects["speed_defect"] = number(seg.speed_defect);
  out.defects["reparametrization_residual"] = number(seg.reparametrization_residual);
  out.data["segment"] = to_json(seg, ctx.manifold);
  out.data["residual_tolerance"] = number(tol);
  out.csv["trajectory.csv"] = trajectory_csv(seg.trajectory);
  return out;
}

Outcome verify_distance_verb(const Context& ctx) {
  const auto& n = ctx.config.numerics;
  const double c = ctx.options.from.value_or(n.from);
  const double d = ctx.options.to.value_or(n.to);
  DistanceOptions opts;
  opts.step = ctx.step();
  const DistanceCheck check = verify_distance_formula(ctx.manifold, c, d, ctx.probes(), opts);
  const double tol = ctx.options.tol.value_or(n.distance_tol);

  Outcome out;
  out.verdict = check.defect <= tol;
  out.defects["distance"] = number(check.defect);
  out.data["from"] = number(c);
  out.data["to"] = number(d);
  out.data["tolerance"] = number(tol);
  out.data["distance"] = to_json(check);
  return out;
}

ParallelOptions parallel_options(const Context& ctx) {
  ParallelOptions opts;
  opts.integrator.step = ctx.step();
  opts.tolerance = ctx.options.tol.value_or(ctx.config.numerics.parallel_tol);
  return opts;
}

Outcome check_parallel_verb(const Context& ctx) {
  const auto& n = ctx.config.numerics;
  const double c = ctx.options.from.value_or(n.from);
  const double d = ctx.options.to.value_or(n.to);
  std::vector<Direction> directions;
  if (ctx.options.direction.empty() || ctx.options.direction == "both") {
    directions = {Direction::Forward, Direction::Backward};
  } else {
    directions = {parse_direction(ctx.options.direction)};
  }
  Outcome out;
  out.verdict = true;
  Json reports = Json::array();
  for (const Direction dir : directions) {
    const ParallelismReport r = check_parallel(ctx.manifold, c, d, dir, ctx.probes(), parallel_options(ctx));
    out.verdict = out.verdict && r.verdict;
    out.defects[std::string(direction_name(dir))] = number(r.max_defect);
    reports.push_back(to_json(r));
  }
  out.data["parallelism"] = std::move(reports);
  return out;
}

Outcome check_partition_verb(const Context& ctx) {
  const auto& n = ctx.config.numerics;
  std::vector<double> levels = n.levels;
  if (ctx.options.from && ctx.options.to) levels = {*ctx.options.from, *ctx.options.to};
  if (levels.size() < 2) throw FinslerError(ErrorCode::ValidationError, "check-partition needs at least two levels");
  const PartitionReport report = check_finsler_partition(ctx.manifold, levels, ctx.probes(), parallel_options(ctx));
  Outcome out;
  out.verdict = report.finsler_partition_verdict;
  double forward = 0.0;
  double backward = 0.0;
  for (const auto& r : report.forward) forward = std::max(forward, r.max_defect);
  for (const auto& r : report.backward) backward = std::max(backward, r.max_defect);
  out.defects["forward"] = number(forward);
  out.defects["backward"] = number(backward);
  double cylinder = 0.0;
  for (double v : report.cylinder_match_defects) cylinder = std::max(cylinder, v);
  out.defects["cylinder_match"] = number(cylinder);
  out.data["partition"] = to_json(report);
  out.data["assumptions"] = Json::array({"analytic data (true for expression-defined scenarios, not checked)"});
  return out;
}

Outcome check_morse_bott_verb(const Context& ctx) {
  const MorseBottReport report = check_morse_bott(ctx.manifold, default_critical_seeds(ctx.manifold));
  Outcome out;
  out.verdict = report.verdict;
  double hessian = 0.0;
  for (const auto& c : report.critical_points) hessian = std::max(hessian, c.hessian_defect);
  out.defects["hessian"] = number(hessian);
  out.data["morse_bott"] = to_json(report);

  // Connected regular levels are a global hypothesis; only the sampled points are examined.
  Json connectivity;
  connectivity["partial_check"] = true;
  Json levels = Json::array();
  for (double c : ctx.config.numerics.levels) {
    Json row;
    row["level"] = number(c);
    try {
      row["components"] = sampled_components(ctx.manifold, extract_level_set(ctx.manifold, c, 64));
    } catch (const FinslerError& e) {
      row["components"] = nullptr;
      row["error"] = e.what();
    }
    levels.push_back(std::move(row));
  }
  connectivity["levels"] = std::move(levels);
  out.data["level_connectivity"] = std::move(connectivity);
  return out;
}

Outcome dump_geodesic_verb(const Context& ctx) {
  const Manifold& M = ctx.manifold;
  const ChartPoint start = start_point(ctx, ctx.options.from.value_or(ctx.config.numerics.from));
  ChartVector v0 = unit_normal(M, start, Direction::Forward);
  if (!ctx.options.velocity.empty()) {
    const Vec v = to_vec(parse_tuple(ctx.options.velocity, "--velocity"));
    if (v.size() != M.dimension()) {
      throw FinslerError(ErrorCode::DimensionMismatch, "--velocity needs " + std::to_string(M.dimension()) + " components");
    }
    v0.components = v;
  }
  const double t_end = ctx.options.time.value_or(1.0);
  if (!(t_end > 0.0)) throw FinslerError(ErrorCode::ValidationError, "--time must be positive");
  const GeodesicTrajectory traj = integrate_geodesic(M, v0, t_end, ctx.step());

  Outcome out;
  out.verdict = traj.speed_drift <= 1e-6 * traj.initial_speed;
  out.defects["speed_drift"] = number(traj.speed_drift);
  Json data;
  data["start"] = to_json(traj.samples.front().state.point(), M);
  data["end"] = to_json(traj.back().state.point(), M);
  data["time"] = number(t_end);
  data["initial_speed"] = number(traj.initial_speed);
  data["arc_length"] = number(traj.arc_length());
  data["samples"] = traj.samples.size();
  out.data["geodesic"] = std::move(data);
  out.csv["trajectory.csv"] = trajectory_csv(traj);
  return out;
}

int list_examples(const Options& options, std::ostream& out) {
  if (options.format == "json") {
    Json list = Json::array();
    for (const auto& e : registry()) {
      Json item;
      item["name"] = e.name;
      item["summary"] = e.summary;
      list.push_back(std::move(item));
    }
    out << render(list);
  } else {
    for (const auto& e : registry()) out << e.name << "\t" << e.summary << "\n";
  }
  return kExitPass;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FinslerError(ErrorCode::ValidationError, "cannot read scenario file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw FinslerError(ErrorCode::ValidationError, "cannot write '" + path.string() + "'");
  file << contents;
}

int run(const Options& options, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  if (options.verb == "list-examples") return list_examples(options, out);
  if (options.example.empty() == options.scenario_file.empty()) {
    err << "error: give exactly one of --example or --scenario\n";
    return kExitConfigError;
  }
  const ScenarioConfig config =
      options.example.empty() ? parse_scenario(read_file(options.scenario_file)) : load_example(options.example);
  const Manifold manifold = build_manifold(config);
  const Context ctx{options, config, manifold};

  Outcome result;
  if (options.verb == "check-transnormal") result = check_transnormal_verb(ctx);
  else if (options.verb == "trace-segment") result = trace_segment_verb(ctx);
  else if (options.verb == "verify-distance") result = verify_distance_verb(ctx);
  else if (options.verb == "check-parallel") result = check_parallel_verb(ctx);
  else if (options.verb == "check-partition") result = check_partition_verb(ctx);
  else if (options.verb == "check-morse-bott") result = check_morse_bott_verb(ctx);
  else result = dump_geodesic_verb(ctx);

  RunManifest manifest;
  manifest.scenario = config.name;
  manifest.seed = options.seed;
  manifest.command = "finsler-lab";
  for (const auto& a : args) manifest.command += " " + a;

  const bool want_json = options.format != "csv";
  const bool want_csv = options.format != "json";
  const std::string report_name = options.verb + ".json";
  if (!options.out_dir.empty()) {
    if (want_json) manifest.outputs.push_back(report_name);
    if (want_csv) {
      for (const auto& [name, contents] : result.csv) manifest.outputs.push_back(name);
    }
    manifest.outputs.push_back("manifest.json");
  }
  const Json report = report_json(config.name, options.verb, result.verdict, result.defects, result.data, manifest);

  if (options.out_dir.empty()) {
    if (want_json) out << render(report);
    if (want_csv) {
      for (const auto& [name, contents] : result.csv) out << contents;
    }
  } else {
    const std::filesystem::path dir(options.out_dir);
    std::filesystem::create_directories(dir);
    if (want_json) write_file(dir / report_name, render(report));
    if (want_csv) {
      for (const auto& [name, contents] : result.csv) write_file(dir / name, contents);
    }
    manifest.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_file(dir / "manifest.json", render(manifest_json(manifest, true)));
    out << options.verb << " " << config.name << ": " << (result.verdict ? "pass" : "FAIL") << " (" << dir.string()
        << ")\n";
  }
  return result.verdict ? kExitPass : kExitFailedVerdict;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options options;
  CLI::App app{"Numerical laboratory for transnormal functions on Finsler manifolds", "finsler-lab"};
  app.add_option("verb", options.verb, "command to run")->required()->check(CLI::IsMember(kVerbs));
  auto* example = app.add_option("--example", options.example, "built-in scenario name (see list-examples)");
  app.add_option("--scenario", options.scenario_file, "scenario file")->excludes(example);
  app.add_option("--from", options.from, "lower level / source level");
  app.add_option("--to", options.to, "upper level / target level");
  app.add_option("--probes", options.probes, "number of probe geodesics")->check(CLI::PositiveNumber);
  app.add_option("--step", options.step, "integrator step")->check(CLI::PositiveNumber);
  app.add_option("--tol", options.tol, "verdict tolerance")->check(CLI::PositiveNumber);
  app.add_option("--out", options.out_dir, "output directory for reports, CSV and manifest");
  app.add_option("--format", options.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
  app.add_option("--seed", options.seed, "seed for randomized sampling");
  app.add_option("--direction", options.direction, "forward, backward or both")
      ->check(CLI::IsMember({"forward", "backward", "both"}));
  app.add_option("--point", options.point, "start point, e.g. \"(0.3, 0)\"");
  app.add_option("--velocity", options.velocity, "initial velocity for dump-geodesic");
  app.add_option("--time", options.time, "integration time for dump-geodesic");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    return run(options, args, out, err);
  } catch (const FinslerError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace finsler
