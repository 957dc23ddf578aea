#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "finsler/cli.hpp"
#include "finsler/errors.hpp"
#include "finsler/scenario.hpp"
#include "support.hpp"

using namespace finsler;
using test_support::Rng;

namespace {

const char* kDiscText = R"(name = test-disc

[domain]
kind = disc
center = (0, 0)
radius = 1

[metric]
kind = randers
h = [[1, 0], [0, 1]]
wind = (0.5 * x, 0)

[field]
f = x^2 + y^2
)";

std::string with_line(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

struct ParseFailure {
  ErrorCode code = ErrorCode::EvalError;
  int line = 0;
  int column = 0;
  std::string message;
};

ParseFailure failure_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return {e.code(), e.line(), e.column(), e.what()};
  } catch (const FinslerError& e) {
    return {e.code(), 0, 0, e.what()};
  }
  return {};
}

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Comment lines are the only thing the printer drops.
std::string without_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind('#', 0) != 0) out += line + "\n";
  }
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("parse errors") {
  SUBCASE("dangling operator") {
    const ParseFailure f = failure_of(with_line(kDiscText, "f = x^2 + y^2", "f = x^2 +"));
    CHECK(f.code == ErrorCode::ParseError);
    CHECK(f.line == 14);
    CHECK(f.column == 10);
  }
  SUBCASE("unknown key") {
    const ParseFailure f = failure_of(with_line(kDiscText, "radius = 1", "radius = 1\nwidth = 2"));
    CHECK(f.code == ErrorCode::ParseError);
    CHECK(f.line == 7);
  }
  SUBCASE("duplicate key") {
    CHECK(failure_of(with_line(kDiscText, "radius = 1", "radius = 1\nradius = 0.5")).code == ErrorCode::ParseError);
  }
  SUBCASE("unknown section") {
    const ParseFailure f = failure_of(with_line(kDiscText, "[field]", "[fields]"));
    CHECK(f.code == ErrorCode::ParseError);
    CHECK(f.line == 13);
  }
  SUBCASE("missing equals sign") {
    CHECK(failure_of(with_line(kDiscText, "radius = 1", "radius 1")).code == ErrorCode::ParseError);
  }
  SUBCASE("bad vector literal") {
    CHECK(failure_of(with_line(kDiscText, "center = (0, 0)", "center = (0, 0")).code == ErrorCode::ParseError);
  }
}

TEST_CASE("validation errors") {
  SUBCASE("wind norm above one") {
    const ParseFailure f = failure_of(with_line(kDiscText, "wind = (0.5 * x, 0)", "wind = (2 * x, 0)"));
    CHECK(f.code == ErrorCode::ValidationError);
    CHECK(f.message.find("wind norm exceeds 1") != std::string::npos);
  }
  SUBCASE("missing field") {
    const std::string text = with_line(kDiscText, "f = x^2 + y^2\n", "");
    CHECK(failure_of(text).code == ErrorCode::ValidationError);
  }
  SUBCASE("variable outside the dimension") {
    CHECK(failure_of(with_line(kDiscText, "f = x^2 + y^2", "f = x + z")).code == ErrorCode::ValidationError);
  }
  SUBCASE("indefinite h") {
    CHECK(failure_of(with_line(kDiscText, "h = [[1, 0], [0, 1]]", "h = [[1, 0], [0, -1]]")).code ==
          ErrorCode::ValidationError);
  }
  SUBCASE("asymmetric h") {
    CHECK(failure_of(with_line(kDiscText, "h = [[1, 0], [0, 1]]", "h = [[1, 0.1], [0, 1]]")).code ==
          ErrorCode::ValidationError);
  }
  SUBCASE("wrong wind shape") {
    CHECK(failure_of(with_line(kDiscText, "wind = (0.5 * x, 0)", "wind = (0.5 * x)")).code ==
          ErrorCode::ValidationError);
  }
  SUBCASE("field undefined on the domain") {
    CHECK(failure_of(with_line(kDiscText, "f = x^2 + y^2", "f = ln(x)")).code == ErrorCode::ValidationError);
  }
  SUBCASE("sphere wind must be tangent") {
    std::string text = find_example("randers-sphere-height")->text;
    const auto at = text.find("wind = ");
    const auto end = text.find('\n', at);
    text.replace(at, end - at, "wind = (0, 0, 0.5)");
    CHECK(failure_of(text).code == ErrorCode::ValidationError);
  }
  SUBCASE("sphere needs the round metric") {
    std::string text = find_example("round-sphere-height")->text;
    text = with_line(text, "h = round", "h = [[1, 0], [0, 1]]");
    CHECK(failure_of(text).code == ErrorCode::ValidationError);
  }
}

TEST_CASE("the disc file reproduces the radial-wind example") {
  const ScenarioConfig cfg = parse_scenario(find_example("disc-radial")->text);
  CHECK(cfg.name == "disc-radial");
  CHECK(cfg.dimension == 2);
  CHECK(cfg.domain.kind == DomainConfig::Kind::Disc);
  CHECK(cfg.domain.radius == 0.9);
  CHECK(cfg.metric.kind == MetricConfig::Kind::Randers);
  CHECK(cfg.field.to_string() == "x^2 + y^2");
  const Manifold M = build_manifold(cfg);
  Vec p(2);
  p << 0.3, 0;
  CHECK(finsler_gradient(M.chart(0).metric, M.chart(0).field, p).finsler_norm == doctest::Approx(0.78));
}

TEST_CASE("registry round trips") {
  for (const auto& entry : registry()) {
    CAPTURE(entry.name);
    const ScenarioConfig cfg = parse_scenario(entry.text);
    const std::string printed = print_scenario(cfg);
    CHECK(printed == without_comments(entry.text));
    CHECK(print_scenario(parse_scenario(printed)) == printed);
    CHECK_NOTHROW(validate_scenario(cfg));
    CHECK_NOTHROW(build_manifold(cfg));
  }
}

TEST_CASE("scenario files match the registry") {
  const std::filesystem::path dir = FINSLER_SCENARIO_DIR;
  std::size_t files = 0;
  for (const auto& item : std::filesystem::directory_iterator(dir)) {
    if (item.path().extension() != ".scn") continue;
    ++files;
    const std::string name = item.path().stem().string();
    CAPTURE(name);
    const RegistryEntry* entry = find_example(name);
    REQUIRE(entry != nullptr);
    CHECK(slurp(item.path()) == entry->text);
  }
  CHECK(files == registry().size());
}

TEST_CASE("symbolic gradients agree with finite differences") {
  Rng rng(61);
  for (const auto& entry : registry()) {
    CAPTURE(entry.name);
    const Manifold M = build_manifold(load_example(entry.name));
    for (const Chart& c : M.charts()) {
      int tested = 0;
      while (tested < 100) {
        Vec x(M.dimension());
        for (int i = 0; i < M.dimension(); ++i) x(i) = rng.uniform(c.sample_lower(i), c.sample_upper(i));
        // The Minkowski distance has a cone point at the origin.
        if (!c.interior.contains(x) || x.norm() < 0.05) continue;
        ++tested;
        const Vec df = c.field.differential(x);
        for (int i = 0; i < M.dimension(); ++i) {
          // Richardson-extrapolated central differences.
          auto central = [&](double h) {
            Vec up = x;
            Vec down = x;
            up(i) += h;
            down(i) -= h;
            return (c.field.value(up) - c.field.value(down)) / (2 * h);
          };
          const double fd = (4 * central(5e-4) - central(1e-3)) / 3;
          CHECK(std::abs(df(i) - fd) <= 1e-8 * (1 + std::abs(fd)));
        }
      }
    }
  }
}

TEST_CASE("list-examples") {
  const CliRun r = cli({"list-examples"});
  CHECK(r.code == kExitPass);
  for (const char* name : {"minkowski-randers-distance", "disc-radial", "randers-sphere-height", "euclidean-linear"}) {
    CHECK(r.out.find(name) != std::string::npos);
  }
  const CliRun j = cli({"list-examples", "--format", "json"});
  CHECK(j.code == kExitPass);
  CHECK(nlohmann::json::parse(j.out).size() >= 4);
}

TEST_CASE("exit codes") {
  SUBCASE("passing transnormality check") {
    const CliRun r = cli({"check-transnormal", "--example", "disc-radial"});
    CHECK(r.code == kExitPass);
    const auto report = nlohmann::ordered_json::parse(r.out);
    std::vector<std::string> keys;
    for (const auto& item : report.items()) keys.push_back(item.key());
    CHECK(keys == std::vector<std::string>{"scenario", "verb", "verdict", "defects", "data", "manifest"});
    CHECK(report["verdict"] == true);
    CHECK(report["defects"]["b_reference"].get<double>() <= 1e-6);
  }
  SUBCASE("distance on the disc") {
    const CliRun r = cli({"verify-distance", "--example", "disc-radial", "--from", "0.04", "--to", "0.25"});
    CHECK(r.code == kExitPass);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(std::abs(report["data"]["distance"]["geodesic_distance"].get<double>() - std::log(1.25)) <= 1e-4);
  }
  SUBCASE("failed partition verdict") {
    const CliRun r = cli({"check-partition", "--example", "minkowski-randers-distance"});
    CHECK(r.code == kExitFailedVerdict);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(report["defects"]["forward"].get<double>() <= 1e-6);
    CHECK(report["defects"]["backward"].get<double>() >= 0.05);
  }
  SUBCASE("configuration errors") {
    CHECK(cli({"check-transnormal", "--example", "no-such-example"}).code == kExitConfigError);
    CHECK(cli({"check-transnormal"}).code == kExitConfigError);
    CHECK(cli({"frobnicate", "--example", "disc-radial"}).code == kExitConfigError);
    CHECK(cli({"check-transnormal", "--scenario", "/nonexistent/file.scn"}).code == kExitConfigError);
    CHECK(cli({"verify-distance", "--example", "disc-radial", "--from", "0", "--to", "0.25"}).code ==
          kExitConfigError);
    CHECK(cli({"check-transnormal", "--example", "disc-radial", "--scenario", "x.scn"}).code == kExitConfigError);
  }
  SUBCASE("report notes for global hypotheses") {
    const auto mb = nlohmann::json::parse(cli({"check-morse-bott", "--example", "disc-radial"}).out);
    CHECK(mb["data"]["level_connectivity"]["partial_check"] == true);
    for (const auto& row : mb["data"]["level_connectivity"]["levels"]) CHECK(row["components"] == 1);
    const auto part = nlohmann::json::parse(cli({"check-partition", "--example", "randers-sphere-height", "--probes", "4"}).out);
    CHECK(part["data"]["assumptions"].size() == 1);
  }
  SUBCASE("numerical failure") {
    CHECK(cli({"check-morse-bott", "--example", "euclidean-linear"}).code == kExitNumericalFailure);
  }
  SUBCASE("scenario file") {
    const auto path = std::filesystem::path(FINSLER_SCENARIO_DIR) / "euclidean-linear.scn";
    CHECK(cli({"check-transnormal", "--scenario", path.string()}).code == kExitPass);
  }
}

TEST_CASE("identical invocations give identical reports") {
  const std::vector<std::vector<std::string>> runs{
      {"check-transnormal", "--example", "randers-sphere-height", "--seed", "7"},
      {"trace-segment", "--example", "disc-radial", "--format", "both"},
      {"dump-geodesic", "--example", "minkowski-randers-distance", "--point", "(1, 0.5)"},
      {"check-parallel", "--example", "minkowski-randers-distance-w03", "--probes", "8"}};
  for (const auto& args : runs) {
    CAPTURE(args[0]);
    const CliRun a = cli(args);
    const CliRun b = cli(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
  }
}

TEST_CASE("output directory") {
  const auto dir = std::filesystem::temp_directory_path() / "finsler-lab-test-out";
  std::filesystem::remove_all(dir);
  const CliRun r =
      cli({"check-transnormal", "--example", "euclidean-radial", "--out", dir.string(), "--format", "both"});
  CHECK(r.code == kExitPass);
  REQUIRE(std::filesystem::exists(dir / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.contains("wall_time_seconds"));
  CHECK(manifest["scenario"] == "euclidean-radial");
  for (const auto& output : manifest["outputs"]) {
    CAPTURE(output.get<std::string>());
    CHECK(std::filesystem::exists(dir / output.get<std::string>()));
  }
  CHECK(std::filesystem::exists(dir / "b_table.csv"));
  const std::string first = slurp(dir / "check-transnormal.json");
  cli({"check-transnormal", "--example", "euclidean-radial", "--out", dir.string(), "--format", "both"});
  CHECK(slurp(dir / "check-transnormal.json") == first);
  std::filesystem::remove_all(dir);
}
