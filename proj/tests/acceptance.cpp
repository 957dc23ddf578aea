// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance <path to finsler-lab> <scenario directory>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/calculus.hpp"
#include "finsler/cli.hpp"
#include "finsler/errors.hpp"
#include "finsler/foliation.hpp"
#include "finsler/geodesic.hpp"
#include "finsler/scenario.hpp"
#include "finsler/transnormal.hpp"
#include "support.hpp"

using namespace finsler;
using test_support::Rng;

namespace {

std::string g_cli;
std::filesystem::path g_scenarios;

// Collects the individual checks of one criterion; the first few failures are kept for the log.
class Tally {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ << (failures_ > 1 ? "; " : "") << what;
  }
  void note(const std::string& s) { info_ += (info_.empty() ? "" : ", ") + s; }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    s << checks_ << " checks";
    if (failures_ > 0) s << ", " << failures_ << " failed: " << notes_.str();
    if (!info_.empty()) s << " (" << info_ << ")";
    return s.str();
  }

 private:
  int checks_ = 0;
  int failures_ = 0;
  std::ostringstream notes_;
  std::string info_;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

const Manifold& example(const std::string& name) {
  static std::map<std::string, Manifold> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, build_manifold(load_example(name))).first;
  return it->second;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::vector<std::string>& args) {
  std::string command = "'" + g_cli + "'";
  for (const std::string& a : args) command += " '" + a + "'";
  command += " 2>/dev/null";
  Run r;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<ChartPoint> random_regular_points(const Manifold& M, Rng& rng, int count) {
  std::vector<ChartPoint> out;
  while (static_cast<int>(out.size()) < count) {
    const std::size_t ci = static_cast<std::size_t>(rng.integer(0, static_cast<int>(M.chart_count()) - 1));
    const Chart& c = M.chart(ci);
    Vec x(M.dimension());
    for (int i = 0; i < M.dimension(); ++i) x(i) = rng.uniform(c.sample_lower(i), c.sample_upper(i));
    if (!c.interior.contains(x) || c.field.differential(x).norm() < 1e-3) continue;
    out.push_back({ci, x});
  }
  return out;
}

TransnormalityReport sampled_report(const std::string& name) {
  const ScenarioConfig cfg = load_example(name);
  const Manifold& M = example(name);
  return check_transnormal(M, sample_levels(M, cfg.numerics.sample_lo, cfg.numerics.sample_hi,
                                            cfg.numerics.sample_levels, cfg.numerics.points_per_level));
}

// Closed forms for the radial-wind disc.
double disc_b(double t) { return std::pow(2 * std::sqrt(t) + 2 * t, 2); }
double disc_b_prime(double t) { return 2 * (2 * std::sqrt(t) + 2 * t) * (1 / std::sqrt(t) + 2); }

const std::vector<std::string> kMinkowski{"minkowski-randers-distance-w03", "minkowski-randers-distance",
                                          "minkowski-randers-distance-w08"};

// ---------------------------------------------------------------------------------------

void disc_b_closed_form(Tally& t) {
  const auto start = std::chrono::steady_clock::now();
  const Manifold& M = example("disc-radial");
  const Manifold fd = M.with_derivative_mode(DerivativeMode::FiniteDifference);
  Rng rng(101);
  double worst = 0.0;
  double worst_fd = 0.0;
  int points = 0;
  while (points < 250) {
    const Vec x = rng.vector(2, -0.9, 0.9);
    const double s = x.squaredNorm();
    if (s < 0.0025 || s > 0.8) continue;
    ++points;
    const double F = finsler_gradient(M.chart(0).metric, M.chart(0).field, x).finsler_norm;
    const double Ffd = finsler_gradient(fd.chart(0).metric, fd.chart(0).field, x).finsler_norm;
    worst = std::max(worst, std::abs(F * F - disc_b(s)));
    worst_fd = std::max(worst_fd, std::abs(Ffd * Ffd - disc_b(s)));
  }
  const double elapsed = seconds_since(start);
  t.require(points >= 200, "too few points");
  t.require(worst <= 1e-6, "analytic defect " + num(worst));
  t.require(worst_fd <= 1e-4, "finite-difference defect " + num(worst_fd));
  t.require(elapsed < 1.0, "runtime " + num(elapsed) + " s");
  t.note("analytic " + num(worst) + ", fd " + num(worst_fd) + ", " + num(elapsed) + " s");
}

void minkowski_unit_gradient(Tally& t) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(102);
  double worst = 0.0;
  for (const std::string& name : kMinkowski) {
    const Manifold& M = example(name);
    int points = 0;
    while (points < 100) {
      const Vec x = rng.vector(2, -3.5, 3.5);
      if (x.norm() < 0.05) continue;
      ++points;
      const double F = finsler_gradient(M.chart(0).metric, M.chart(0).field, x).finsler_norm;
      worst = std::max(worst, std::abs(F - 1));
    }
  }
  const double elapsed = seconds_since(start);
  t.require(worst <= 1e-6, "max |F - 1| " + num(worst));
  t.require(elapsed < 1.0, "runtime " + num(elapsed) + " s");
  t.note("max |F - 1| " + num(worst) + ", " + num(elapsed) + " s");
}

void distance_formula(Tally& t) {
  const double closed = std::log(1.25);
  const DistanceCheck d = verify_distance_formula(example("disc-radial"), 0.04, 0.25, 16);
  t.require(std::abs(d.geodesic_distance - closed) <= 1e-4, "disc geodesic " + num(d.geodesic_distance));
  t.require(std::abs(d.quadrature - closed) <= 1e-4, "disc quadrature " + num(d.quadrature));
  t.require(std::abs(d.geodesic_distance - d.quadrature) <= 1e-4, "disc mutual defect");
  t.note("disc " + num(d.geodesic_distance - closed) + " from ln 1.25");
  for (const char* name : {"round-sphere-height", "randers-sphere-height"}) {
    const DistanceCheck s = verify_distance_formula(example(name), 0, 1, 16);
    const double half_pi = std::numbers::pi / 2;
    t.require(std::abs(s.geodesic_distance - half_pi) <= 1e-4, std::string(name) + " geodesic");
    t.require(std::abs(s.quadrature - half_pi) <= 1e-4, std::string(name) + " quadrature");
    t.note(std::string(name) + " " + num(s.quadrature - half_pi) + " from pi/2");
  }
}

void forward_backward_asymmetry(Tally& t) {
  const Manifold& M = example("minkowski-randers-distance");
  const ParallelismReport fwd = check_parallel(M, 1, 2, Direction::Forward, 32);
  const ParallelismReport bwd = check_parallel(M, 1, 2, Direction::Backward, 32);
  // Backward rays are straight lines along which f is convex; some bottom out above the lower
  // level and never arrive. Those count as launched probes without a defect.
  t.require(fwd.per_probe_defects.size() == 32, "forward arrivals " + std::to_string(fwd.per_probe_defects.size()));
  t.require(bwd.per_probe_defects.size() + bwd.failures.size() == 32, "backward probe count");
  t.require(fwd.max_defect <= 1e-6, "forward " + num(fwd.max_defect));
  t.require(bwd.max_defect >= 0.05, "backward " + num(bwd.max_defect));
  const Run r = run_cli({"check-partition", "--example", "minkowski-randers-distance"});
  t.require(r.code == kExitFailedVerdict, "check-partition exit " + std::to_string(r.code));
  t.note("forward " + num(fwd.max_defect) + ", backward " + num(bwd.max_defect) + " over " +
         std::to_string(bwd.per_probe_defects.size()) + " arrivals");
}

void sphere_partition(Tally& t) {
  const PartitionReport p = check_finsler_partition(example("randers-sphere-height"), {-0.5, 0, 0.5}, 32);
  double worst = 0.0;
  for (const auto* side : {&p.forward, &p.backward}) {
    for (const ParallelismReport& r : *side) {
      t.require(r.verdict, "level pair fails");
      worst = std::max(worst, r.max_defect);
    }
  }
  t.require(p.forward.size() >= 2 && p.backward.size() >= 2, "missing level pairs");
  t.require(worst <= 1e-4, "max defect " + num(worst));
  t.require(p.finsler_partition_verdict, "partition verdict");
  const Run r = run_cli({"check-partition", "--example", "randers-sphere-height"});
  t.require(r.code == kExitPass, "check-partition exit " + std::to_string(r.code));
  t.note("max defect " + num(worst));
}

void tensor_identities(Tally& t) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(106);
  double homogeneity = 0, norm = 0, first_variation = 0, cartan = 0, legendre_rt = 0, pairing = 0, zermelo = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = rng.integer(2, 3);
    const auto draw = test_support::random_randers(rng, n);
    const MetricSpec& F = draw.metric;
    const Vec x = rng.vector(n);
    const Vec v = rng.nonzero(n);
    const Vec u = rng.nonzero(n);
    const Vec w = rng.nonzero(n);
    const TangentVector tv{x, v};
    const Mat g = fundamental_tensor(F, tv);
    const double Fv = eval_metric(F, tv);

    const double lambda = rng.uniform(0.1, 10);
    homogeneity = std::max(homogeneity, (fundamental_tensor(F, {x, Vec(lambda * v)}) - g).norm() / g.norm());
    norm = std::max(norm, std::abs(v.dot(g * v) - Fv * Fv) / (Fv * Fv));

    // g_v(v, u) against a Richardson derivative of F^2/2 along u.
    auto half_sq = [&](double z) {
      const double Fz = eval_metric(F, {x, Vec(v + z * u)});
      return 0.5 * Fz * Fz;
    };
    auto central = [&](double h) { return (half_sq(h) - half_sq(-h)) / (2 * h); };
    const double fd = (4 * central(5e-4) - central(1e-3)) / 3;
    first_variation = std::max(first_variation, std::abs(v.dot(g * u) - fd));

    cartan = std::max({cartan, std::abs(cartan_tensor(F, tv, v, u, w)), std::abs(cartan_tensor(F, tv, u, v, w)),
                       std::abs(cartan_tensor(F, tv, u, w, v))});

    const Covector omega = legendre(F, tv);
    legendre_rt = std::max(legendre_rt, (legendre_inverse(F, omega).components - v).norm() / v.norm());

    // Navigation norm by bisection, and the alpha + beta split used to form the pairing.
    zermelo = std::max(zermelo, std::abs(Fv - test_support::zermelo_norm(draw.h, draw.wind, v)) / Fv);
    const AlphaBetaJet ab = F.alpha_beta(x, false);
    const double alpha = std::sqrt(v.dot(ab.A * v));
    const double beta_sq = ab.b.dot(ab.A.ldlt().solve(ab.b));
    const double mu = 1 - beta_sq;
    const double predicted = Fv / (mu * alpha) * (v - Fv * draw.wind).dot(draw.h * u);
    pairing = std::max(pairing, std::abs(predicted - v.dot(g * u)));
  }
  const double elapsed = seconds_since(start);
  t.require(homogeneity <= 1e-8, "homogeneity " + num(homogeneity));
  t.require(norm <= 1e-8, "g_v(v, v) " + num(norm));
  t.require(first_variation <= 1e-6, "first variation " + num(first_variation));
  t.require(cartan <= 1e-6, "Cartan " + num(cartan));
  t.require(legendre_rt <= 1e-10, "Legendre round trip " + num(legendre_rt));
  t.require(zermelo <= 1e-10, "navigation norm " + num(zermelo));
  t.require(pairing <= 1e-6, "Randers pairing " + num(pairing));
  t.require(elapsed < 5.0, "runtime " + num(elapsed) + " s");
  t.note("worst pairing " + num(pairing) + ", Cartan " + num(cartan) + ", " + num(elapsed) + " s");
}

void randers_gradient_relations(Tally& t) {
  Rng rng(107);
  double worst_vector = 0.0;
  double worst_scalar = 0.0;
  int scenarios = 0;
  for (const auto& entry : registry()) {
    const Manifold& M = example(entry.name);
    if (M.chart(0).metric.kind() != MetricKind::Randers) continue;
    ++scenarios;
    for (const ChartPoint& p : random_regular_points(M, rng, 100)) {
      const Chart& c = M.chart(p.chart);
      const auto zd = c.metric.zermelo(p.coords);
      const Vec df = c.field.differential(p.coords);
      const Vec grad = finsler_gradient(c.metric, c.field, p.coords).gradient.components;
      // Test-side oracle: h-gradient from df and the navigation norm by bisection.
      const Vec grad_h = zd->h.ldlt().solve(df);
      const double norm_h = std::sqrt(grad_h.dot(zd->h * grad_h));
      const double Z = test_support::zermelo_norm(zd->h, zd->wind, grad);
      const Vec residual = norm_h / Z * (grad - Z * zd->wind) - grad_h;
      worst_vector = std::max(worst_vector, std::sqrt(residual.dot(zd->h * residual)));
      worst_scalar = std::max(worst_scalar, std::abs(Z - norm_h - df.dot(zd->wind)));
      const RandersLemmaDefects lib = check_randers_gradient_lemma(c.metric, c.field, p.coords);
      worst_vector = std::max(worst_vector, lib.vector_defect);
      worst_scalar = std::max(worst_scalar, lib.scalar_defect);
    }
  }
  t.require(scenarios >= 4, "too few Randers scenarios");
  t.require(worst_vector <= 1e-6, "vector relation " + num(worst_vector));
  t.require(worst_scalar <= 1e-6, "scalar relation " + num(worst_scalar));
  t.note(std::to_string(scenarios) + " scenarios, vector " + num(worst_vector) + ", scalar " + num(worst_scalar));
}

void hat_reduction(Tally& t) {
  Rng rng(108);
  double gradient = 0.0;
  double norm = 0.0;
  for (const auto& entry : registry()) {
    const Manifold& M = example(entry.name);
    for (const ChartPoint& p : random_regular_points(M, rng, 100)) {
      const HatDefects h = check_hat_metric_reduction(M, p);
      gradient = std::max(gradient, h.gradient_defect);
      norm = std::max(norm, h.norm_defect);
    }
  }
  t.require(gradient <= 1e-8, "gradient " + num(gradient));
  t.require(norm <= 1e-8, "norm " + num(norm));

  double geodesic = 0.0;
  int compared = 0;
  for (const std::string name : {"disc-radial", "minkowski-randers-distance", "randers-sphere-height"}) {
    const Manifold& M = example(name);
    for (const ChartPoint& p : random_regular_points(M, rng, 12)) {
      // Launches that reach a critical point or the chart rim within unit time are out of scope.
      if (name == "randers-sphere-height" && M.value(p) > 0.6) continue;
      try {
        geodesic = std::max(geodesic, compare_hat_geodesic(M, p, 1.0, 0.25));
        ++compared;
      } catch (const FinslerError& e) {
        if (e.code() != ErrorCode::LeftDomain) throw;
      }
    }
  }
  t.require(compared >= 12, "only " + std::to_string(compared) + " geodesics compared");
  t.require(geodesic <= 1e-5, "geodesic deviation " + num(geodesic));
  t.note("gradient " + num(gradient) + ", norm " + num(norm) + ", geodesics " + num(geodesic) + " over " +
         std::to_string(compared));
}

void hessian_identities(Tally& t) {
  double worst = 0.0;
  for (const auto& entry : registry()) {
    const ScenarioConfig cfg = load_example(entry.name);
    const TransnormalityReport r = sampled_report(entry.name);
    std::vector<ChartPoint> points;
    for (const auto& level : sample_levels(example(entry.name), cfg.numerics.sample_lo, cfg.numerics.sample_hi, 7, 3)) {
      points.insert(points.end(), level.points.begin(), level.points.end());
    }
    worst = std::max(worst, check_hessian_identity(example(entry.name), points, *r.b_fit).max_defect);
  }
  t.require(worst <= 1e-3, "scenario defect " + num(worst));

  const double expected = 0.5 * disc_b_prime(0.09) * disc_b(0.09);
  const TransnormalityReport disc = sampled_report("disc-radial");
  const auto at = check_hessian_identity(example("disc-radial"), {{0, vec({0.3, 0})}}, *disc.b_fit);
  t.require(std::abs(at.samples.at(0).hessian - expected) <= 1e-3 * expected,
            "disc Hessian " + num(at.samples.at(0).hessian));
  t.require(std::abs(at.samples.at(0).expected - expected) <= 1e-3 * expected, "disc b'b/2 from the fit");

  const Manifold& D = example("disc-radial");
  const MorseBottReport mb = check_morse_bott(D, default_critical_seeds(D));
  t.require(mb.critical_points.size() == 1, "disc critical point count");
  if (mb.critical_points.size() == 1) {
    const CriticalPointInfo& c = mb.critical_points[0];
    t.require(c.point.coords.norm() <= 1e-10, "disc critical point location");
    t.require((c.hessian - 2 * Mat::Identity(2, 2)).norm() <= 1e-8, "disc Hessian at the origin");
    t.require(std::abs(0.5 * c.b_prime - 2) <= 1e-3, "b'(0)/2 = " + num(0.5 * c.b_prime));
    for (double h : c.unit_hessians) t.require(std::abs(h - 2) <= 1e-3, "unit Hessian " + num(h));
  }
  t.require(mb.verdict, "disc Morse-Bott verdict");
  for (const char* name : {"round-sphere-height", "randers-sphere-height"}) {
    const Manifold& S = example(name);
    const MorseBottReport r = check_morse_bott(S, default_critical_seeds(S));
    t.require(r.critical_points.size() == 2, std::string(name) + " pole count");
    for (const CriticalPointInfo& c : r.critical_points) {
      t.require(c.kernel_dim == c.tangent_dim, std::string(name) + " kernel dimension");
    }
    t.require(r.verdict, std::string(name) + " verdict");
  }
  t.note("scenario defect " + num(worst) + ", disc value " + num(at.samples.at(0).hessian));
}

void integrator_order(Tally& t) {
  const Manifold& M = example("randers-sphere-height");
  const ChartVector v0{0, vec({0.2, 0.1}), vec({0.7, 0.9})};
  std::vector<double> drift;
  for (double h : {0.08, 0.04, 0.02}) drift.push_back(integrate_geodesic(M, v0, 1.0, h).speed_drift);
  t.require(drift[0] / drift[1] >= 8 && drift[1] / drift[2] >= 8, "drift ratios");

  Rng rng(110);
  double straight = 0.0;
  for (const std::string& name : kMinkowski) {
    const Manifold& K = example(name);
    for (int k = 0; k < 10; ++k) {
      const Vec x0 = rng.vector(2);
      const Vec v = rng.nonzero(2);
      const GeodesicTrajectory g = integrate_geodesic(K, {0, x0, v}, 1.0);
      for (const GeodesicSample& s : g.samples) straight = std::max(straight, (s.state.base - (x0 + s.time * v)).norm());
    }
  }
  for (int k = 0; k < 20; ++k) {
    const auto draw = test_support::random_randers(rng, rng.integer(2, 3));
    const Vec x0 = rng.vector(static_cast<int>(draw.h.rows()));
    const Vec v = rng.nonzero(static_cast<int>(draw.h.rows()));
    for (const GeodesicSample& s : integrate_geodesic(draw.metric, {x0, v}, 1.0, 0.01).samples) {
      straight = std::max(straight, (s.state.base - (x0 + s.time * v)).norm());
    }
  }
  t.require(straight <= 1e-9, "straight-line deviation " + num(straight));
  t.note("drift ratios " + num(drift[0] / drift[1]) + ", " + num(drift[1] / drift[2]) + "; straight " + num(straight));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string without_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind('#', 0) != 0) out += line + '\n';
  }
  return out;
}

void cli_and_parser(Tally& t) {
  int files = 0;
  for (const auto& item : std::filesystem::directory_iterator(g_scenarios)) {
    if (item.path().extension() != ".scn") continue;
    ++files;
    const std::string name = item.path().stem().string();
    try {
      const std::string text = slurp(item.path());
      const ScenarioConfig cfg = parse_scenario(text);
      validate_scenario(cfg);
      build_manifold(cfg);
      const std::string printed = print_scenario(cfg);
      t.require(printed == without_comments(text), name + " round trip");
      t.require(print_scenario(parse_scenario(printed)) == printed, name + " print fixed point");
    } catch (const FinslerError& e) {
      t.require(false, name + ": " + e.what());
    }
    const Run r = run_cli({"check-transnormal", "--scenario", item.path().string()});
    t.require(r.code == kExitPass, name + " via the CLI exits " + std::to_string(r.code));
  }
  t.require(files == static_cast<int>(registry().size()), "scenario file count " + std::to_string(files));

  Rng rng(111);
  double symbolic = 0.0;
  for (const auto& entry : registry()) {
    const Manifold& M = example(entry.name);
    for (const ChartPoint& p : random_regular_points(M, rng, 100)) {
      const Chart& c = M.chart(p.chart);
      const Vec df = c.field.differential(p.coords);
      for (int i = 0; i < M.dimension(); ++i) {
        auto central = [&](double h) {
          Vec up = p.coords;
          Vec down = p.coords;
          up(i) += h;
          down(i) -= h;
          return (c.field.value(up) - c.field.value(down)) / (2 * h);
        };
        const double fd = (4 * central(5e-4) - central(1e-3)) / 3;
        symbolic = std::max(symbolic, std::abs(df(i) - fd) / (1 + std::abs(fd)));
      }
    }
  }
  t.require(symbolic <= 1e-8, "symbolic gradient vs finite differences " + num(symbolic));

  const std::vector<std::vector<std::string>> runs{
      {"check-transnormal", "--example", "randers-sphere-height"},
      {"verify-distance", "--example", "disc-radial", "--from", "0.04", "--to", "0.25"},
      {"check-partition", "--example", "minkowski-randers-distance-w03", "--probes", "8"},
      {"check-morse-bott", "--example", "disc-radial"}};
  for (const auto& args : runs) {
    const Run a = run_cli(args);
    const Run b = run_cli(args);
    t.require(!a.out.empty() && a.out == b.out && a.code == b.code, args[0] + " output differs between runs");
  }
  t.note(std::to_string(files) + " scenario files, symbolic " + num(symbolic));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <finsler-lab> <scenario-dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_scenarios = argv[2];

  const std::vector<std::pair<std::string, std::function<void(Tally&)>>> criteria{
      {"radial-wind disc matches the closed-form b", disc_b_closed_form},
      {"Minkowski distance functions have unit gradient", minkowski_unit_gradient},
      {"distance between level sets", distance_formula},
      {"forward/backward asymmetry on the Minkowski plane", forward_backward_asymmetry},
      {"Killing-wind sphere is a Finsler partition", sphere_partition},
      {"fundamental and Cartan tensor identities", tensor_identities},
      {"Randers gradient relations", randers_gradient_relations},
      {"hat metric reduction", hat_reduction},
      {"Hessian identities and Morse-Bott", hessian_identities},
      {"integrator order and straight lines", integrator_order},
      {"scenario files, symbolic gradients, determinism", cli_and_parser}};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Tally t;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(t);
    } catch (const std::exception& e) {
      t.require(false, std::string("exception: ") + e.what());
    }
    const bool ok = t.ok();
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": " << criteria[i].first << " ["
              << t.summary() << "] " << num(seconds_since(start)) << " s" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
