#include "finsler/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "finsler/errors.hpp"
#include "finsler/format.hpp"

namespace finsler {

namespace {

using expr::Expression;

// A slice of the source with the 1-based position of its first character.
struct Located {
  std::string text;
  int line = 1;
  int column = 1;
};

Located trim(const Located& in) {
  const auto first = in.text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {"", in.line, in.column + static_cast<int>(in.text.size())};
  const auto last = in.text.find_last_not_of(" \t\r");
  return {in.text.substr(first, last - first + 1), in.line, in.column + static_cast<int>(first)};
}

// "(a, b, c)" or "[a, b]" -> its top-level elements.
std::vector<Located> split_list(const Located& raw, char open, char close) {
  const Located value = trim(raw);
  if (value.text.size() < 2 || value.text.front() != open || value.text.back() != close) {
    throw ParseError(std::string("expected a list in '") + open + "' ... '" + close + "'", value.line,
                     value.column);
  }
  std::vector<Located> items;
  int depth = 0;
  std::size_t start = 1;
  for (std::size_t i = 1; i + 1 < value.text.size(); ++i) {
    const char c = value.text[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') {
      if (--depth < 0) throw ParseError("unbalanced bracket", value.line, value.column + static_cast<int>(i));
    }
    if (c == ',' && depth == 0) {
      items.push_back(trim({value.text.substr(start, i - start), value.line, value.column + static_cast<int>(start)}));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError("unbalanced bracket", value.line, value.column);
  const Located last =
      trim({value.text.substr(start, value.text.size() - 1 - start), value.line, value.column + static_cast<int>(start)});
  if (!last.text.empty() || !items.empty()) items.push_back(last);
  for (const auto& item : items) {
    if (item.text.empty()) throw ParseError("empty list element", item.line, item.column);
  }
  return items;
}

Expression parse_expression(const Located& raw) {
  const Located value = trim(raw);
  if (value.text.empty()) throw ParseError("expected an expression", value.line, value.column);
  return expr::parse(value.text, value.line, value.column);
}

double parse_number(const Located& raw) {
  const Expression e = parse_expression(raw);
  if (e.max_variable() >= 0) {
    const Located value = trim(raw);
    throw ParseError("expected a number, found an expression in x, y, z", value.line, value.column);
  }
  const std::array<double, 3> zero{};
  return e.evaluate(zero);
}

int parse_count(const Located& raw) {
  const double v = parse_number(raw);
  if (v != std::floor(v) || v < 1 || v > 1e7) {
    const Located value = trim(raw);
    throw ParseError("expected a positive integer", value.line, value.column);
  }
  return static_cast<int>(v);
}

std::vector<double> parse_numbers(const Located& raw) {
  std::vector<double> out;
  for (const auto& item : split_list(raw, '(', ')')) out.push_back(parse_number(item));
  return out;
}

std::vector<Expression> parse_expressions(const Located& raw) {
  std::vector<Expression> out;
  for (const auto& item : split_list(raw, '(', ')')) out.push_back(parse_expression(item));
  return out;
}

std::vector<std::vector<Expression>> parse_matrix(const Located& raw) {
  std::vector<std::vector<Expression>> rows;
  for (const auto& row : split_list(raw, '[', ']')) {
    std::vector<Expression> entries;
    for (const auto& item : split_list(row, '[', ']')) entries.push_back(parse_expression(item));
    rows.push_back(std::move(entries));
  }
  return rows;
}

[[noreturn]] void invalid(const std::string& what) { throw FinslerError(ErrorCode::ValidationError, what); }

std::string join_numbers(const std::vector<double>& values) {
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + format_double(values[i]);
  return out + ")";
}

std::string join_expressions(const std::vector<Expression>& values) {
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + values[i].to_string();
  return out + ")";
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
  return out;
}

std::array<double, 3> padded(const Vec& x) {
  std::array<double, 3> vars{};
  for (int i = 0; i < x.size() && i < 3; ++i) vars[static_cast<std::size_t>(i)] = x(i);
  return vars;
}

bool all_constant(const std::vector<std::vector<Expression>>& m) {
  for (const auto& row : m) {
    for (const auto& e : row) {
      if (e.max_variable() >= 0) return false;
    }
  }
  return true;
}

RiemannianMetric metric_from(const std::vector<std::vector<Expression>>& h, int n) {
  if (all_constant(h)) {
    Mat m(n, n);
    const std::array<double, 3> zero{};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = h[i][j].evaluate(zero);
    }
    return RiemannianMetric::constant(m);
  }
  auto entries = std::make_shared<std::vector<expr::Program>>();
  auto partials = std::make_shared<std::vector<expr::Program>>();
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (k == 0) entries->emplace_back(h[i][j]);
        partials->emplace_back(h[i][j].derivative(k));
      }
    }
  }
  return RiemannianMetric(
      n,
      [entries, n](const Vec& x) {
        const auto vars = padded(x);
        Mat m(n, n);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) m(i, j) = (*entries)[static_cast<std::size_t>(i * n + j)](vars.data());
        }
        return m;
      },
      [partials, n](const Vec& x, MatrixPartials& out) {
        const auto vars = padded(x);
        for (int k = 0; k < n; ++k) {
          out[static_cast<std::size_t>(k)].resize(n, n);
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              out[static_cast<std::size_t>(k)](i, j) =
                  (*partials)[static_cast<std::size_t>((k * n + i) * n + j)](vars.data());
            }
          }
        }
      });
}

WindField wind_from(const std::vector<Expression>& w, int n) {
  if (std::all_of(w.begin(), w.end(), [](const Expression& e) { return e.max_variable() < 0; })) {
    Vec c(n);
    const std::array<double, 3> zero{};
    for (int i = 0; i < n; ++i) c(i) = w[static_cast<std::size_t>(i)].evaluate(zero);
    return WindField::constant(c);
  }
  auto components = std::make_shared<std::vector<expr::Program>>();
  auto jacobian = std::make_shared<std::vector<expr::Program>>();
  for (int i = 0; i < n; ++i) {
    components->emplace_back(w[static_cast<std::size_t>(i)]);
    for (int k = 0; k < n; ++k) jacobian->emplace_back(w[static_cast<std::size_t>(i)].derivative(k));
  }
  return WindField(
      n,
      [components, n](const Vec& x) {
        const auto vars = padded(x);
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = (*components)[static_cast<std::size_t>(i)](vars.data());
        return v;
      },
      [jacobian, n](const Vec& x) {
        const auto vars = padded(x);
        Mat J(n, n);
        for (int i = 0; i < n; ++i) {
          for (int k = 0; k < n; ++k) J(i, k) = (*jacobian)[static_cast<std::size_t>(i * n + k)](vars.data());
        }
        return J;
      });
}

MetricSpec metric_spec(const MetricConfig::Kind kind, const std::vector<std::vector<Expression>>& h,
                       const std::vector<Expression>& wind, int n) {
  RiemannianMetric base = metric_from(h, n);
  if (kind == MetricConfig::Kind::Riemannian) return MetricSpec::riemannian(std::move(base));
  return MetricSpec::randers(std::move(base), wind_from(wind, n));
}

// ---- sphere atlas -------------------------------------------------------------------------

constexpr double kBandDomain = 0.95;
constexpr double kBandInterior = 0.8;
constexpr double kCapDomain = 0.95;
constexpr double kCapInterior = 0.85;

Expression var(int i) { return Expression::variable(i); }
Expression num(double v) { return Expression::constant(v); }

struct ChartExpressions {
  std::vector<Expression> ambient;  // X, Y, Z in chart variables
  std::vector<std::vector<Expression>> h;
  // ambient wind (W_X, W_Y, W_Z) -> chart components
  std::function<std::vector<Expression>(const std::vector<Expression>&)> wind;
};

ChartExpressions band_chart() {
  const Expression rho2 = num(1) - pow(var(1), num(2));
  const Expression rho = sqrt(rho2);
  ChartExpressions c;
  c.ambient = {rho * cos(var(0)), rho * sin(var(0)), var(1)};
  c.h = {{rho2, num(0)}, {num(0), num(1) / rho2}};
  const auto X = c.ambient[0];
  const auto Y = c.ambient[1];
  c.wind = [X, Y, rho2](const std::vector<Expression>& W) {
    return std::vector<Expression>{(X * W[1] - Y * W[0]) / rho2, W[2]};
  };
  return c;
}

ChartExpressions cap_chart(double sign) {
  const Expression r2 = pow(var(0), num(2)) + pow(var(1), num(2));
  const Expression height = num(1) - r2;
  ChartExpressions c;
  c.ambient = {var(0), var(1), num(sign) * sqrt(height)};
  c.h = {{num(1) + pow(var(0), num(2)) / height, var(0) * var(1) / height},
         {var(0) * var(1) / height, num(1) + pow(var(1), num(2)) / height}};
  c.wind = [](const std::vector<Expression>& W) { return std::vector<Expression>{W[0], W[1]}; };
  return c;
}

Embedding band_embedding() {
  Embedding e;
  e.map = [](const Vec& x) {
    const double rho = std::sqrt(1.0 - x(1) * x(1));
    AmbientVec p(3);
    p << rho * std::cos(x(0)), rho * std::sin(x(0)), x(1);
    return p;
  };
  e.jacobian = [](const Vec& x) {
    const double rho = std::sqrt(1.0 - x(1) * x(1));
    AmbientMat J(3, 2);
    J << -rho * std::sin(x(0)), -x(1) * std::cos(x(0)) / rho, rho * std::cos(x(0)), -x(1) * std::sin(x(0)) / rho, 0.0,
        1.0;
    return J;
  };
  e.locate = [](const AmbientVec& p) -> std::optional<Vec> {
    if (std::abs(p(2)) >= 1.0) return std::nullopt;
    Vec x(2);
    x << std::atan2(p(1), p(0)), p(2);
    return x;
  };
  return e;
}

Embedding cap_embedding(double sign) {
  Embedding e;
  e.map = [sign](const Vec& x) {
    AmbientVec p(3);
    p << x(0), x(1), sign * std::sqrt(std::max(0.0, 1.0 - x.squaredNorm()));
    return p;
  };
  e.jacobian = [sign](const Vec& x) {
    const double height = std::sqrt(std::max(1e-300, 1.0 - x.squaredNorm()));
    AmbientMat J(3, 2);
    J << 1.0, 0.0, 0.0, 1.0, -sign * x(0) / height, -sign * x(1) / height;
    return J;
  };
  e.locate = [sign](const AmbientVec& p) -> std::optional<Vec> {
    if (sign * p(2) <= 0.0) return std::nullopt;
    Vec x(2);
    x << p(0), p(1);
    return x;
  };
  return e;
}

Chart sphere_chart(const ScenarioConfig& config, const std::string& name, const ChartExpressions& c, Domain domain,
                   Domain interior, Vec lo, Vec hi, Embedding embedding) {
  const Expression f = config.field.substitute(c.ambient);
  std::vector<Expression> wind;
  if (config.metric.kind == MetricConfig::Kind::Randers) {
    std::vector<Expression> ambient_wind;
    for (const auto& w : config.metric.wind) ambient_wind.push_back(w.substitute(c.ambient));
    wind = c.wind(ambient_wind);
  }
  return Chart{name,
               metric_spec(config.metric.kind, c.h, wind, 2),
               ScalarField::from_expression("f", 2, f),
               std::move(domain),
               std::move(interior),
               std::move(lo),
               std::move(hi),
               std::move(embedding)};
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Manifold sphere_manifold(const ScenarioConfig& config) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double pi = std::numbers::pi;
  std::vector<Chart> charts;
  charts.push_back(sphere_chart(config, "band", band_chart(), Domain::box(vec2(-inf, -kBandDomain), vec2(inf, kBandDomain)),
                                Domain::box(vec2(-inf, -kBandInterior), vec2(inf, kBandInterior)),
                                vec2(-pi, -kBandInterior), vec2(pi, kBandInterior), band_embedding()));
  for (const double sign : {1.0, -1.0}) {
    charts.push_back(sphere_chart(config, sign > 0 ? "north" : "south", cap_chart(sign),
                                  Domain::disc(vec2(0, 0), kCapDomain), Domain::disc(vec2(0, 0), kCapInterior),
                                  vec2(-kCapInterior, -kCapInterior), vec2(kCapInterior, kCapInterior),
                                  cap_embedding(sign)));
  }
  Manifold m(config.name, std::move(charts));
  m.validate_overlaps();
  return m;
}

// ---- validation samples -----------------------------------------------------------------

std::vector<std::array<double, 3>> validation_points(const ScenarioConfig& config) {
  std::vector<std::array<double, 3>> points;
  const auto& d = config.domain;
  if (d.kind == DomainConfig::Kind::SphereChart) {
    constexpr int count = 400;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      points.push_back({r * std::cos(golden * i), r * std::sin(golden * i), z});
    }
    return points;
  }
  const int n = config.dimension;
  const int per_axis = n == 1 ? 201 : (n == 2 ? 41 : 15);
  std::vector<double> lo(static_cast<std::size_t>(n));
  std::vector<double> hi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    lo[k] = d.kind == DomainConfig::Kind::Box ? d.lower[k] : d.center[k] - d.radius;
    hi[k] = d.kind == DomainConfig::Kind::Box ? d.upper[k] : d.center[k] + d.radius;
  }
  std::array<int, 3> index{};
  int total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  for (int flat = 0; flat < total; ++flat) {
    int rest = flat;
    for (int i = 0; i < n; ++i) {
      index[static_cast<std::size_t>(i)] = rest % per_axis;
      rest /= per_axis;
    }
    std::array<double, 3> p{};
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      p[k] = lo[k] + (hi[k] - lo[k]) * index[k] / (per_axis - 1);
      if (d.kind == DomainConfig::Kind::Disc) r2 += (p[k] - d.center[k]) * (p[k] - d.center[k]);
    }
    if (d.kind == DomainConfig::Kind::Disc && r2 > d.radius * d.radius * (1.0 + 1e-12)) continue;
    points.push_back(p);
  }
  return points;
}

std::string describe_point(const std::array<double, 3>& p, int n) {
  std::vector<double> v(p.begin(), p.begin() + n);
  return join_numbers(v);
}

double evaluate_checked(const Expression& e, const std::array<double, 3>& p, const std::string& what, int n) {
  try {
    return e.evaluate(p);
  } catch (const FinslerError& err) {
    invalid(what + " cannot be evaluated at " + describe_point(p, n) + " (" + err.what() + ")");
  }
}

}  // namespace

void validate_scenario(const ScenarioConfig& config) {
  const auto& d = config.domain;
  const bool sphere = d.kind == DomainConfig::Kind::SphereChart;
  const int n = config.dimension;
  const int ambient = sphere ? 3 : n;
  if (n < 1 || n > kMaxDimension) invalid("dimension must be 1, 2 or 3");
  if (config.name.empty()) invalid("scenario name is empty");

  if (d.kind == DomainConfig::Kind::Box) {
    if (static_cast<int>(d.lower.size()) != n || static_cast<int>(d.upper.size()) != n) {
      invalid("box bounds must both have dimension " + std::to_string(n));
    }
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!std::isfinite(d.lower[k]) || !std::isfinite(d.upper[k]) || d.lower[k] >= d.upper[k]) {
        invalid("box bounds must be finite with lower < upper");
      }
    }
  } else if (d.kind == DomainConfig::Kind::Disc) {
    if (static_cast<int>(d.center.size()) != n) invalid("disc center must have dimension " + std::to_string(n));
    if (!(d.radius > 0.0) || !std::isfinite(d.radius)) invalid("disc radius must be positive");
  } else if (n != 2) {
    invalid("sphere-chart scenarios are two dimensional");
  }

  const auto& m = config.metric;
  if (sphere) {
    if (!m.round) invalid("sphere-chart scenarios use h = round");
  } else {
    if (m.round) invalid("h = round is only available for sphere-chart domains");
    if (static_cast<int>(m.h.size()) != n) invalid("h must be a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    for (const auto& row : m.h) {
      if (static_cast<int>(row.size()) != n) invalid("h must be a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    }
  }
  if (m.kind == MetricConfig::Kind::Randers) {
    if (static_cast<int>(m.wind.size()) != ambient) {
      invalid("wind must have " + std::to_string(ambient) + " components, found " + std::to_string(m.wind.size()));
    }
  } else if (!m.wind.empty()) {
    invalid("a riemannian metric takes no wind");
  }

  auto check_variables = [&](const Expression& e, const std::string& what) {
    if (e.max_variable() >= ambient) {
      invalid(what + " uses variable '" + std::string(1, "xyz"[e.max_variable()]) + "' beyond dimension " +
              std::to_string(ambient));
    }
  };
  check_variables(config.field, "field f");
  for (const auto& row : m.h) {
    for (const auto& e : row) check_variables(e, "metric h");
  }
  for (const auto& e : m.wind) check_variables(e, "wind");

  const auto& num = config.numerics;
  if (!(num.step > 0.0)) invalid("step must be positive");
  if (!(num.transnormal_tol > 0.0) || !(num.parallel_tol > 0.0) || !(num.distance_tol > 0.0)) {
    invalid("tolerances must be positive");
  }
  if (!(num.sample_lo < num.sample_hi)) invalid("sample_range must be increasing");

  for (const auto& p : validation_points(config)) {
    evaluate_checked(config.field, p, "field f", ambient);
    Mat h(ambient, ambient);
    if (sphere) {
      // ambient inner product restricted to the tangent plane
      h.setIdentity();
    } else {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) h(i, j) = evaluate_checked(m.h[i][j], p, "metric h", n);
      }
      if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + h.cwiseAbs().maxCoeff())) {
        invalid("h is not symmetric at " + describe_point(p, n));
      }
      Eigen::LLT<Mat> llt(h);
      if (llt.info() != Eigen::Success) invalid("h is not positive definite at " + describe_point(p, n));
    }
    if (m.kind != MetricConfig::Kind::Randers) continue;
    Vec w(ambient);
    for (int i = 0; i < ambient; ++i) w(i) = evaluate_checked(m.wind[static_cast<std::size_t>(i)], p, "wind", ambient);
    if (sphere) {
      const double normal = w(0) * p[0] + w(1) * p[1] + w(2) * p[2];
      if (std::abs(normal) > 1e-9 * (1.0 + w.norm())) {
        invalid("wind is not tangent to the sphere at " + describe_point(p, 3));
      }
    }
    const double norm2 = w.dot(h * w);
    if (norm2 > kMaxWindNormSquared) {
      invalid("wind norm exceeds 1: h(W, W) = " + format_double(norm2) + " at " + describe_point(p, ambient));
    }
  }
}

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig config;
  std::string section;
  std::map<std::string, Located> seen;  // "section.key" -> value
  std::map<std::string, Located> keys;  // same, key position

  std::istringstream in{std::string(text)};
  std::string raw_line;
  int line_number = 0;
  while (std::getline(in, raw_line)) {
    ++line_number;
    if (const auto hash = raw_line.find('#'); hash != std::string::npos) raw_line.erase(hash);
    const Located line = trim({raw_line, line_number, 1});
    if (line.text.empty()) continue;
    if (line.text.front() == '[') {
      if (line.text.back() != ']') throw ParseError("unterminated section header", line.line, line.column);
      section = trim({line.text.substr(1, line.text.size() - 2), line.line, line.column + 1}).text;
      if (section != "domain" && section != "metric" && section != "field" && section != "numerics") {
        throw ParseError("unknown section [" + section + "]", line.line, line.column);
      }
      continue;
    }
    const auto eq = line.text.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line.line, line.column);
    const Located key = trim({line.text.substr(0, eq), line.line, line.column});
    const Located value = trim({line.text.substr(eq + 1), line.line, line.column + static_cast<int>(eq) + 1});
    if (key.text.empty()) throw ParseError("missing key before '='", line.line, line.column);
    if (value.text.empty()) throw ParseError("missing value after '='", value.line, value.column);
    const std::string full = section + "." + key.text;
    if (seen.count(full)) throw ParseError("duplicate key '" + key.text + "'", key.line, key.column);
    seen[full] = value;
    keys[full] = key;
  }

  auto take = [&](const std::string& full) -> std::optional<Located> {
    const auto it = seen.find(full);
    if (it == seen.end()) return std::nullopt;
    Located v = it->second;
    seen.erase(it);
    return v;
  };
  auto require = [&](const std::string& full) {
    auto v = take(full);
    if (!v) invalid("missing required key '" + full + "'");
    return *v;
  };

  config.name = require(".name").text;

  const Located kind = require("domain.kind");
  if (kind.text == "box") {
    config.domain.kind = DomainConfig::Kind::Box;
    config.domain.lower = parse_numbers(require("domain.lower"));
    config.domain.upper = parse_numbers(require("domain.upper"));
    config.dimension = static_cast<int>(config.domain.lower.size());
  } else if (kind.text == "disc") {
    config.domain.kind = DomainConfig::Kind::Disc;
    config.domain.center = parse_numbers(require("domain.center"));
    config.domain.radius = parse_number(require("domain.radius"));
    config.dimension = static_cast<int>(config.domain.center.size());
  } else if (kind.text == "sphere-chart") {
    config.domain.kind = DomainConfig::Kind::SphereChart;
    config.dimension = 2;
  } else {
    throw ParseError("unknown domain kind '" + kind.text + "' (box, disc or sphere-chart)", kind.line, kind.column);
  }

  const Located metric_kind = require("metric.kind");
  if (metric_kind.text == "riemannian") {
    config.metric.kind = MetricConfig::Kind::Riemannian;
  } else if (metric_kind.text == "randers") {
    config.metric.kind = MetricConfig::Kind::Randers;
  } else {
    throw ParseError("unknown metric kind '" + metric_kind.text + "' (riemannian or randers)", metric_kind.line,
                     metric_kind.column);
  }
  const Located h = require("metric.h");
  if (h.text == "round") {
    config.metric.round = true;
  } else {
    config.metric.h = parse_matrix(h);
  }
  if (auto wind = take("metric.wind")) {
    config.metric.wind = parse_expressions(*wind);
  } else if (config.metric.kind == MetricConfig::Kind::Randers) {
    invalid("randers metric requires 'wind'");
  }

  config.field = parse_expression(require("field.f"));

  auto& num = config.numerics;
  if (auto v = take("numerics.step")) num.step = parse_number(*v);
  if (auto v = take("numerics.transnormal_tol")) num.transnormal_tol = parse_number(*v);
  if (auto v = take("numerics.parallel_tol")) num.parallel_tol = parse_number(*v);
  if (auto v = take("numerics.distance_tol")) num.distance_tol = parse_number(*v);
  if (auto v = take("numerics.probes")) num.probes = parse_count(*v);
  if (auto v = take("numerics.levels")) num.levels = parse_numbers(*v);
  if (auto v = take("numerics.sample_range")) {
    const auto range = parse_numbers(*v);
    if (range.size() != 2) throw ParseError("sample_range takes two numbers", v->line, v->column);
    num.sample_lo = range[0];
    num.sample_hi = range[1];
  }
  if (auto v = take("numerics.sample_levels")) num.sample_levels = parse_count(*v);
  if (auto v = take("numerics.points_per_level")) num.points_per_level = parse_count(*v);
  if (auto v = take("numerics.from")) num.from = parse_number(*v);
  if (auto v = take("numerics.to")) num.to = parse_number(*v);

  if (!seen.empty()) {
    // report the earliest leftover key
    const Located* first = nullptr;
    std::string name;
    for (const auto& [full, value] : seen) {
      const Located& k = keys[full];
      if (!first || k.line < first->line) {
        first = &k;
        name = full;
      }
    }
    throw ParseError("unknown key '" + first->text + "' in " + (name.front() == '.' ? "header" : "[" + name.substr(0, name.find('.')) + "]"),
                     first->line, first->column);
  }

  validate_scenario(config);
  return config;
}

std::string print_scenario(const ScenarioConfig& config) {
  std::ostringstream out;
  out << "name = " << config.name << "\n\n[domain]\n";
  const auto& d = config.domain;
  switch (d.kind) {
    case DomainConfig::Kind::Box:
      out << "kind = box\nlower = " << join_numbers(d.lower) << "\nupper = " << join_numbers(d.upper) << "\n";
      break;
    case DomainConfig::Kind::Disc:
      out << "kind = disc\ncenter = " << join_numbers(d.center) << "\nradius = " << format_double(d.radius) << "\n";
      break;
    case DomainConfig::Kind::SphereChart:
      out << "kind = sphere-chart\n";
      break;
  }
  out << "\n[metric]\nkind = " << (config.metric.kind == MetricConfig::Kind::Randers ? "randers" : "riemannian") << "\n";
  if (config.metric.round) {
    out << "h = round\n";
  } else {
    out << "h = [";
    for (std::size_t i = 0; i < config.metric.h.size(); ++i) {
      out << (i ? ", " : "") << "[";
      for (std::size_t j = 0; j < config.metric.h[i].size(); ++j) {
        out << (j ? ", " : "") << config.metric.h[i][j].to_string();
      }
      out << "]";
    }
    out << "]\n";
  }
  if (!config.metric.wind.empty()) out << "wind = " << join_expressions(config.metric.wind) << "\n";
  out << "\n[field]\nf = " << config.field.to_string() << "\n";
  const auto& n = config.numerics;
  out << "\n[numerics]\n"
      << "step = " << format_double(n.step) << "\n"
      << "transnormal_tol = " << format_double(n.transnormal_tol) << "\n"
      << "parallel_tol = " << format_double(n.parallel_tol) << "\n"
      << "distance_tol = " << format_double(n.distance_tol) << "\n"
      << "probes = " << n.probes << "\n";
  if (!n.levels.empty()) out << "levels = " << join_numbers(n.levels) << "\n";
  out << "sample_range = " << join_numbers({n.sample_lo, n.sample_hi}) << "\n"
      << "sample_levels = " << n.sample_levels << "\n"
      << "points_per_level = " << n.points_per_level << "\n"
      << "from = " << format_double(n.from) << "\n"
      << "to = " << format_double(n.to) << "\n";
  return out.str();
}

Manifold build_manifold(const ScenarioConfig& config) {
  if (config.domain.kind == DomainConfig::Kind::SphereChart) return sphere_manifold(config);
  const int n = config.dimension;
  const auto& d = config.domain;
  const Domain domain = d.kind == DomainConfig::Kind::Box ? Domain::box(to_vec(d.lower), to_vec(d.upper))
                                                           : Domain::disc(to_vec(d.center), d.radius);
  Chart chart{"plane",
              metric_spec(config.metric.kind, config.metric.h, config.metric.wind, n),
              ScalarField::from_expression("f", n, config.field),
              domain,
              domain,
              domain.lower(),
              domain.upper(),
              Embedding::identity(n)};
  return Manifold(config.name, {std::move(chart)});
}

// ---- registry ---------------------------------------------------------------------------

namespace {

std::string minkowski_text(const std::string& name, double w) {
  const double lambda = 1.0 - w * w;
  const std::string l = format_double(lambda);
  const std::string ws = format_double(w);
  return "name = " + name +
         "\n\n[domain]\nkind = box\nlower = (-4, -4)\nupper = (4, 4)\n\n"
         "[metric]\nkind = randers\nh = [[1, 0], [0, 1]]\nwind = (" + ws + ", 0)\n\n"
         "[field]\n# forward distance from the origin\nf = (sqrt(" + l + " * (x^2 + y^2) + (" + ws + " * x)^2) - " + ws +
         " * x) / " + l +
         "\n\n[numerics]\nstep = 0.001\ntransnormal_tol = 1e-6\nparallel_tol = 1e-6\ndistance_tol = 1e-4\n"
         "probes = 32\nlevels = (1, 1.5, 2)\nsample_range = (0.5, 2)\nsample_levels = 40\npoints_per_level = 8\n"
         "from = 1\nto = 2\n";
}

const char* kDiscRadial = R"(name = disc-radial

[domain]
kind = disc
center = (0, 0)
radius = 0.9

[metric]
kind = randers
h = [[1, 0], [0, 1]]
wind = (x, y)

[field]
f = x^2 + y^2

[numerics]
step = 0.001
transnormal_tol = 1e-6
parallel_tol = 1e-4
distance_tol = 1e-4
probes = 32
levels = (0.04, 0.16, 0.36)
sample_range = (0.04, 0.64)
sample_levels = 100
points_per_level = 4
from = 0.04
to = 0.25
)";

const char* kDiscRadialLinear = R"(name = disc-radial-linear

[domain]
kind = disc
center = (0, 0)
radius = 0.9

[metric]
kind = randers
h = [[1, 0], [0, 1]]
wind = (x, y)

[field]
f = x

[numerics]
step = 0.001
transnormal_tol = 1e-6
parallel_tol = 1e-4
distance_tol = 1e-4
probes = 32
levels = (-0.3, 0, 0.3)
sample_range = (-0.7, 0.7)
sample_levels = 40
points_per_level = 8
from = -0.3
to = 0.3
)";

const char* kRandersSphere = R"(name = randers-sphere-height

[domain]
kind = sphere-chart

[metric]
kind = randers
h = round
# rotation about the z axis, a Killing field of the round sphere
wind = (-0.5 * y, 0.5 * x, 0)

[field]
f = z

[numerics]
step = 0.001
transnormal_tol = 1e-6
parallel_tol = 1e-4
distance_tol = 1e-4
probes = 32
levels = (-0.5, 0, 0.5)
sample_range = (-0.9, 0.9)
sample_levels = 40
points_per_level = 8
from = 0
to = 1
)";

const char* kRoundSphere = R"(name = round-sphere-height

[domain]
kind = sphere-chart

[metric]
kind = riemannian
h = round

[field]
f = z

[numerics]
step = 0.001
transnormal_tol = 1e-6
parallel_tol = 1e-4
distance_tol = 1e-4
probes = 32
levels = (-0.5, 0, 0.5)
sample_range = (-0.9, 0.9)
sample_levels = 40
points_per_level = 8
from = 0
to = 1
)";

const char* kEuclideanLinear = R"(name = euclidean-linear

[domain]
kind = box
lower = (-1, -1)
upper = (1, 1)

[metric]
kind = riemannian
h = [[1, 0], [0, 1]]

[field]
f = x

[numerics]
step = 0.001
transnormal_tol = 1e-6
parallel_tol = 1e-6
distance_tol = 1e-4
probes = 32
levels = (-0.5, 0, 0.5)
sample_range = (-0.9, 0.9)
sample_levels = 40
points_per_level = 8
from = -0.5
to = 0.5
)";

const char* kEuclideanRadial = R"(name = euclidean-radial

[domain]
kind = disc
center = (0, 0)
radius = 0.9

[metric]
kind = riemannian
h = [[1, 0], [0, 1]]

[field]
f = x^2 + y^2

[numerics]
step = 0.001
transnormal_tol = 1e-6
parallel_tol = 1e-4
distance_tol = 1e-4
probes = 32
levels = (0.04, 0.16, 0.36)
sample_range = (0.04, 0.64)
sample_levels = 100
points_per_level = 4
from = 0.04
to = 0.25
)";

}  // namespace

const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> entries = {
      {"minkowski-randers-distance", "Randers plane with constant wind |W| = 0.5, f = distance from the origin",
       minkowski_text("minkowski-randers-distance", 0.5), "1"},
      {"minkowski-randers-distance-w03", "same with |W| = 0.3", minkowski_text("minkowski-randers-distance-w03", 0.3), "1"},
      {"minkowski-randers-distance-w08", "same with |W| = 0.8", minkowski_text("minkowski-randers-distance-w08", 0.8), "1"},
      {"disc-radial", "unit-speed radial wind W = (x, y) on the disc of radius 0.9, f = x^2 + y^2", kDiscRadial, "(2 * sqrt(x) + 2 * x)^2"},
      {"disc-radial-linear", "radial wind on the disc with the linear field f = x", kDiscRadialLinear, "(1 + x)^2"},
      {"randers-sphere-height", "unit sphere with rotational wind of magnitude <= 0.5, f = z", kRandersSphere, "1 - x^2"},
      {"round-sphere-height", "round unit sphere, f = z", kRoundSphere, "1 - x^2"},
      {"euclidean-linear", "Euclidean square, f = x", kEuclideanLinear, "1"},
      {"euclidean-radial", "Euclidean disc, f = x^2 + y^2", kEuclideanRadial, "4 * x"},
  };
  return entries;
}

const RegistryEntry* find_example(std::string_view name) {
  for (const auto& e : registry()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

ScenarioConfig load_example(std::string_view name) {
  const RegistryEntry* entry = find_example(name);
  if (!entry) {
    std::string known;
    for (const auto& e : registry()) known += (known.empty() ? "" : ", ") + e.name;
    throw FinslerError(ErrorCode::ValidationError, "unknown example '" + std::string(name) + "' (known: " + known + ")");
  }
  return parse_scenario(entry->text);
}

}  // namespace finsler
