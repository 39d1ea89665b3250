#include "wavemc/run_config.hpp"

#include <fstream>
#include <set>

#include "wavemc/format.hpp"

namespace wavemc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& known) {
  for (const auto& [key, _] : obj.items())
    if (!known.contains(key)) fail(where, "unknown key '" + key + "'");
}

double get_number(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) fail(where, "missing key '" + key + "'");
  if (!obj[key].is_number()) fail(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

std::string expr_text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_double(v.get<double>());
  fail(where, "expected an expression string or number");
}

DomainSpec parse_domain(const json& d, int dim) {
  if (!d.is_object()) fail("problem.domain", "expected an object");
  const std::string type = d.value("type", "");
  const double tol = d.value("boundary_tol", DomainSpec::kDefaultBoundaryTol);
  if (type == "interval") {
    check_keys(d, "problem.domain", {"type", "a", "b", "boundary_tol"});
    if (dim != 1) fail("problem.domain", "interval requires dim=1");
    return DomainSpec::interval(get_number(d, "problem.domain", "a"),
                                get_number(d, "problem.domain", "b"), tol);
  }
  if (type == "box") {
    check_keys(d, "problem.domain", {"type", "lo", "hi", "boundary_tol"});
    std::vector<double> lo = d.value("lo", std::vector<double>{});
    std::vector<double> hi = d.value("hi", std::vector<double>{});
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
      fail("problem.domain", "lo/hi must have dim entries");
    return DomainSpec::box(std::move(lo), std::move(hi), tol);
  }
  if (type == "ball") {
    check_keys(d, "problem.domain", {"type", "center", "radius", "boundary_tol"});
    std::vector<double> center = d.value("center", std::vector<double>{});
    if (static_cast<int>(center.size()) != dim)
      fail("problem.domain", "center must have dim entries");
    return DomainSpec::ball(std::move(center), get_number(d, "problem.domain", "radius"), tol);
  }
  fail("problem.domain.type", "expected one of interval, box, ball (generic indicator "
                              "domains are library-only)");
}

std::vector<Expr> parse_drift(const json& v, int dim) {
  std::vector<Expr> out;
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != dim)
      fail("problem.drift", "expected dim entries");
    for (const auto& e : v) out.push_back(parse_real_expr(expr_text(e, "problem.drift"), dim));
    return out;
  }
  const Expr e = parse_real_expr(expr_text(v, "problem.drift"), dim);
  if (dim > 1 && !(e.simplified().kind() == ExprKind::constant &&
                   e.simplified().node()->value == Complex(0.0, 0.0)))
    fail("problem.drift", "a single expression is only allowed for dim=1 (or the constant 0)");
  out.assign(static_cast<std::size_t>(dim), e);
  return out;
}

std::vector<std::vector<Expr>> parse_diffusion(const json& v, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  std::vector<std::vector<Expr>> m(d, std::vector<Expr>(d, Expr::constant(0.0)));
  if (v.is_array() && !v.empty() && v[0].is_array()) {  // full matrix
    if (v.size() != d) fail("problem.diffusion", "matrix must have dim rows");
    for (std::size_t i = 0; i < d; ++i) {
      if (v[i].size() != d) fail("problem.diffusion", "matrix rows must have dim entries");
      for (std::size_t j = 0; j < d; ++j)
        m[i][j] = parse_real_expr(expr_text(v[i][j], "problem.diffusion"), dim);
    }
    return m;
  }
  if (v.is_array()) {  // diagonal
    if (v.size() != d) fail("problem.diffusion", "diagonal must have dim entries");
    for (std::size_t i = 0; i < d; ++i)
      m[i][i] = parse_real_expr(expr_text(v[i], "problem.diffusion"), dim);
    return m;
  }
  // scalar: sigma(x) * identity
  const Expr s = parse_real_expr(expr_text(v, "problem.diffusion"), dim);
  for (std::size_t i = 0; i < d; ++i) m[i][i] = s;
  return m;
}

RaoBlackwellMode parse_rb(const std::string& s) {
  if (s == "off") return RaoBlackwellMode::off;
  if (s == "exp_family") return RaoBlackwellMode::exp_family;
  if (s == "poly_family") return RaoBlackwellMode::poly_family;
  if (s == "auto") return RaoBlackwellMode::auto_detect;
  fail("estimator.rao_blackwell", "expected off, exp_family, poly_family or auto");
}

RunMode parse_mode(const std::string& s) {
  if (s == "solve") return RunMode::solve;
  if (s == "dt") return RunMode::dt;
  if (s == "exit-stats") return RunMode::exit_stats;
  if (s == "reference") return RunMode::reference;
  if (s == "compare") return RunMode::compare;
  if (s == "selftest") return RunMode::selftest;
  fail("mode", "expected solve, dt, exit-stats, reference, compare or selftest");
}

}  // namespace

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::solve: return "solve";
    case RunMode::dt: return "dt";
    case RunMode::exit_stats: return "exit-stats";
    case RunMode::reference: return "reference";
    case RunMode::compare: return "compare";
    case RunMode::selftest: return "selftest";
  }
  return "?";
}

const char* to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "json";
}

const char* to_string(RaoBlackwellMode mode) {
  switch (mode) {
    case RaoBlackwellMode::off: return "off";
    case RaoBlackwellMode::exp_family: return "exp_family";
    case RaoBlackwellMode::poly_family: return "poly_family";
    case RaoBlackwellMode::auto_detect: return "auto";
  }
  return "?";
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "': expected key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;  // unquoted strings pass through verbatim
  }

  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(doc, "top level", {"problem", "estimator", "output", "mode", "reference"});

  RunConfig rc;

  // --- problem ---
  if (!doc.contains("problem") || !doc["problem"].is_object())
    fail("problem", "missing or not an object");
  const json& p = doc["problem"];
  check_keys(p, "problem", {"dim", "domain", "drift", "diffusion", "f", "phi"});
  const double dim_raw = get_number(p, "problem", "dim");
  rc.dim = static_cast<int>(dim_raw);
  if (rc.dim < 1 || dim_raw != rc.dim) fail("problem.dim", "must be a positive integer");
  if (!p.contains("domain")) fail("problem", "missing key 'domain'");
  rc.domain = parse_domain(p["domain"], rc.dim);
  if (!p.contains("drift")) fail("problem", "missing key 'drift'");
  if (!p.contains("diffusion")) fail("problem", "missing key 'diffusion'");
  rc.sde = SdeSpec::from_expressions(rc.dim, parse_drift(p["drift"], rc.dim),
                                     parse_diffusion(p["diffusion"], rc.dim));
  rc.sde.validate_finite_on(rc.domain.bounding_box());
  if (!p.contains("f")) fail("problem", "missing key 'f'");
  rc.f = DataFunction::from_expression(
      parse_expr(expr_text(p["f"], "problem.f"), rc.dim), rc.dim);
  if (rc.f.entirety_warning())
    rc.warnings.push_back("f divides by a z-dependent subexpression; entirety in z is "
                          "not guaranteed");
  if (p.contains("phi")) {
    rc.phi = parse_real_expr(expr_text(p["phi"], "problem.phi"), rc.dim);
    rc.f = augment_velocity(rc.f, *rc.phi, &rc.domain, &rc.warnings);
  }

  // --- estimator ---
  const json est = doc.value("estimator", json::object());
  check_keys(est, "estimator",
             {"n_samples", "h", "seed", "antithetic", "rao_blackwell", "max_steps",
              "bridge_correction", "threads"});
  rc.estimator.n_samples = est.value("n_samples", std::int64_t{10000});
  rc.estimator.step.h = est.value("h", 1e-3);
  rc.estimator.seed = est.value("seed", std::uint64_t{0});
  rc.estimator.antithetic = est.value("antithetic", false);
  rc.estimator.rao_blackwell = parse_rb(est.value("rao_blackwell", "off"));
  rc.estimator.step.max_steps = est.value("max_steps", std::int64_t{0});
  rc.estimator.step.bridge_correction = est.value("bridge_correction", true);
  rc.estimator.threads = est.value("threads", 0u);
  if (rc.estimator.n_samples < 2) fail("estimator.n_samples", "must be >= 2");
  if (rc.estimator.antithetic && rc.estimator.n_samples % 2 != 0)
    fail("estimator.n_samples", "must be even with antithetic=true");
  validate_step_config(rc.estimator.step);

  // --- output ---
  const json out = doc.value("output", json::object());
  check_keys(out, "output", {"t_grid", "x_grid", "format", "path"});
  rc.t_grid = out.value("t_grid", std::vector<double>{0.5});
  if (rc.t_grid.empty()) fail("output.t_grid", "must be non-empty");
  for (double t : rc.t_grid)
    if (!(t >= 0.0)) fail("output.t_grid", "entries must be >= 0");

  if (out.contains("x_grid")) {
    const json& xg = out["x_grid"];
    if (!xg.is_array() || xg.empty()) fail("output.x_grid", "must be a non-empty array");
    for (const auto& e : xg) {
      std::vector<double> point;
      if (e.is_array())
        point = e.get<std::vector<double>>();
      else if (e.is_number() && rc.dim == 1)
        point = {e.get<double>()};
      else
        fail("output.x_grid", "entries must be points (arrays of dim numbers)");
      if (static_cast<int>(point.size()) != rc.dim)
        fail("output.x_grid", "point dimension mismatch");
      if (!rc.domain.in_closure(point))
        fail("output.x_grid", "point outside the closure of the domain");
      rc.x_grid.push_back(std::move(point));
    }
  } else {
    rc.x_grid.push_back(rc.domain.center());
  }
  const std::string fmt = out.value("format", "csv");
  if (fmt == "csv")
    rc.format = OutputFormat::csv;
  else if (fmt == "json")
    rc.format = OutputFormat::json;
  else
    fail("output.format", "expected csv or json");
  rc.output_path = out.value("path", "");

  // --- mode / reference ---
  rc.mode = parse_mode(doc.value("mode", "solve"));
  const json ref = doc.value("reference", json::object());
  check_keys(ref, "reference", {"nx", "dt", "T", "t0", "t1"});
  rc.ref_nx = static_cast<int>(ref.value("nx", 81));
  rc.ref_dt = ref.value("dt", 0.0);
  rc.ref_t = ref.value("T", 1.0);
  rc.ref_t0 = ref.value("t0", 0.25);
  rc.ref_t1 = ref.value("t1", 0.75);
  if (rc.ref_nx < 3) fail("reference.nx", "must be >= 3");
  if (!(rc.ref_t0 > 0.0) || !(rc.ref_t1 > rc.ref_t0))
    fail("reference", "requires 0 < t0 < t1");

  // --- normalized echo ---
  json echo;
  echo["problem"]["dim"] = rc.dim;
  echo["problem"]["domain"] = p["domain"];
  echo["problem"]["drift"] = p["drift"];
  echo["problem"]["diffusion"] = p["diffusion"];
  echo["problem"]["f"] = p["f"];
  if (p.contains("phi")) echo["problem"]["phi"] = p["phi"];
  echo["estimator"]["n_samples"] = rc.estimator.n_samples;
  echo["estimator"]["h"] = rc.estimator.step.h;
  echo["estimator"]["seed"] = rc.estimator.seed;
  echo["estimator"]["antithetic"] = rc.estimator.antithetic;
  echo["estimator"]["rao_blackwell"] = to_string(rc.estimator.rao_blackwell);
  // threads and the output path are execution details: they never change
  // the numbers, so they stay out of the echo and out of byte comparisons.
  echo["estimator"]["max_steps"] = rc.estimator.step.max_steps;
  echo["estimator"]["bridge_correction"] = rc.estimator.step.bridge_correction;
  echo["output"]["t_grid"] = rc.t_grid;
  echo["output"]["x_grid"] = rc.x_grid;
  echo["output"]["format"] = to_string(rc.format);
  echo["mode"] = to_string(rc.mode);
  if (rc.mode == RunMode::reference || rc.mode == RunMode::compare) {
    echo["reference"]["nx"] = rc.ref_nx;
    echo["reference"]["dt"] = rc.ref_dt;
    echo["reference"]["T"] = rc.ref_t;
    echo["reference"]["t0"] = rc.ref_t0;
    echo["reference"]["t1"] = rc.ref_t1;
  }
  rc.echo = std::move(echo);
  return rc;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_run_config(doc);
}

}  // namespace wavemc
