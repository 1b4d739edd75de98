#include "cutspec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "cutspec/error.hpp"
#include "cutspec/solvers.hpp"

namespace cutspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(ErrorCode::ConfigError, "invalid number for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

long long parse_integer(std::string_view s, std::string_view what) {
  s = trim(s);
  long long v = 0;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(ErrorCode::ConfigError, "invalid integer for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

bool parse_bool(std::string_view s, std::string_view what) {
  s = trim(s);
  if (s == "true" || s == "on" || s == "1") return true;
  if (s == "false" || s == "off" || s == "0") return false;
  fail(ErrorCode::ConfigError, "invalid boolean for " + std::string(what) + ": '" + std::string(s) + "'");
}

std::vector<int> parse_int_list(std::string_view s, std::string_view what) {
  std::vector<int> out;
  for (const auto part : split(s, ',')) out.push_back(static_cast<int>(parse_integer(part, what)));
  return out;
}

// Circle interface solution u = r^3 / alpha_- inside and
// r^3 / alpha_+ + (1/alpha_- - 1/alpha_+) r0^3 outside, continuous across r = r0.
ProblemDefinition circle_source(const ProblemParams& params) {
  ProblemDefinition d;
  d.kind = ProblemKind::CircleSource;
  const double ap = params.alpha_pos.value_or(1000.0), an = params.alpha_neg.value_or(1.0);
  const double r0 = 0.5;
  const Point2 c{params.interface_shift, params.interface_shift};
  d.domain = {-1.0, 1.0, -1.0, 1.0};
  d.level_set = LevelSet::circle(c, r0);
  d.alpha = {ap, an};
  const double offset = (1.0 / an - 1.0 / ap) * r0 * r0 * r0;
  ExactSolution ex;
  ex.value = [=](Point2 x, Side s) {
    const double r = std::hypot(x.x - c.x, x.y - c.y);
    return s == Side::Neg ? r * r * r / an : r * r * r / ap + offset;
  };
  ex.gradient = [=](Point2 x, Side s) {
    const double dx = x.x - c.x, dy = x.y - c.y;
    const double r = std::hypot(dx, dy);
    const double a = s == Side::Neg ? an : ap;
    return Vec2{3.0 * r * dx / a, 3.0 * r * dy / a};
  };
  d.exact = ex;
  d.source = [=](Point2 x, Side) { return -9.0 * std::hypot(x.x - c.x, x.y - c.y); };
  return d;
}

// Flower interface r = 1/2 + sin(5 theta)/7 with u_- = exp(r^2) and
// u_+ = 0.1 r^4 - 0.01 ln(2 r); the jumps are nonzero.
ProblemDefinition flower_source(const ProblemParams& params) {
  ProblemDefinition d;
  d.kind = ProblemKind::FlowerSource;
  const double ap = params.alpha_pos.value_or(10.0), an = params.alpha_neg.value_or(1.0);
  const Point2 c{params.interface_shift, params.interface_shift};
  d.domain = {-1.0, 1.0, -1.0, 1.0};
  d.level_set = LevelSet::flower(c, 0.5, 1.0 / 7.0, 5);
  d.alpha = {ap, an};
  ExactSolution ex;
  ex.value = [=](Point2 x, Side s) {
    const double r2 = (x.x - c.x) * (x.x - c.x) + (x.y - c.y) * (x.y - c.y);
    return s == Side::Neg ? std::exp(r2) : 0.1 * r2 * r2 - 0.01 * std::log(2.0 * std::sqrt(r2));
  };
  ex.gradient = [=](Point2 x, Side s) {
    const double dx = x.x - c.x, dy = x.y - c.y;
    const double r2 = dx * dx + dy * dy;
    if (s == Side::Neg) {
      const double e = 2.0 * std::exp(r2);
      return Vec2{e * dx, e * dy};
    }
    const double g = 0.4 * r2 - 0.01 / r2;
    return Vec2{g * dx, g * dy};
  };
  const LevelSet phi = d.level_set;
  JumpData jumps;
  jumps.dirichlet_jump = [ex](Point2 x) { return ex.value(x, Side::Pos) - ex.value(x, Side::Neg); };
  jumps.flux_jump = [ex, phi, ap, an](Point2 x) {
    const Vec2 g = phi.gradient(x);
    const double gn = g.norm();
    const Vec2 n{g.x / gn, g.y / gn};
    return ap * dot(ex.gradient(x, Side::Pos), n) - an * dot(ex.gradient(x, Side::Neg), n);
  };
  ex.jumps = jumps;
  d.exact = ex;
  d.source = [=](Point2 x, Side s) {
    const double r2 = (x.x - c.x) * (x.x - c.x) + (x.y - c.y) * (x.y - c.y);
    if (s == Side::Neg) return -an * (4.0 + 4.0 * r2) * std::exp(r2);
    return -ap * 1.6 * r2;
  };
  return d;
}

ProblemDefinition circle_eigen(const ProblemParams& params) {
  ProblemDefinition d;
  d.kind = ProblemKind::CircleEigen;
  const double pi = std::numbers::pi;
  const double ap = params.alpha_pos.value_or(1000.0), an = params.alpha_neg.value_or(1.0);
  d.domain = {0.0, pi, 0.0, pi};
  d.level_set = LevelSet::circle({pi / 2 + params.interface_shift, pi / 2 + params.interface_shift},
                                 pi / 4);
  d.alpha = {ap, an};
  d.eigen = true;
  d.source = [](Point2, Side) { return 0.0; };
  if (ap == 1000.0 && an == 1.0 && params.interface_shift == 0.0)
    d.reference_eigenvalues = circle_eigen_reference();
  return d;
}

ProblemDefinition plain_poisson(const ProblemParams& params) {
  ProblemDefinition d;
  d.kind = ProblemKind::PlainPoisson;
  const double pi = std::numbers::pi;
  const double a = params.alpha_neg.value_or(1.0);
  d.domain = {0.0, pi, 0.0, pi};
  d.level_set = LevelSet::constant(-1.0);
  d.alpha = {params.alpha_pos.value_or(a), a};
  ExactSolution ex;
  ex.value = [](Point2 x, Side) { return std::sin(x.x) * std::sin(x.y); };
  ex.gradient = [](Point2 x, Side) {
    return Vec2{std::cos(x.x) * std::sin(x.y), std::sin(x.x) * std::cos(x.y)};
  };
  d.exact = ex;
  d.source = [a](Point2 x, Side) { return 2.0 * a * std::sin(x.x) * std::sin(x.y); };
  return d;
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::CircleSource: return "CircleSource";
    case ProblemKind::FlowerSource: return "FlowerSource";
    case ProblemKind::CircleEigen: return "CircleEigen";
    case ProblemKind::PlainPoisson: return "PlainPoisson";
  }
  return "?";
}

std::optional<ProblemKind> parse_problem_kind(std::string_view name) {
  for (const ProblemKind k : registry_problems())
    if (name == to_string(k)) return k;
  return std::nullopt;
}

std::vector<ProblemKind> registry_problems() {
  return {ProblemKind::CircleSource, ProblemKind::FlowerSource, ProblemKind::CircleEigen,
          ProblemKind::PlainPoisson};
}

ProblemDefinition registry_problem(ProblemKind kind, const ProblemParams& params) {
  if ((params.alpha_pos && !(*params.alpha_pos > 0.0)) ||
      (params.alpha_neg && !(*params.alpha_neg > 0.0)))
    fail(ErrorCode::InvalidArgument, "diffusion coefficients must be positive");
  ProblemDefinition d;
  switch (kind) {
    case ProblemKind::CircleSource:
      d = circle_source(params);
      d.description = "circle r0=0.5 in (-1,1)^2, u = r^3/alpha inside, continuous outside";
      break;
    case ProblemKind::FlowerSource:
      d = flower_source(params);
      d.description = "flower r = 1/2 + sin(5 theta)/7 in (-1,1)^2, nonhomogeneous jumps";
      break;
    case ProblemKind::CircleEigen:
      d = circle_eigen(params);
      d.description = "eigenproblem, circle at (pi/2,pi/2) radius pi/4 in (0,pi)^2";
      break;
    case ProblemKind::PlainPoisson:
      d = plain_poisson(params);
      d.description = "no interface, u = sin x sin y on (0,pi)^2";
      break;
  }
  d.name = to_string(kind);
  return d;
}

ProblemDefinition registry_problem(std::string_view name, const ProblemParams& params) {
  const auto kind = parse_problem_kind(name);
  if (!kind) fail(ErrorCode::UnknownProblem, "unknown problem '" + std::string(name) + "'");
  return registry_problem(*kind, params);
}

// ---------------------------------------------------------------------------
// Configuration

void set_config_value(StudyConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "problem") {
    const auto kind = parse_problem_kind(value);
    if (!kind) fail(ErrorCode::UnknownProblem, "unknown problem '" + std::string(value) + "'");
    c.problem = *kind;
  } else if (key == "sweep") {
    if (value == "h") c.sweep = SweepKind::H;
    else if (value == "p") c.sweep = SweepKind::P;
    else fail(ErrorCode::ConfigError, "sweep must be 'h' or 'p'");
  } else if (key == "N") {
    c.n_values = parse_int_list(value, key);
  } else if (key == "p") {
    c.p_values = parse_int_list(value, key);
  } else if (key == "domain") {
    const auto parts = split(value, ',');
    if (parts.size() != 4) fail(ErrorCode::ConfigError, "domain needs x0,x1,y0,y1");
    c.domain = Rect{parse_double(parts[0], key), parse_double(parts[1], key),
                    parse_double(parts[2], key), parse_double(parts[3], key)};
  } else if (key == "alpha_plus") {
    c.alpha_pos = parse_double(value, key);
  } else if (key == "alpha_minus") {
    c.alpha_neg = parse_double(value, key);
  } else if (key == "gamma_A") {
    c.gamma_a = parse_double(value, key);
  } else if (key == "gamma_M") {
    c.gamma_m = parse_double(value, key);
  } else if (key == "stabilization") {
    c.stabilization = parse_bool(value, key);
  } else if (key == "q") {
    c.q = static_cast<int>(parse_integer(value, key));
  } else if (key == "eigen_count") {
    c.eigen_count = static_cast<int>(parse_integer(value, key));
  } else if (key == "output") {
    c.output = std::string(value);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_integer(value, key));
  } else if (key == "interface_shift") {
    c.interface_shift = parse_double(value, key);
  } else if (key == "condition") {
    c.condition = parse_bool(value, key);
  } else {
    fail(ErrorCode::ConfigError, "unknown key '" + std::string(key) + "'");
  }
}

void validate_config(const StudyConfig& c) {
  auto strictly_increasing = [](const std::vector<int>& v) {
    return !v.empty() && std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
  };
  if (!strictly_increasing(c.n_values))
    fail(ErrorCode::ConfigError, "N must be a nonempty strictly increasing list");
  if (!strictly_increasing(c.p_values))
    fail(ErrorCode::ConfigError, "p must be a nonempty strictly increasing list");
  if (c.sweep == SweepKind::P && c.n_values.size() != 1)
    fail(ErrorCode::ConfigError, "a p-sweep takes a single N");
  if (c.sweep == SweepKind::H && c.p_values.size() != 1)
    fail(ErrorCode::ConfigError, "an h-sweep takes a single p");
  if (c.n_values.front() < 2) fail(ErrorCode::ConfigError, "N must be at least 2");
  if (c.p_values.front() < 1 || c.p_values.back() > kMaxDegree)
    fail(ErrorCode::ConfigError, "p must lie in [1, " + std::to_string(kMaxDegree) + "]");
  if ((c.alpha_pos && !(*c.alpha_pos > 0.0)) || (c.alpha_neg && !(*c.alpha_neg > 0.0)))
    fail(ErrorCode::ConfigError, "alpha_plus and alpha_minus must be positive");
  if ((c.gamma_a && *c.gamma_a < 0.0) || (c.gamma_m && *c.gamma_m < 0.0))
    fail(ErrorCode::ConfigError, "gamma_A and gamma_M must be nonnegative");
  if (c.q < 0) fail(ErrorCode::ConfigError, "q must be nonnegative");
  if (c.q > 0 && c.q < c.p_values.back() + 3)
    fail(ErrorCode::ConfigError, "q must be at least p + 3");
  if (c.eigen_count < 1) fail(ErrorCode::ConfigError, "eigen_count must be positive");
  if (c.domain && (!(c.domain->x1 > c.domain->x0) || !(c.domain->y1 > c.domain->y0)))
    fail(ErrorCode::ConfigError, "domain must satisfy x1 > x0 and y1 > y0");
}

StudyConfig parse_config(std::string_view text) {
  StudyConfig c;
  int line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    try {
      set_config_value(c, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate_config(c);
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

GhostConstants effective_ghost_constants(const StudyConfig& c) {
  if (!c.stabilization) return {0.0, 0.0};
  GhostConstants g{1.0, 0.01};
  if (c.problem == ProblemKind::CircleEigen)
    g = c.sweep == SweepKind::H ? GhostConstants{4.1, 0.002} : GhostConstants{0.1, 0.05};
  if (c.gamma_a) g.gamma_a = *c.gamma_a;
  if (c.gamma_m) g.gamma_m = *c.gamma_m;
  return g;
}

// ---------------------------------------------------------------------------
// Analysis helpers

double fit_slope(const std::vector<double>& x, const std::vector<double>& y, int last) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "slope data lengths differ");
  const int n = static_cast<int>(x.size());
  const int m = std::min(n, last);
  if (m < 2) return kNaN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = n - m; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return kNaN;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) return kNaN;
  return (m * sxy - sx * sy) / denom;
}

DecayDiagnostic decay_diagnostic(const std::vector<double>& errors) {
  DecayDiagnostic d;
  d.monotone_decreasing = errors.size() >= 2;
  for (std::size_t i = 1; i < errors.size(); ++i)
    d.monotone_decreasing = d.monotone_decreasing && errors[i] < errors[i - 1];
  std::vector<double> logs;
  for (const double e : errors) logs.push_back(std::log10(e));
  for (std::size_t i = 2; i < logs.size(); ++i)
    d.curvature.push_back(logs[i] - 2.0 * logs[i - 1] + logs[i - 2]);
  const double tol = 1e-9;
  d.convex = !d.curvature.empty();
  d.log_linear = !d.curvature.empty();
  for (const double c : d.curvature) {
    if (!std::isfinite(c)) d.convex = d.log_linear = false;
    d.convex = d.convex && c >= -tol;
    d.log_linear = d.log_linear && std::abs(c) <= tol * 10.0;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

ProblemDefinition make_problem(const StudyConfig& c) {
  ProblemParams params;
  params.alpha_pos = c.alpha_pos;
  params.alpha_neg = c.alpha_neg;
  params.interface_shift = c.interface_shift;
  ProblemDefinition d = registry_problem(c.problem, params);
  if (c.domain) d.domain = *c.domain;
  return d;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int thread_count(int jobs) {
  int threads = 0;
  if (const char* env = std::getenv("CUTSPEC_THREADS")) threads = std::atoi(env);
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(threads, 1, std::max(jobs, 1));
}

}  // namespace

std::vector<GeometryEntry> check_geometry(const StudyConfig& config) {
  validate_config(config);
  const ProblemDefinition problem = make_problem(config);
  std::vector<GeometryEntry> out;
  for (const int n : config.n_values) {
    const CutMesh mesh = classify_elements(build_mesh(problem.domain, n), problem.level_set);
    const AssumptionReport report = check_interface_assumption(mesh, problem.level_set);
    for (const int p : config.sweep == SweepKind::P ? config.p_values : std::vector<int>{config.p_values.front()}) {
      GeometryEntry e;
      e.n = n;
      e.p = p;
      e.cut_elements = mesh.count(ElementClass::Cut);
      e.ok = report.ok;
      e.violations = report.violations;
      out.push_back(std::move(e));
    }
  }
  return out;
}

ConvergenceRecord run_point(const StudyConfig& config, const ProblemDefinition& problem, int n,
                            int p) {
  const auto t0 = std::chrono::steady_clock::now();
  CutMesh mesh = classify_elements(build_mesh(problem.domain, n), problem.level_set);
  const AssumptionReport report = check_interface_assumption(mesh, problem.level_set);
  if (!report.ok)
    fail(ErrorCode::AssumptionViolated,
         "N=" + std::to_string(n) + ": " + std::to_string(report.violations.size()) +
             " cut elements violate the interface assumption");
  const Discretization disc(std::move(mesh), problem.level_set, p, config.q);
  const GhostConstants ghost = effective_ghost_constants(config);

  ConvergenceRecord rec;
  rec.problem = problem.name;
  rec.n = n;
  rec.h = disc.h();
  rec.p = p;
  rec.dofs = disc.dofs().num_dofs();
  rec.stabilized = config.stabilization;
  rec.l2_error = rec.h1_error = kNaN;
  rec.cond_a = rec.cond_m = kNaN;

  const SparseSymMatrix stiffness = assemble_stiffness(disc, problem.alpha);
  const SparseSymMatrix g = assemble_ghost_penalty(disc);
  const SparseSymMatrix mass = problem.eigen ? assemble_mass(disc) : SparseSymMatrix(g.rows(), g.cols());
  const ExtendedForms forms =
      build_extended_forms(stiffness, g, mass, ghost.gamma_a, ghost.gamma_m, disc.h());

  if (problem.eigen) {
    const ReducedPair pair = reduce_pair(forms.stiffness, forms.mass, disc.dofs());
    EigenOptions opt;
    opt.seed = config.seed;
    const EigenResult eig = solve_smallest_eigs(pair.a, pair.m, config.eigen_count, opt);
    rec.eigenvalues = eig.eigenvalues;
    const std::size_t compared = std::min<std::size_t>(
        {eig.eigenvalues.size(), problem.reference_eigenvalues.size(), std::size_t{3}});
    if (compared > 0)
      rec.eig_errors = eigenvalue_errors(
          std::vector<double>(eig.eigenvalues.begin(), eig.eigenvalues.begin() + compared),
          std::vector<double>(problem.reference_eigenvalues.begin(),
                              problem.reference_eigenvalues.begin() + compared));
    if (config.condition) {
      rec.cond_a = condition_estimate(pair.a, config.seed);
      rec.cond_m = condition_estimate(pair.m, config.seed);
    }
  } else {
    const ExactSolution& exact = *problem.exact;
    const Vector load = assemble_load(disc, problem.alpha, problem.source, exact.jumps);
    const Vector boundary = interpolate(disc.dofs(), exact.value);
    const ReducedSystem sys = apply_dirichlet(forms.stiffness, load, disc.dofs(), &boundary);
    const SolveReport solve = solve_source(sys.matrix, sys.rhs);
    if (solve.refinement_stalled)
      fail(ErrorCode::SingularMatrix, "iterative refinement stalled at relative residual " +
                                          format_double(solve.residual));
    const DiscreteFunction uh(disc, sys.expand(solve.x));
    rec.l2_error = broken_l2_error(uh, exact);
    rec.h1_error = broken_h1_error(uh, exact);
    if (config.condition) rec.cond_a = condition_estimate(sys.matrix, config.seed);
  }
  rec.runtime = seconds_since(t0);
  return rec;
}

namespace {

StudyResult run_points(const StudyConfig& config, bool override_assumption) {
  validate_config(config);
  const ProblemDefinition problem = make_problem(config);
  std::vector<std::pair<int, int>> jobs;
  for (const int n : config.n_values)
    for (const int p : config.p_values) jobs.emplace_back(n, p);

  std::vector<std::optional<ConvergenceRecord>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::vector<std::string> skipped(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        results[j] = run_point(config, problem, jobs[j].first, jobs[j].second);
      } catch (const Error& e) {
        if (override_assumption && e.code() == ErrorCode::AssumptionViolated)
          skipped[j] = std::string("skipped N=") + std::to_string(jobs[j].first) + " p=" +
                       std::to_string(jobs[j].second) + ": " + e.what();
        else
          errors[j] = std::current_exception();
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const int threads = thread_count(static_cast<int>(jobs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  StudyResult out;
  out.config = config;
  out.eigen = problem.eigen;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (results[j]) out.records.push_back(std::move(*results[j]));
    if (!skipped[j].empty()) out.warnings.push_back(skipped[j]);
  }
  std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.n, a.p) < std::tie(b.n, b.p);
  });
  if (problem.eigen && problem.reference_eigenvalues.empty())
    out.warnings.push_back("no reference spectrum for this configuration; eigenvalue errors omitted");
  return out;
}

template <class F>
std::vector<double> column(const std::vector<ConvergenceRecord>& records, F f) {
  std::vector<double> v;
  for (const auto& r : records) v.push_back(f(r));
  return v;
}

}  // namespace

StudyResult run_h_sweep(const StudyConfig& config, bool override_assumption) {
  if (config.sweep != SweepKind::H) fail(ErrorCode::ConfigError, "configuration is not an h-sweep");
  StudyResult out = run_points(config, override_assumption);
  const auto h = column(out.records, [](const auto& r) { return r.h; });
  out.slope_l2 = fit_slope(h, column(out.records, [](const auto& r) { return r.l2_error; }));
  out.slope_h1 = fit_slope(h, column(out.records, [](const auto& r) { return r.h1_error; }));
  out.slope_cond_a = fit_slope(h, column(out.records, [](const auto& r) { return r.cond_a; }));
  out.slope_cond_m = fit_slope(h, column(out.records, [](const auto& r) { return r.cond_m; }));
  if (out.eigen) {
    const std::size_t k = out.records.empty() ? 0 : out.records.front().eig_errors.size();
    for (std::size_t i = 0; i < k; ++i)
      out.slope_eig.push_back(fit_slope(h, column(out.records, [i](const auto& r) {
        return i < r.eig_errors.size() ? r.eig_errors[i] : kNaN;
      })));
  }
  return out;
}

StudyResult run_p_sweep(const StudyConfig& config, bool override_assumption) {
  if (config.sweep != SweepKind::P) fail(ErrorCode::ConfigError, "configuration is not a p-sweep");
  StudyResult out = run_points(config, override_assumption);
  out.slope_l2 = out.slope_h1 = out.slope_cond_a = out.slope_cond_m = kNaN;
  out.decay = decay_diagnostic(column(out.records, [&](const auto& r) {
    if (!out.eigen) return r.l2_error;
    return r.eig_errors.empty() ? kNaN : r.eig_errors.front();
  }));
  return out;
}

StudyResult run_study(const StudyConfig& config, bool override_assumption) {
  return config.sweep == SweepKind::H ? run_h_sweep(config, override_assumption)
                                      : run_p_sweep(config, override_assumption);
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_csv(const std::vector<ConvergenceRecord>& records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    auto eig = [&r](std::size_t i) { return i < r.eig_errors.size() ? r.eig_errors[i] : kNaN; };
    out += r.problem + ',' + std::to_string(r.n) + ',' + format_double(r.h) + ',' +
           std::to_string(r.p) + ',' + std::to_string(r.dofs) + ',' +
           (r.stabilized ? "true" : "false") + ',' + format_double(r.l2_error) + ',' +
           format_double(r.h1_error) + ',' + format_double(eig(0)) + ',' + format_double(eig(1)) +
           ',' + format_double(eig(2)) + ',' + format_double(r.cond_a) + ',' +
           format_double(r.cond_m) + ',' + format_double(r.runtime) + '\n';
  }
  return out;
}

void emit_csv(const std::vector<ConvergenceRecord>& records, const std::string& path) {
  if (records.empty()) fail(ErrorCode::IoError, "no records to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << format_csv(records);
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::vector<ConvergenceRecord> parse_csv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kCsvHeader) fail(ErrorCode::IoError, "missing CSV header");
  auto number = [](std::string_view s) {
    if (s == "nan") return kNaN;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(ErrorCode::IoError, "bad CSV number '" + std::string(s) + "'");
    return v;
  };
  auto integer = [](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(ErrorCode::IoError, "bad CSV integer '" + std::string(s) + "'");
    return v;
  };
  std::vector<ConvergenceRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 14) fail(ErrorCode::IoError, "CSV row " + std::to_string(i) + " has wrong arity");
    ConvergenceRecord r;
    r.problem = std::string(f[0]);
    r.n = integer(f[1]);
    r.h = number(f[2]);
    r.p = integer(f[3]);
    r.dofs = integer(f[4]);
    if (f[5] != "true" && f[5] != "false") fail(ErrorCode::IoError, "bad stabilized flag");
    r.stabilized = f[5] == "true";
    r.l2_error = number(f[6]);
    r.h1_error = number(f[7]);
    for (int k = 8; k <= 10; ++k)
      if (f[k] != "nan") r.eig_errors.push_back(number(f[k]));
    r.cond_a = number(f[11]);
    r.cond_m = number(f[12]);
    r.runtime = number(f[13]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ConvergenceRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

// ---------------------------------------------------------------------------
// Table

std::string format_table(const StudyResult& result) {
  std::ostringstream os;
  const auto& records = result.records;
  const std::string name = records.empty() ? to_string(result.config.problem) : records.front().problem;
  const GhostConstants g = effective_ghost_constants(result.config);
  os << name << "  " << (result.config.sweep == SweepKind::H ? "h-sweep" : "p-sweep")
     << "  stabilization=" << (result.config.stabilization ? "on" : "off")
     << "  gamma_A=" << format_double(g.gamma_a) << "  gamma_M=" << format_double(g.gamma_m) << '\n';
  os << "condition numbers: 2-norm of the reduced (Dirichlet-eliminated) operators\n";
  os << std::setw(5) << "N" << std::setw(11) << "h" << std::setw(4) << "p" << std::setw(9) << "dofs";
  if (result.eigen) {
    os << std::setw(15) << "lambda1" << std::setw(15) << "lambda2" << std::setw(15) << "lambda3"
       << std::setw(11) << "err1" << std::setw(11) << "err2" << std::setw(11) << "err3";
  } else {
    os << std::setw(12) << "L2" << std::setw(12) << "H1";
  }
  os << std::setw(11) << "condA";
  if (result.eigen) os << std::setw(11) << "condM";
  os << std::setw(9) << "time[s]" << '\n';
  for (const auto& r : records) {
    os << std::setw(5) << r.n << std::setw(11) << std::setprecision(4) << r.h << std::setw(4) << r.p
       << std::setw(9) << r.dofs << std::scientific << std::setprecision(3);
    if (result.eigen) {
      for (int i = 0; i < 3; ++i) {
        if (i < static_cast<int>(r.eigenvalues.size()))
          os << std::setw(15) << std::setprecision(8) << r.eigenvalues[i] << std::setprecision(3);
        else
          os << std::setw(15) << "-";
      }
      for (int i = 0; i < 3; ++i) {
        if (i < static_cast<int>(r.eig_errors.size())) os << std::setw(11) << r.eig_errors[i];
        else os << std::setw(11) << "-";
      }
    } else {
      os << std::setw(12) << r.l2_error << std::setw(12) << r.h1_error;
    }
    os << std::setw(11) << r.cond_a;
    if (result.eigen) os << std::setw(11) << r.cond_m;
    os << std::defaultfloat << std::setw(9) << std::setprecision(3) << r.runtime << '\n';
  }
  if (result.eigen && !records.empty()) {
    os << "eigenvalues (last point):";
    for (const double v : records.back().eigenvalues) os << ' ' << format_double(v);
    os << '\n';
  }
  os << std::fixed << std::setprecision(3);
  if (result.config.sweep == SweepKind::H) {
    os << "slopes vs h (last 3 points):";
    if (result.eigen) {
      for (std::size_t i = 0; i < result.slope_eig.size(); ++i)
        os << " eig" << i + 1 << "=" << result.slope_eig[i];
      os << " condA=" << result.slope_cond_a << " condM=" << result.slope_cond_m;
    } else {
      os << " L2=" << result.slope_l2 << " H1=" << result.slope_h1 << " condA=" << result.slope_cond_a;
    }
    os << '\n';
  } else if (result.decay) {
    os << "spectral decay: monotone=" << (result.decay->monotone_decreasing ? "yes" : "no")
       << " convex=" << (result.decay->convex ? "yes" : "no")
       << " log-linear=" << (result.decay->log_linear ? "yes" : "no") << " curvature=";
    for (std::size_t i = 0; i < result.decay->curvature.size(); ++i)
      os << (i ? "," : "") << result.decay->curvature[i];
    os << '\n';
  }
  for (const auto& w : result.warnings) os << "warning: " << w << '\n';
  return os.str();
}

}  // namespace cutspec
