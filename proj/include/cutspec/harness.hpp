#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cutspec/assembly.hpp"
#include "cutspec/mesh_geometry.hpp"
#include "cutspec/norms_errors.hpp"

namespace cutspec {

enum class ProblemKind { CircleSource, FlowerSource, CircleEigen, PlainPoisson };

const char* to_string(ProblemKind kind);
std::optional<ProblemKind> parse_problem_kind(std::string_view name);

struct ProblemParams {
  std::optional<double> alpha_pos;
  std::optional<double> alpha_neg;
  /// Translation of the interface (and the exact solution) along (1, 1).
  double interface_shift = 0.0;
};

/// A fully populated test problem: geometry, coefficients, data and either
/// an exact solution or a reference spectrum.
struct ProblemDefinition {
  ProblemKind kind = ProblemKind::CircleSource;
  std::string name;
  std::string description;
  Rect domain;
  LevelSet level_set = LevelSet::constant(-1.0);
  Coefficients alpha;
  bool eigen = false;
  SidedField source;                        // f = -div(alpha grad u) per side
  std::optional<ExactSolution> exact;       // source problems
  std::vector<double> reference_eigenvalues;  // eigen problems
};

/// Pinned first eigenvalues of CircleEigen (alpha_- = 1, alpha_+ = 1000),
/// from a stabilized run at N = 96, p = 4. See configs/circle_eigen_oracle.conf.
const std::vector<double>& circle_eigen_reference();

std::vector<ProblemKind> registry_problems();
ProblemDefinition registry_problem(ProblemKind kind, const ProblemParams& params = {});
/// Throws UnknownProblem.
ProblemDefinition registry_problem(std::string_view name, const ProblemParams& params = {});

enum class SweepKind { H, P };

struct StudyConfig {
  ProblemKind problem = ProblemKind::CircleSource;
  std::optional<Rect> domain;
  SweepKind sweep = SweepKind::H;
  std::vector<int> n_values{8, 16, 32, 64};
  std::vector<int> p_values{3};
  std::optional<double> alpha_pos;
  std::optional<double> alpha_neg;
  std::optional<double> gamma_a;
  std::optional<double> gamma_m;
  bool stabilization = true;
  int q = 0;
  int eigen_count = 3;
  std::string output;
  std::uint64_t seed = 0x5EED;
  double interface_shift = 0.0;
  bool condition = true;
};

/// Parses the `key = value` format; throws ConfigError with the line number.
StudyConfig parse_config(std::string_view text);
StudyConfig load_config(const std::string& path);
/// Applies one key; throws ConfigError.
void set_config_value(StudyConfig& config, std::string_view key, std::string_view value);
/// Checks invariants (nonempty strictly increasing sweeps, alpha > 0, ...).
void validate_config(const StudyConfig& config);

/// Stabilization constants actually used for a configuration.
struct GhostConstants {
  double gamma_a = 0.0;
  double gamma_m = 0.0;
};
GhostConstants effective_ghost_constants(const StudyConfig& config);

struct ConvergenceRecord {
  std::string problem;
  int n = 0;
  double h = 0.0;
  int p = 0;
  int dofs = 0;
  bool stabilized = true;
  double l2_error = 0.0;
  double h1_error = 0.0;
  std::vector<double> eigenvalues;
  std::vector<double> eig_errors;
  double cond_a = 0.0;
  double cond_m = 0.0;
  double runtime = 0.0;
};

/// Least-squares slope of log(y) against log(x) over the last `last` points.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y, int last = 3);

struct DecayDiagnostic {
  bool monotone_decreasing = false;
  bool convex = false;       // all second differences of log10(error) >= 0
  bool log_linear = false;   // all second differences ~ 0
  std::vector<double> curvature;  // second differences of log10(error) in p
};
DecayDiagnostic decay_diagnostic(const std::vector<double>& errors);

struct GeometryEntry {
  int n = 0;
  int p = 0;
  int cut_elements = 0;
  bool ok = true;
  std::vector<int> violations;
};
std::vector<GeometryEntry> check_geometry(const StudyConfig& config);

struct StudyResult {
  StudyConfig config;
  bool eigen = false;
  std::vector<ConvergenceRecord> records;  // sorted by (N, p)
  std::vector<std::string> warnings;
  // Fitted slopes against h (h-sweep); NaN when not applicable.
  double slope_l2 = 0.0;
  double slope_h1 = 0.0;
  double slope_cond_a = 0.0;
  double slope_cond_m = 0.0;
  std::vector<double> slope_eig;
  std::optional<DecayDiagnostic> decay;  // p-sweep
};

/// One sweep point. Throws AssumptionViolated, GraphConditionViolated or
/// solver errors.
ConvergenceRecord run_point(const StudyConfig& config, const ProblemDefinition& problem, int n,
                            int p);

/// Runs every sweep point (concurrently up to CUTSPEC_THREADS jobs). With
/// override_assumption, points failing the interface assumption are
/// skipped with a warning; otherwise AssumptionViolated is thrown.
StudyResult run_h_sweep(const StudyConfig& config, bool override_assumption = false);
StudyResult run_p_sweep(const StudyConfig& config, bool override_assumption = false);
StudyResult run_study(const StudyConfig& config, bool override_assumption = false);

/// Exact header line of the CSV files.
inline constexpr std::string_view kCsvHeader =
    "problem,N,h,p,dofs,stabilized,l2,h1,eig1,eig2,eig3,condA,condM,runtime";

std::string format_csv(const std::vector<ConvergenceRecord>& records);
void emit_csv(const std::vector<ConvergenceRecord>& records, const std::string& path);
std::vector<ConvergenceRecord> parse_csv(std::string_view text);
std::vector<ConvergenceRecord> read_csv(const std::string& path);

/// Human-readable table plus fitted slopes.
std::string format_table(const StudyResult& result);

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_double(double v);

}  // namespace cutspec
