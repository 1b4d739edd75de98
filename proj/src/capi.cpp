#include "cutspec/cutspec.h"

#include <cmath>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "cutspec/error.hpp"
#include "cutspec/harness.hpp"

struct cutspec_config {
  cutspec::StudyConfig config;
};

struct cutspec_geometry_report {
  std::vector<cutspec::GeometryEntry> entries;
};

struct cutspec_study {
  cutspec::StudyResult result;
  std::string table;
  std::string csv;
};

namespace {

thread_local std::string last_error;

cutspec_status from_code(cutspec::ErrorCode code) {
  using cutspec::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return CUTSPEC_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidDomain: return CUTSPEC_ERR_INVALID_DOMAIN;
    case ErrorCode::NonConvergence: return CUTSPEC_ERR_NON_CONVERGENCE;
    case ErrorCode::NoSignChange: return CUTSPEC_ERR_NO_SIGN_CHANGE;
    case ErrorCode::GraphConditionViolated: return CUTSPEC_ERR_GRAPH_CONDITION;
    case ErrorCode::AssumptionViolated: return CUTSPEC_ERR_ASSUMPTION_VIOLATED;
    case ErrorCode::DegenerateElement: return CUTSPEC_ERR_DEGENERATE_ELEMENT;
    case ErrorCode::DimensionMismatch: return CUTSPEC_ERR_DIMENSION_MISMATCH;
    case ErrorCode::SingularMatrix: return CUTSPEC_ERR_SINGULAR_MATRIX;
    case ErrorCode::FactorizationFailed: return CUTSPEC_ERR_FACTORIZATION_FAILED;
    case ErrorCode::NotConverged: return CUTSPEC_ERR_NOT_CONVERGED;
    case ErrorCode::LengthMismatch: return CUTSPEC_ERR_LENGTH_MISMATCH;
    case ErrorCode::UnknownProblem: return CUTSPEC_ERR_UNKNOWN_PROBLEM;
    case ErrorCode::IoError: return CUTSPEC_ERR_IO;
    case ErrorCode::ConfigError: return CUTSPEC_ERR_CONFIG;
  }
  return CUTSPEC_ERR_INTERNAL;
}

cutspec_status set_error(cutspec_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs body and converts any exception into a status plus message.
template <class F>
cutspec_status guarded(F&& body) {
  try {
    body();
    return CUTSPEC_OK;
  } catch (const cutspec::Error& e) {
    return set_error(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CUTSPEC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CUTSPEC_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(CUTSPEC_ERR_INTERNAL, "unknown exception");
  }
}

cutspec_status null_argument(const char* what) {
  return set_error(CUTSPEC_ERR_NULL_ARGUMENT, std::string("null argument: ") + what);
}

struct ProblemInfo {
  std::string name;
  std::string description;
  bool eigen;
};

const std::vector<ProblemInfo>& problem_table() {
  static const std::vector<ProblemInfo> table = [] {
    std::vector<ProblemInfo> t;
    for (const auto kind : cutspec::registry_problems()) {
      const auto d = cutspec::registry_problem(kind);
      t.push_back({d.name, d.description, d.eigen});
    }
    return t;
  }();
  return table;
}

}  // namespace

extern "C" {

const char* cutspec_version(void) { return "1.0.0"; }

const char* cutspec_last_error(void) { return last_error.c_str(); }

const char* cutspec_status_name(cutspec_status status) {
  switch (status) {
    case CUTSPEC_OK: return "Ok";
    case CUTSPEC_ERR_NULL_ARGUMENT: return "NullArgument";
    case CUTSPEC_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case CUTSPEC_ERR_INVALID_DOMAIN: return "InvalidDomain";
    case CUTSPEC_ERR_NON_CONVERGENCE: return "NonConvergence";
    case CUTSPEC_ERR_NO_SIGN_CHANGE: return "NoSignChange";
    case CUTSPEC_ERR_GRAPH_CONDITION: return "GraphConditionViolated";
    case CUTSPEC_ERR_ASSUMPTION_VIOLATED: return "AssumptionViolated";
    case CUTSPEC_ERR_DEGENERATE_ELEMENT: return "DegenerateElement";
    case CUTSPEC_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case CUTSPEC_ERR_SINGULAR_MATRIX: return "SingularMatrix";
    case CUTSPEC_ERR_FACTORIZATION_FAILED: return "FactorizationFailed";
    case CUTSPEC_ERR_NOT_CONVERGED: return "NotConverged";
    case CUTSPEC_ERR_LENGTH_MISMATCH: return "LengthMismatch";
    case CUTSPEC_ERR_UNKNOWN_PROBLEM: return "UnknownProblem";
    case CUTSPEC_ERR_IO: return "IoError";
    case CUTSPEC_ERR_CONFIG: return "ConfigError";
    case CUTSPEC_ERR_OUT_OF_RANGE: return "OutOfRange";
    case CUTSPEC_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

cutspec_status_class cutspec_classify_status(cutspec_status status) {
  switch (status) {
    case CUTSPEC_OK: return CUTSPEC_CLASS_OK;
    case CUTSPEC_ERR_INVALID_DOMAIN:
    case CUTSPEC_ERR_NO_SIGN_CHANGE:
    case CUTSPEC_ERR_GRAPH_CONDITION:
    case CUTSPEC_ERR_ASSUMPTION_VIOLATED:
    case CUTSPEC_ERR_DEGENERATE_ELEMENT:
      return CUTSPEC_CLASS_GEOMETRY;
    case CUTSPEC_ERR_NON_CONVERGENCE:
    case CUTSPEC_ERR_SINGULAR_MATRIX:
    case CUTSPEC_ERR_FACTORIZATION_FAILED:
    case CUTSPEC_ERR_NOT_CONVERGED:
    case CUTSPEC_ERR_DIMENSION_MISMATCH:
    case CUTSPEC_ERR_INTERNAL:
      return CUTSPEC_CLASS_SOLVER;
    default:
      return CUTSPEC_CLASS_USAGE;
  }
}

size_t cutspec_problem_count(void) { return problem_table().size(); }

const char* cutspec_problem_name(size_t index) {
  const auto& t = problem_table();
  return index < t.size() ? t[index].name.c_str() : nullptr;
}

const char* cutspec_problem_description(size_t index) {
  const auto& t = problem_table();
  return index < t.size() ? t[index].description.c_str() : nullptr;
}

int cutspec_problem_is_eigen(size_t index) {
  const auto& t = problem_table();
  return index < t.size() && t[index].eigen ? 1 : 0;
}

cutspec_status cutspec_config_default(cutspec_config** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new cutspec_config{}; });
}

cutspec_status cutspec_config_load(const char* path, cutspec_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new cutspec_config{cutspec::load_config(path)}; });
}

cutspec_status cutspec_config_parse(const char* text, cutspec_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new cutspec_config{cutspec::parse_config(text)}; });
}

cutspec_status cutspec_config_set(cutspec_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key) return null_argument("key");
  if (!value) return null_argument("value");
  return guarded([&] { cutspec::set_config_value(config->config, key, value); });
}

const char* cutspec_config_output(const cutspec_config* config) {
  return config ? config->config.output.c_str() : "";
}

void cutspec_config_free(cutspec_config* config) { delete config; }

cutspec_status cutspec_check_geometry(const cutspec_config* config,
                                      cutspec_geometry_report** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded(
      [&] { *out = new cutspec_geometry_report{cutspec::check_geometry(config->config)}; });
}

int cutspec_geometry_ok(const cutspec_geometry_report* report) {
  if (!report) return 0;
  for (const auto& e : report->entries)
    if (!e.ok) return 0;
  return 1;
}

size_t cutspec_geometry_entry_count(const cutspec_geometry_report* report) {
  return report ? report->entries.size() : 0;
}

cutspec_status cutspec_geometry_entry_get(const cutspec_geometry_report* report, size_t index,
                                          cutspec_geometry_entry* out) {
  if (!report) return null_argument("report");
  if (!out) return null_argument("out");
  if (index >= report->entries.size())
    return set_error(CUTSPEC_ERR_OUT_OF_RANGE, "geometry entry index out of range");
  const auto& e = report->entries[index];
  *out = {e.n, e.p, e.cut_elements, e.ok ? 1 : 0, e.violations.size(),
          e.violations.empty() ? nullptr : e.violations.data()};
  return CUTSPEC_OK;
}

void cutspec_geometry_free(cutspec_geometry_report* report) { delete report; }

cutspec_status cutspec_study_run(const cutspec_config* config, int override_assumption,
                                 cutspec_study** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto* s = new cutspec_study{cutspec::run_study(config->config, override_assumption != 0), {}, {}};
    s->table = cutspec::format_table(s->result);
    if (!s->result.records.empty()) s->csv = cutspec::format_csv(s->result.records);
    *out = s;
  });
}

int cutspec_study_is_eigen(const cutspec_study* study) {
  return study && study->result.eigen ? 1 : 0;
}

size_t cutspec_study_record_count(const cutspec_study* study) {
  return study ? study->result.records.size() : 0;
}

cutspec_status cutspec_study_record_get(const cutspec_study* study, size_t index,
                                        cutspec_record* out) {
  if (!study) return null_argument("study");
  if (!out) return null_argument("out");
  const auto& records = study->result.records;
  if (index >= records.size())
    return set_error(CUTSPEC_ERR_OUT_OF_RANGE, "record index out of range");
  const auto& r = records[index];
  out->problem = r.problem.c_str();
  out->n = r.n;
  out->h = r.h;
  out->p = r.p;
  out->dofs = r.dofs;
  out->stabilized = r.stabilized ? 1 : 0;
  out->l2_error = r.l2_error;
  out->h1_error = r.h1_error;
  out->eigen_count = r.eigenvalues.size();
  out->eigenvalues = r.eigenvalues.empty() ? nullptr : r.eigenvalues.data();
  out->eig_error_count = r.eig_errors.size();
  out->eig_errors = r.eig_errors.empty() ? nullptr : r.eig_errors.data();
  out->cond_a = r.cond_a;
  out->cond_m = r.cond_m;
  out->runtime = r.runtime;
  return CUTSPEC_OK;
}

cutspec_status cutspec_study_slopes(const cutspec_study* study, cutspec_slopes* out) {
  if (!study) return null_argument("study");
  if (!out) return null_argument("out");
  const auto& r = study->result;
  *out = {r.slope_l2, r.slope_h1, r.slope_cond_a, r.slope_cond_m, r.slope_eig.size(),
          r.slope_eig.empty() ? nullptr : r.slope_eig.data()};
  return CUTSPEC_OK;
}

cutspec_status cutspec_study_decay(const cutspec_study* study, cutspec_decay* out) {
  if (!study) return null_argument("study");
  if (!out) return null_argument("out");
  const auto& d = study->result.decay;
  *out = {d ? 1 : 0, d && d->monotone_decreasing ? 1 : 0, d && d->convex ? 1 : 0,
          d && d->log_linear ? 1 : 0};
  return CUTSPEC_OK;
}

size_t cutspec_study_warning_count(const cutspec_study* study) {
  return study ? study->result.warnings.size() : 0;
}

const char* cutspec_study_warning(const cutspec_study* study, size_t index) {
  if (!study || index >= study->result.warnings.size()) return nullptr;
  return study->result.warnings[index].c_str();
}

const char* cutspec_study_table(const cutspec_study* study) {
  return study ? study->table.c_str() : "";
}

const char* cutspec_study_csv(const cutspec_study* study) {
  return study ? study->csv.c_str() : "";
}

cutspec_status cutspec_study_write_csv(const cutspec_study* study, const char* path) {
  if (!study) return null_argument("study");
  if (!path) return null_argument("path");
  return guarded([&] { cutspec::emit_csv(study->result.records, path); });
}

void cutspec_study_free(cutspec_study* study) { delete study; }

}  // extern "C"
