#ifndef CUTSPEC_CUTSPEC_H
#define CUTSPEC_CUTSPEC_H

/*
 * C interface of the cutspec library.
 *
 * All objects are opaque handles created by the library and released with
 * the matching *_free function. Every fallible call returns a cutspec_status;
 * on failure cutspec_last_error() describes the problem. The message is
 * thread-local and stays valid until the next failing call on that thread.
 * Strings returned by accessors are owned by the handle they came from.
 */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(CUTSPEC_BUILDING)
#    define CUTSPEC_API __declspec(dllexport)
#  else
#    define CUTSPEC_API __declspec(dllimport)
#  endif
#else
#  define CUTSPEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cutspec_status {
  CUTSPEC_OK = 0,
  CUTSPEC_ERR_NULL_ARGUMENT = 1,
  CUTSPEC_ERR_INVALID_ARGUMENT = 2,
  CUTSPEC_ERR_INVALID_DOMAIN = 3,
  CUTSPEC_ERR_NON_CONVERGENCE = 4,
  CUTSPEC_ERR_NO_SIGN_CHANGE = 5,
  CUTSPEC_ERR_GRAPH_CONDITION = 6,
  CUTSPEC_ERR_ASSUMPTION_VIOLATED = 7,
  CUTSPEC_ERR_DEGENERATE_ELEMENT = 8,
  CUTSPEC_ERR_DIMENSION_MISMATCH = 9,
  CUTSPEC_ERR_SINGULAR_MATRIX = 10,
  CUTSPEC_ERR_FACTORIZATION_FAILED = 11,
  CUTSPEC_ERR_NOT_CONVERGED = 12,
  CUTSPEC_ERR_LENGTH_MISMATCH = 13,
  CUTSPEC_ERR_UNKNOWN_PROBLEM = 14,
  CUTSPEC_ERR_IO = 15,
  CUTSPEC_ERR_CONFIG = 16,
  CUTSPEC_ERR_OUT_OF_RANGE = 17,
  CUTSPEC_ERR_INTERNAL = 99
} cutspec_status;

/* Coarse failure classes, used by the command-line tool for exit codes. */
typedef enum cutspec_status_class {
  CUTSPEC_CLASS_OK = 0,
  CUTSPEC_CLASS_USAGE = 1,    /* configuration, I/O, bad arguments */
  CUTSPEC_CLASS_GEOMETRY = 2, /* interface assumption, cut quadrature */
  CUTSPEC_CLASS_SOLVER = 3    /* factorization, eigensolver */
} cutspec_status_class;

typedef struct cutspec_config cutspec_config;
typedef struct cutspec_study cutspec_study;
typedef struct cutspec_geometry_report cutspec_geometry_report;

CUTSPEC_API const char* cutspec_version(void);
CUTSPEC_API const char* cutspec_last_error(void);
CUTSPEC_API const char* cutspec_status_name(cutspec_status status);
CUTSPEC_API cutspec_status_class cutspec_classify_status(cutspec_status status);

/* Built-in problem registry. Index range is [0, cutspec_problem_count()). */
CUTSPEC_API size_t cutspec_problem_count(void);
CUTSPEC_API const char* cutspec_problem_name(size_t index);
CUTSPEC_API const char* cutspec_problem_description(size_t index);
CUTSPEC_API int cutspec_problem_is_eigen(size_t index);

/* Study configuration in the flat `key = value` format. */
CUTSPEC_API cutspec_status cutspec_config_default(cutspec_config** out);
CUTSPEC_API cutspec_status cutspec_config_load(const char* path, cutspec_config** out);
CUTSPEC_API cutspec_status cutspec_config_parse(const char* text, cutspec_config** out);
CUTSPEC_API cutspec_status cutspec_config_set(cutspec_config* config, const char* key,
                                              const char* value);
/* Output CSV path, or "" when none is configured. */
CUTSPEC_API const char* cutspec_config_output(const cutspec_config* config);
CUTSPEC_API void cutspec_config_free(cutspec_config* config);

/* Interface-assumption report, one entry per (N, p) sweep point. */
CUTSPEC_API cutspec_status cutspec_check_geometry(const cutspec_config* config,
                                                  cutspec_geometry_report** out);
CUTSPEC_API int cutspec_geometry_ok(const cutspec_geometry_report* report);
CUTSPEC_API size_t cutspec_geometry_entry_count(const cutspec_geometry_report* report);

typedef struct cutspec_geometry_entry {
  int n;
  int p;
  int cut_elements;
  int ok;
  size_t violation_count;
  const int* violations; /* element indices, owned by the report */
} cutspec_geometry_entry;

CUTSPEC_API cutspec_status cutspec_geometry_entry_get(const cutspec_geometry_report* report,
                                                      size_t index, cutspec_geometry_entry* out);
CUTSPEC_API void cutspec_geometry_free(cutspec_geometry_report* report);

/* Convergence study. With override_assumption != 0, sweep points that
 * violate the interface assumption are skipped with a warning instead of
 * failing the run. */
CUTSPEC_API cutspec_status cutspec_study_run(const cutspec_config* config, int override_assumption,
                                             cutspec_study** out);
CUTSPEC_API int cutspec_study_is_eigen(const cutspec_study* study);
CUTSPEC_API size_t cutspec_study_record_count(const cutspec_study* study);

typedef struct cutspec_record {
  const char* problem;
  int n;
  double h;
  int p;
  int dofs;
  int stabilized;
  double l2_error; /* NaN for eigenproblems */
  double h1_error;
  size_t eigen_count;
  const double* eigenvalues; /* ascending */
  size_t eig_error_count;
  const double* eig_errors; /* relative errors vs the reference spectrum */
  double cond_a;
  double cond_m;
  double runtime;
} cutspec_record;

/* Pointers in the record stay valid until the study is freed. */
CUTSPEC_API cutspec_status cutspec_study_record_get(const cutspec_study* study, size_t index,
                                                    cutspec_record* out);

typedef struct cutspec_slopes {
  double l2;
  double h1;
  double cond_a;
  double cond_m;
  size_t eig_count;
  const double* eig;
} cutspec_slopes;

/* Fitted log-log slopes over the last three h-sweep points. */
CUTSPEC_API cutspec_status cutspec_study_slopes(const cutspec_study* study, cutspec_slopes* out);

typedef struct cutspec_decay {
  int available; /* 0 for h-sweeps */
  int monotone_decreasing;
  int convex;
  int log_linear;
} cutspec_decay;

CUTSPEC_API cutspec_status cutspec_study_decay(const cutspec_study* study, cutspec_decay* out);

CUTSPEC_API size_t cutspec_study_warning_count(const cutspec_study* study);
CUTSPEC_API const char* cutspec_study_warning(const cutspec_study* study, size_t index);

CUTSPEC_API const char* cutspec_study_table(const cutspec_study* study);
CUTSPEC_API const char* cutspec_study_csv(const cutspec_study* study);
CUTSPEC_API cutspec_status cutspec_study_write_csv(const cutspec_study* study, const char* path);
CUTSPEC_API void cutspec_study_free(cutspec_study* study);

#ifdef __cplusplus
}
#endif

#endif
