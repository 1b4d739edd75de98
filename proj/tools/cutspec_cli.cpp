// Command-line driver for convergence studies. Uses only the C interface.

#include <cmath>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cutspec/cutspec.h"

namespace {

int exit_code(cutspec_status status) {
  return static_cast<int>(cutspec_classify_status(status));
}

int report_failure(cutspec_status status) {
  std::fprintf(stderr, "error [%s]: %s\n", cutspec_status_name(status), cutspec_last_error());
  return exit_code(status);
}

int list_problems() {
  const size_t n = cutspec_problem_count();
  for (size_t i = 0; i < n; ++i)
    std::printf("%-14s %-7s %s\n", cutspec_problem_name(i),
                cutspec_problem_is_eigen(i) ? "eigen" : "source", cutspec_problem_description(i));
  return 0;
}

int check_geometry(const std::string& path) {
  cutspec_config* config = nullptr;
  if (const auto s = cutspec_config_load(path.c_str(), &config); s != CUTSPEC_OK)
    return report_failure(s);
  cutspec_geometry_report* report = nullptr;
  const auto s = cutspec_check_geometry(config, &report);
  cutspec_config_free(config);
  if (s != CUTSPEC_OK) return report_failure(s);

  std::printf("%6s %4s %6s  %s\n", "N", "p", "cut", "assumption");
  const size_t n = cutspec_geometry_entry_count(report);
  for (size_t i = 0; i < n; ++i) {
    cutspec_geometry_entry e{};
    cutspec_geometry_entry_get(report, i, &e);
    std::printf("%6d %4d %6d  %s", e.n, e.p, e.cut_elements, e.ok ? "ok" : "VIOLATED");
    if (!e.ok) {
      std::printf(" (elements:");
      for (size_t k = 0; k < e.violation_count && k < 10; ++k) std::printf(" %d", e.violations[k]);
      if (e.violation_count > 10) std::printf(" ... %zu total", e.violation_count);
      std::printf(")");
    }
    std::printf("\n");
  }
  const bool ok = cutspec_geometry_ok(report) != 0;
  cutspec_geometry_free(report);
  return ok ? 0 : exit_code(CUTSPEC_ERR_ASSUMPTION_VIOLATED);
}

int run(const std::string& path, bool override_assumption, const std::string& output_override) {
  cutspec_config* config = nullptr;
  if (const auto s = cutspec_config_load(path.c_str(), &config); s != CUTSPEC_OK)
    return report_failure(s);
  if (!output_override.empty()) {
    if (const auto s = cutspec_config_set(config, "output", output_override.c_str());
        s != CUTSPEC_OK) {
      cutspec_config_free(config);
      return report_failure(s);
    }
  }
  const std::string output = cutspec_config_output(config);

  cutspec_study* study = nullptr;
  const auto s = cutspec_study_run(config, override_assumption ? 1 : 0, &study);
  cutspec_config_free(config);
  if (s != CUTSPEC_OK) return report_failure(s);

  std::fputs(cutspec_study_table(study), stdout);
  int code = 0;
  if (!output.empty()) {
    if (cutspec_study_record_count(study) == 0) {
      std::fprintf(stderr, "no sweep points completed; %s not written\n", output.c_str());
    } else if (const auto w = cutspec_study_write_csv(study, output.c_str()); w != CUTSPEC_OK) {
      code = report_failure(w);
    } else {
      std::printf("wrote %s\n", output.c_str());
    }
  }
  cutspec_study_free(study);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unfitted spectral element convergence studies for elliptic interface problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  bool override_assumption = false;

  auto* run_cmd = app.add_subcommand("run", "Run the sweep described by a config file");
  run_cmd->add_option("--config,-c", config_path, "Study configuration (key = value)")
      ->required();
  run_cmd->add_option("--output,-o", output, "CSV output path (overrides the config)");
  run_cmd->add_flag("--override-assumption", override_assumption,
                    "Skip sweep points that violate the interface assumption");

  app.add_subcommand("list-problems", "List the built-in problems");

  auto* geom_cmd =
      app.add_subcommand("check-geometry", "Report the interface assumption for each sweep point");
  geom_cmd->add_option("--config,-c", config_path, "Study configuration (key = value)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (run_cmd->parsed()) return run(config_path, override_assumption, output);
  if (geom_cmd->parsed()) return check_geometry(config_path);
  return list_problems();
}
