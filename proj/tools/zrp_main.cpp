// zrp command-line front end over the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

#include "zrp/zrp.h"

namespace {

constexpr int exit_fail = 1;
constexpr int exit_error = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "override the master seed");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "report directory");
}

int finish(zrp_report* report, const Common& c) {
  std::string dir = c.out;
  if (dir.empty()) dir = zrp_report_output(report);
  if (dir.empty()) dir = std::string("zrp-out/") + zrp_report_kind(report);
  int code = zrp_report_passed(report) ? 0 : exit_fail;
  if (zrp_report_emit(report, dir.c_str()) != ZRP_OK) {
    std::fprintf(stderr, "zrp: %s\n", zrp_last_error());
    code = exit_error;
  }
  for (size_t i = 0; i < zrp_report_criteria_count(report); ++i) {
    zrp_criterion cr;
    zrp_report_criterion(report, i, &cr);
    std::printf("%s %-3s %-40s observed=%-12.6g reference=%-12.6g tol=%.3g\n",
                cr.pass ? "PASS" : "FAIL", cr.id, cr.name, cr.observed, cr.reference,
                cr.tolerance);
  }
  if (const char* f = zrp_report_failure(report)) std::fprintf(stderr, "zrp: run failed: %s\n", f);
  std::printf("%s  (%s, %.1fs)\n", code == 0 ? "PASS" : "FAIL", dir.c_str(),
              zrp_report_wall_seconds(report));
  zrp_report_free(report);
  return code;
}

int run(const std::string* path, const char* json, const char* kind, const Common& c) {
  zrp_run_options opts{c.workers, c.seed ? 1 : 0, c.seed.value_or(0), kind};
  zrp_report* report = nullptr;
  zrp_status st = path ? zrp_run_config_file(path->c_str(), &opts, &report)
                       : zrp_run_config_json(json, &opts, &report);
  if (st != ZRP_OK) {
    std::fprintf(stderr, "zrp: %s error: %s\n", zrp_status_name(st), zrp_last_error());
    return exit_error;
  }
  return finish(report, c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-range process in a random environment"};
  app.set_version_flag("--version", zrp_version());
  app.require_subcommand(1);

  Common run_opts, hom_opts, suite_opts;
  std::string run_config, hom_config, report_dir;

  auto* run_cmd = app.add_subcommand("run", "run an experiment configuration");
  run_cmd->add_option("config", run_config, "configuration JSON")->required()->check(CLI::ExistingFile);
  add_common(run_cmd, run_opts);

  auto* hom_cmd = app.add_subcommand("homogenize", "compute homogenized matrices");
  hom_cmd->add_option("config", hom_config, "configuration JSON")->required()->check(CLI::ExistingFile);
  add_common(hom_cmd, hom_opts);

  auto* suite_cmd = app.add_subcommand("suite", "run the module property suite");
  add_common(suite_cmd, suite_opts);

  auto* report_cmd = app.add_subcommand("report", "recheck an emitted report directory");
  report_cmd->add_option("dir", report_dir, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : exit_error;
  }

  if (*run_cmd) return run(&run_config, nullptr, nullptr, run_opts);
  if (*hom_cmd) return run(&hom_config, nullptr, "homogenize", hom_opts);
  if (*suite_cmd) return run(nullptr, zrp_default_suite_config(), "property_suite", suite_opts);

  zrp_report_check check;
  if (zrp_check_report_dir(report_dir.c_str(), &check) != ZRP_OK) {
    std::fprintf(stderr, "zrp: %s\n", zrp_last_error());
    return exit_error;
  }
  std::printf("criteria=%zu failing=%zu consistent=%s\n%s\n", check.criteria, check.failing,
              check.consistent ? "yes" : "no", check.passed ? "PASS" : "FAIL");
  if (!check.consistent) return exit_error;
  return check.passed ? 0 : exit_fail;
}
