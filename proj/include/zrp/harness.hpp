#pragma once

// Experiment configuration, seeded parallel trials, criteria and reports.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace zrp {

enum class ExperimentKind { hydro, fluctuation, boltzmann_gibbs, homogenize, property_suite };
const char* to_string(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::property_suite;
  int dim = 1;
  std::vector<int> N;
  int trials = 1;
  std::uint64_t seed = 1;
  double T = 0.0;
  double rho = 1.0;
  double lambda = 1.0;
  std::string output;
  nlohmann::json raw;  // full document, kind-specific keys included

  // Throws ConfigError on missing or out-of-range fields.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const { return raw; }
};

ExperimentConfig load_config(const std::filesystem::path& path);

enum class Comparison { abs_le, lt, le };
const char* to_string(Comparison c);
Comparison comparison_from_string(const std::string& s);

// abs_le: |observed - reference| <= tolerance
// lt:     observed < reference
// le:     observed <= reference + tolerance
bool compare(Comparison c, double observed, double reference, double tolerance);

struct CriterionRow {
  std::string id;    // acceptance criterion number, e.g. "8"
  std::string name;  // part within it, e.g. "qv_limit"
  double observed = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::abs_le;
  bool pass = false;
};

struct StatRow {
  int N = 0;
  std::uint64_t seed = 0;
  long trial = -1;  // -1 for per-N aggregates
  std::string statistic;
  double value = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<StatRow> rows;
  std::vector<CriterionRow> criteria;
  nlohmann::json statistics = nlohmann::json::object();
  std::map<std::string, std::string> artifacts;  // extra files by name
  std::optional<std::string> failure;
  double wall_seconds = 0.0;

  void add(const std::string& id, const std::string& name, double observed, double reference,
           double tolerance, Comparison c);
  bool passed() const;
  // Criteria pass per id, in order of first appearance.
  std::vector<std::pair<std::string, bool>> by_criterion() const;
};

struct RunOptions {
  int workers = 1;
  std::optional<std::uint64_t> seed;  // overrides the config's master seed
};

// Never throws for module errors: they are recorded in `failure` together
// with whatever rows were produced.
ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// rows.csv, criteria.csv, summary.json, digest.txt and any artifacts.
// Throws IoError if the directory cannot be written.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

struct ReportCheck {
  bool consistent = false;  // summary pass flag equals the recomputed one
  bool passed = false;      // recomputed from criteria.csv alone
  std::size_t criteria = 0;
  std::vector<std::string> failing;
};
ReportCheck check_report_dir(const std::filesystem::path& dir);

// The configuration run by `zrp suite`.
nlohmann::json default_suite_config();

const char* version();

// Trial seeds: derive_seed({master, N, trial}).
std::uint64_t trial_seed(std::uint64_t master, int N, long trial);
std::uint64_t environment_seed(std::uint64_t master, int N);

// Runs f(0..count-1) on `workers` threads; results are stored by index so
// the output does not depend on scheduling. The exception of the lowest
// failing index is rethrown.
template <class R>
std::vector<R> parallel_map(std::size_t count, int workers, const std::function<R(std::size_t)>& f);

}  // namespace zrp

#include "zrp/detail/parallel.hpp"
