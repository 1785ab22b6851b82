#include "zrp/zrp.h"

#include <fstream>
#include <new>
#include <string>

#include "zrp/environment.hpp"
#include "zrp/errors.hpp"
#include "zrp/harness.hpp"
#include "zrp/homogenization.hpp"
#include "zrp/measures.hpp"

struct zrp_grid {
  zrp::TorusGrid grid;
};

struct zrp_environment {
  zrp::Environment env;
};

struct zrp_tables {
  zrp::FugacityTables tables;
};

struct zrp_report {
  zrp::ExperimentReport report;
  std::string kind;
};

namespace {

thread_local std::string last_error;

zrp_status status_of(zrp::ErrorKind k) {
  switch (k) {
    case zrp::ErrorKind::usage: return ZRP_ERR_USAGE;
    case zrp::ErrorKind::config: return ZRP_ERR_CONFIG;
    case zrp::ErrorKind::range: return ZRP_ERR_RANGE;
    case zrp::ErrorKind::convergence: return ZRP_ERR_CONVERGENCE;
    case zrp::ErrorKind::resource: return ZRP_ERR_RESOURCE;
    case zrp::ErrorKind::precondition: return ZRP_ERR_PRECONDITION;
    case zrp::ErrorKind::io: return ZRP_ERR_IO;
  }
  return ZRP_ERR_INTERNAL;
}

template <class F>
zrp_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return ZRP_OK;
  } catch (const zrp::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return ZRP_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ZRP_ERR_RESOURCE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ZRP_ERR_INTERNAL;
  }
}

zrp_status null_argument() {
  last_error = "null argument";
  return ZRP_ERR_USAGE;
}

zrp_status run(nlohmann::json doc, const zrp_run_options* options, zrp_report** out) {
  zrp::RunOptions opts;
  if (options) {
    opts.workers = options->workers > 0 ? options->workers : 1;
    if (options->override_seed) opts.seed = options->seed;
    if (options->kind) {
      if (!doc.is_object()) throw zrp::ConfigError("configuration must be a JSON object");
      if (!doc.contains("kind")) doc["kind"] = options->kind;
      if (doc.at("kind") != options->kind) {
        throw zrp::ConfigError(std::string("configuration kind must be '") + options->kind + "'");
      }
    }
  }
  auto config = zrp::ExperimentConfig::from_json(doc);
  auto* r = new zrp_report{zrp::run_experiment(config, opts), {}};
  r->kind = zrp::to_string(r->report.config.kind);
  *out = r;
  return ZRP_OK;
}

}  // namespace

extern "C" {

const char* zrp_version(void) { return zrp::version(); }

const char* zrp_last_error(void) { return last_error.c_str(); }

const char* zrp_status_name(zrp_status status) {
  switch (status) {
    case ZRP_OK: return "ok";
    case ZRP_ERR_USAGE: return "usage";
    case ZRP_ERR_CONFIG: return "config";
    case ZRP_ERR_RANGE: return "range";
    case ZRP_ERR_CONVERGENCE: return "convergence";
    case ZRP_ERR_RESOURCE: return "resource";
    case ZRP_ERR_PRECONDITION: return "precondition";
    case ZRP_ERR_IO: return "io";
    case ZRP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

zrp_status zrp_grid_create(int dim, int scale, zrp_grid** out) {
  if (!out) return null_argument();
  return guarded([&] { *out = new zrp_grid{zrp::TorusGrid(dim, scale)}; });
}

size_t zrp_grid_size(const zrp_grid* grid) { return grid ? grid->grid.size() : 0; }

void zrp_grid_free(zrp_grid* grid) { delete grid; }

zrp_status zrp_environment_sample(const char* model_json, const zrp_grid* grid, uint64_t seed,
                                  zrp_environment** out) {
  if (!model_json || !grid || !out) return null_argument();
  return guarded([&] {
    auto model = zrp::EnvironmentModel::from_json(nlohmann::json::parse(model_json));
    *out = new zrp_environment{zrp::sample_environment(model, grid->grid, seed)};
  });
}

zrp_status zrp_environment_effective_matrix(const zrp_environment* env, double tol,
                                            double out[9]) {
  if (!env || !out) return null_argument();
  return guarded([&] {
    auto A = zrp::effective_matrix(env->env, tol);
    for (int i = 0; i < 9; ++i) out[i] = A.A[static_cast<std::size_t>(i)];
  });
}

void zrp_environment_free(zrp_environment* env) { delete env; }

zrp_status zrp_tables_create(const char* rate_json, zrp_tables** out) {
  if (!rate_json || !out) return null_argument();
  return guarded([&] {
    auto g = zrp::RateFunction::from_json(nlohmann::json::parse(rate_json));
    *out = new zrp_tables{zrp::FugacityTables(g)};
  });
}

zrp_status zrp_tables_at_density(const zrp_tables* tables, double rho, double* alpha,
                                 double* phi, double* chi) {
  if (!tables) return null_argument();
  return guarded([&] {
    auto p = tables->tables.at_density(rho);
    if (alpha) *alpha = p.alpha;
    if (phi) *phi = p.phi;
    if (chi) *chi = p.chi;
  });
}

void zrp_tables_free(zrp_tables* tables) { delete tables; }

zrp_status zrp_run_config_json(const char* config_json, const zrp_run_options* options,
                               zrp_report** out) {
  if (!config_json || !out) return null_argument();
  *out = nullptr;
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw zrp::ConfigError(e.what());
    }
    run(std::move(doc), options, out);
  });
}

zrp_status zrp_run_config_file(const char* path, const zrp_run_options* options,
                               zrp_report** out) {
  if (!path || !out) return null_argument();
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw zrp::IoError(std::string("cannot read ") + path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw zrp::ConfigError(std::string(path) + ": " + e.what());
    }
    run(std::move(doc), options, out);
  });
}

const char* zrp_default_suite_config(void) {
  static const std::string doc = zrp::default_suite_config().dump();
  return doc.c_str();
}

zrp_status zrp_report_emit(const zrp_report* report, const char* dir) {
  if (!report || !dir) return null_argument();
  return guarded([&] { zrp::emit_report(report->report, dir); });
}

int zrp_report_passed(const zrp_report* report) {
  return report && report->report.passed() ? 1 : 0;
}

const char* zrp_report_failure(const zrp_report* report) {
  return report && report->report.failure ? report->report.failure->c_str() : nullptr;
}

const char* zrp_report_kind(const zrp_report* report) {
  return report ? report->kind.c_str() : "";
}

const char* zrp_report_output(const zrp_report* report) {
  return report ? report->report.config.output.c_str() : "";
}

double zrp_report_wall_seconds(const zrp_report* report) {
  return report ? report->report.wall_seconds : 0.0;
}

size_t zrp_report_criteria_count(const zrp_report* report) {
  return report ? report->report.criteria.size() : 0;
}

zrp_status zrp_report_criterion(const zrp_report* report, size_t index, zrp_criterion* out) {
  if (!report || !out) return null_argument();
  if (index >= report->report.criteria.size()) {
    last_error = "criterion index out of range";
    return ZRP_ERR_RANGE;
  }
  const auto& c = report->report.criteria[index];
  *out = zrp_criterion{c.id.c_str(), c.name.c_str(), c.observed, c.reference, c.tolerance,
                       zrp::to_string(c.comparison), c.pass ? 1 : 0};
  last_error.clear();
  return ZRP_OK;
}

void zrp_report_free(zrp_report* report) { delete report; }

zrp_status zrp_check_report_dir(const char* dir, zrp_report_check* out) {
  if (!dir || !out) return null_argument();
  return guarded([&] {
    auto c = zrp::check_report_dir(dir);
    *out = zrp_report_check{c.consistent ? 1 : 0, c.passed ? 1 : 0, c.criteria, c.failing.size()};
  });
}

}  // extern "C"
