/* C interface of the zrp library: opaque handles and status codes.
 * Every function returning zrp_status leaves a message retrievable with
 * zrp_last_error() (per thread) when the status is not ZRP_OK. */
#ifndef ZRP_ZRP_H
#define ZRP_ZRP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ZRP_API __declspec(dllexport)
#else
#define ZRP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum zrp_status {
  ZRP_OK = 0,
  ZRP_ERR_USAGE = 1,
  ZRP_ERR_CONFIG = 2,
  ZRP_ERR_RANGE = 3,
  ZRP_ERR_CONVERGENCE = 4,
  ZRP_ERR_RESOURCE = 5,
  ZRP_ERR_PRECONDITION = 6,
  ZRP_ERR_IO = 7,
  ZRP_ERR_INTERNAL = 8
} zrp_status;

typedef struct zrp_grid zrp_grid;
typedef struct zrp_environment zrp_environment;
typedef struct zrp_tables zrp_tables;
typedef struct zrp_report zrp_report;

ZRP_API const char* zrp_version(void);
ZRP_API const char* zrp_last_error(void);
ZRP_API const char* zrp_status_name(zrp_status status);

/* Torus with (2 scale)^dim sites. */
ZRP_API zrp_status zrp_grid_create(int dim, int scale, zrp_grid** out);
ZRP_API size_t zrp_grid_size(const zrp_grid* grid);
ZRP_API void zrp_grid_free(zrp_grid* grid);

/* model_json: {"kind": "constant"|"iid_uniform"|"iid_two_point"|"checkerboard", ...} */
ZRP_API zrp_status zrp_environment_sample(const char* model_json, const zrp_grid* grid,
                                          uint64_t seed, zrp_environment** out);
/* Writes the 3x3 row-major effective matrix (leading dim x dim block used). */
ZRP_API zrp_status zrp_environment_effective_matrix(const zrp_environment* env, double tol,
                                                    double out[9]);
ZRP_API void zrp_environment_free(zrp_environment* env);

/* rate_json: {"kind": "linear"|"table", ...} */
ZRP_API zrp_status zrp_tables_create(const char* rate_json, zrp_tables** out);
ZRP_API zrp_status zrp_tables_at_density(const zrp_tables* tables, double rho, double* alpha,
                                         double* phi, double* chi);
ZRP_API void zrp_tables_free(zrp_tables* tables);

typedef struct zrp_run_options {
  int workers;          /* <= 0 means 1 */
  int override_seed;    /* nonzero: use `seed` instead of the config's */
  uint64_t seed;
  const char* kind;     /* if set, the config must be of (or is given) this kind */
} zrp_run_options;

/* The returned report may carry a failure marker; see zrp_report_failure. */
ZRP_API zrp_status zrp_run_config_json(const char* config_json, const zrp_run_options* options,
                                       zrp_report** out);
ZRP_API zrp_status zrp_run_config_file(const char* path, const zrp_run_options* options,
                                       zrp_report** out);
/* Static string holding the configuration run by `zrp suite`. */
ZRP_API const char* zrp_default_suite_config(void);

ZRP_API zrp_status zrp_report_emit(const zrp_report* report, const char* dir);
ZRP_API int zrp_report_passed(const zrp_report* report);
/* NULL when the run completed. */
ZRP_API const char* zrp_report_failure(const zrp_report* report);
ZRP_API const char* zrp_report_kind(const zrp_report* report);
ZRP_API const char* zrp_report_output(const zrp_report* report);
ZRP_API double zrp_report_wall_seconds(const zrp_report* report);
ZRP_API size_t zrp_report_criteria_count(const zrp_report* report);

typedef struct zrp_criterion {
  const char* id;
  const char* name;
  double observed;
  double reference;
  double tolerance;
  const char* comparison; /* "abs_le", "lt" or "le" */
  int pass;
} zrp_criterion;

/* Strings stay valid until the report is freed. */
ZRP_API zrp_status zrp_report_criterion(const zrp_report* report, size_t index,
                                        zrp_criterion* out);
ZRP_API void zrp_report_free(zrp_report* report);

typedef struct zrp_report_check {
  int consistent;
  int passed;
  size_t criteria;
  size_t failing;
} zrp_report_check;

ZRP_API zrp_status zrp_check_report_dir(const char* dir, zrp_report_check* out);

#ifdef __cplusplus
}
#endif

#endif
