#ifndef FCGRAD_FCGRAD_H
#define FCGRAD_FCGRAD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FCG_API __declspec(dllexport)
#else
#define FCG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fcg_status {
  FCG_OK = 0,
  FCG_CHECK_FAILED = 1,
  FCG_ERR_CONFIG = 2,
  FCG_ERR_IO = 3,
  FCG_ERR_CONTRACT = 4,
  FCG_ERR_DEGENERATE = 5,
  FCG_ERR_DOMAIN = 6,
  FCG_ERR_INTERNAL = 7
} fcg_status;

/* Message of the last failing call on this thread; "" after success. */
FCG_API const char* fcg_last_error(void);
FCG_API const char* fcg_version(void);

/* 0 quiet, 1 progress lines on stderr (default), 2 debug. */
FCG_API void fcg_set_log_level(int level);

/*
 * String outputs: pass buf/cap; *needed (optional) receives the full length
 * including the terminating NUL. Output is truncated, but still
 * NUL-terminated, when cap is too small.
 */

/* ---- configuration ---- */

typedef struct fcg_config fcg_config;

FCG_API fcg_status fcg_config_create(fcg_config** out);
FCG_API void fcg_config_destroy(fcg_config* cfg);
FCG_API fcg_status fcg_config_load_file(fcg_config* cfg, const char* path);
FCG_API fcg_status fcg_config_set(fcg_config* cfg, const char* key,
                                  const char* value);
/* "KEY=VALUE" form, as given to --override. */
FCG_API fcg_status fcg_config_override(fcg_config* cfg, const char* kv);
FCG_API fcg_status fcg_config_get(const fcg_config* cfg, const char* key,
                                  char* buf, size_t cap, size_t* needed);
/* Applies per-environment defaults to keys not set explicitly, loads the
 * layout file and validates ranges. */
FCG_API fcg_status fcg_config_resolve(fcg_config* cfg);
FCG_API fcg_status fcg_config_dump(const fcg_config* cfg, char* buf,
                                   size_t cap, size_t* needed);

/* ---- gradient combination ---- */

typedef enum fcg_branch {
  FCG_BRANCH_BLEND = 0,
  FCG_BRANCH_PROJ_IND = 1,
  FCG_BRANCH_PROJ_COL = 2,
  FCG_BRANCH_PASS_THROUGH = 3
} fcg_branch;

typedef struct fcg_combine_info {
  int conflict;
  int branch; /* fcg_branch */
  double inner_product;
  double projection_coefficient;
} fcg_combine_info;

/* out receives n values. info may be NULL. */
FCG_API int fcg_detect_conflict(const double* g_ind, const double* g_col,
                                size_t n);
FCG_API fcg_status fcg_project_onto_normal_plane(const double* g,
                                                 const double* onto, size_t n,
                                                 double* out);
FCG_API fcg_status fcg_combine_fcgrad(const double* g_ind, const double* g_col,
                                      size_t n, double v_ind, double v_col,
                                      double beta, double* out,
                                      fcg_combine_info* info);
FCG_API fcg_status fcg_combine_weighted(const double* g_ind,
                                        const double* g_col, size_t n,
                                        double beta, double* out,
                                        fcg_combine_info* info);
FCG_API fcg_status fcg_combine_pcgrad(const double* g_ind, const double* g_col,
                                      size_t n, double* out,
                                      fcg_combine_info* info);

/* Writes H^T v into out (n values). Return nonzero to abort. */
typedef int (*fcg_hvp_fn)(const double* v, double* out, size_t n, void* user);

FCG_API fcg_status fcg_combine_aga(const double* g_ind, const double* g_col,
                                   size_t n, fcg_hvp_fn hvp, void* user,
                                   double lambda_mag, double* out,
                                   fcg_combine_info* info);

/* ---- fairness metrics ---- */

typedef struct fcg_fairness {
  double mean;
  double geomean;
  double sum_log;
  double min;
  double gini;
  double jain;
  int has_negative;
} fcg_fairness;

FCG_API fcg_status fcg_fairness_report(const double* returns, size_t n,
                                       int shift_negative, fcg_fairness* out);
FCG_API fcg_status fcg_alpha_fairness(const double* returns, size_t n,
                                      double alpha, double* out);

/* ---- environments ---- */

typedef struct fcg_env fcg_env;

/* Uses the config's env kind and env.* keys. */
FCG_API fcg_status fcg_env_create(const fcg_config* cfg, fcg_env** out);
FCG_API void fcg_env_destroy(fcg_env* env);
FCG_API fcg_status fcg_env_shape(const fcg_env* env, size_t* num_agents,
                                 size_t* obs_dim, size_t* num_actions);
/* obs receives num_agents * obs_dim values, agent-major. */
FCG_API fcg_status fcg_env_reset(fcg_env* env, uint64_t seed, double* obs);
FCG_API fcg_status fcg_env_step(fcg_env* env, const int* actions, double* obs,
                                double* rewards, int* done);
FCG_API fcg_status fcg_env_render(const fcg_env* env, char* buf, size_t cap,
                                  size_t* needed);

/* ---- commands ----
 * Each resolves and validates a copy of the config first. */

/* FCG_CHECK_FAILED when an expected-pass check failed or the negative control
 * misbehaved; verify.csv is written either way. */
FCG_API fcg_status fcg_verify(const fcg_config* cfg, const char* out_dir);
FCG_API fcg_status fcg_train(const fcg_config* cfg, const char* out_dir);
/* out may be NULL. */
FCG_API fcg_status fcg_eval(const fcg_config* cfg, const char* checkpoint,
                            size_t episodes, uint64_t seed,
                            const char* out_dir, fcg_fairness* out);
FCG_API fcg_status fcg_sweep_beta(const fcg_config* cfg, const double* betas,
                                  size_t n, const char* out_dir);
FCG_API fcg_status fcg_plot(const char* const* csv_paths, size_t n,
                            const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
