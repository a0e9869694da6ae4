/* C interface to the federated slicing simulator and experiments. */
#ifndef SLICEFED_H
#define SLICEFED_H

#include <stddef.h>
#include <stdint.h>

#if defined(SLICEFED_BUILDING_LIBRARY)
#define SF_API __attribute__((visibility("default")))
#else
#define SF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_CONFIG = 1,
  SF_ERR_NUMERIC = 2,
  SF_ERR_SELFTEST = 3,
  SF_ERR_INVALID_ARG = 4,
  SF_ERR_IO = 5,
  SF_ERR_INTERNAL = 6
} sf_status;

typedef struct sf_config sf_config;
typedef struct sf_env sf_env;

/* Progress and self-test lines; `line` is valid only during the call. */
typedef void (*sf_log_fn)(void* user, const char* line);

SF_API const char* sf_version(void);
/* Message of the last failed call on this thread, "" if none. */
SF_API const char* sf_last_error(void);
SF_API const char* sf_status_name(sf_status status);

/* ---- configuration ---- */
SF_API sf_status sf_config_default(sf_config** out);
SF_API sf_status sf_config_load(const char* path, sf_config** out);
SF_API sf_status sf_config_parse(const char* json_text, sf_config** out);
SF_API void sf_config_free(sf_config* config);
/* 20 rounds of 200 slots and shortened evaluations. */
SF_API sf_status sf_config_apply_smoke(sf_config* config);
SF_API sf_status sf_config_set_seeds(sf_config* config, uint64_t base_seed, size_t count);
SF_API sf_status sf_config_get_seeds(const sf_config* config, uint64_t* base_seed, size_t* count);
/* Copies the resolved JSON into `buffer` (NUL-terminated) when it fits;
 * `required` receives the size including the terminator. */
SF_API sf_status sf_config_to_json(const sf_config* config, char* buffer, size_t capacity, size_t* required);
SF_API size_t sf_config_num_gnbs(const sf_config* config);

/* ---- experiment suites ----
 * `seeds` may be NULL (count 0) to use the config's seed list.
 * `policies` is a comma-separated list of slicefed, equal, queueprop, random,
 * or NULL for all four. Files are written below `out_dir`. */
SF_API sf_status sf_run_train(const sf_config* config, const char* out_dir, const char* policies,
                              const uint64_t* seeds, size_t num_seeds, sf_log_fn log, void* user);
SF_API sf_status sf_run_eval_cdf(const sf_config* config, const char* out_dir, const char* policies,
                                 const uint64_t* seeds, size_t num_seeds, sf_log_fn log, void* user);
SF_API sf_status sf_run_eval_traces(const sf_config* config, const char* out_dir, const char* policies,
                                    const uint64_t* seeds, size_t num_seeds, sf_log_fn log, void* user);
SF_API sf_status sf_run_eval_sweep(const sf_config* config, const char* out_dir, const char* policies,
                                   const uint64_t* seeds, size_t num_seeds, sf_log_fn log, void* user);

/* Runs the numerical self-checks; with `include_training` nonzero also the
 * 20-round smoke training check. Returns SF_ERR_SELFTEST if any check fails. */
SF_API sf_status sf_selftest(uint64_t seed, int include_training, sf_log_fn log, void* user);

/* ---- raw environment ---- */
SF_API sf_status sf_env_create(const sf_config* config, uint64_t seed, sf_env** out);
SF_API void sf_env_free(sf_env* env);
SF_API size_t sf_env_num_gnbs(const sf_env* env);
SF_API size_t sf_env_obs_dim(void);
SF_API sf_status sf_env_reset(sf_env* env, uint64_t episode);
/* `observations` holds num_gnbs * obs_dim doubles, row per gNB. */
SF_API sf_status sf_env_observe(const sf_env* env, double* observations);
/* `actions` holds num_gnbs * 3 slice fractions (eMBB, URLLC, mMTC).
 * `rewards` (num_gnbs) and `constraints` (num_gnbs * 3: g1, g2, g3) may be NULL. */
SF_API sf_status sf_env_step(sf_env* env, const double* actions, double* rewards, double* constraints);

#ifdef __cplusplus
}
#endif

#endif
