/*
 * hlucb: active pairwise-comparison ranking (Hamming-LUCB) and the rating
 * campaign around it.
 *
 * All functions return an hlucb_status. On failure, hlucb_last_error()
 * returns a message for the calling thread, valid until that thread's next
 * call into the library. Strings returned through `char **` out-parameters
 * are owned by the caller and must be released with hlucb_string_free().
 * Handles are not thread-safe; serialize access to each one.
 */
#ifndef HLUCB_H
#define HLUCB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HLUCB_BUILDING)
#    define HLUCB_API __declspec(dllexport)
#  else
#    define HLUCB_API __declspec(dllimport)
#  endif
#else
#  define HLUCB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hlucb_status {
  HLUCB_OK = 0,
  HLUCB_ERR_INVALID_ARGUMENT = 1,
  HLUCB_ERR_INVALID_CONFIG = 2,
  HLUCB_ERR_DOMAIN = 3,
  HLUCB_ERR_STATE = 4,
  HLUCB_ERR_UNKNOWN_DUEL = 5,
  HLUCB_ERR_DUPLICATE_OUTCOME = 6,
  HLUCB_ERR_TERMINATED = 7,
  HLUCB_ERR_IO = 8,
  HLUCB_ERR_PARSE = 9,
  HLUCB_ERR_MISMATCH = 10,
  HLUCB_ERR_BUFFER_TOO_SMALL = 11,
  HLUCB_ERR_INTERNAL = 99
} hlucb_status;

HLUCB_API const char *hlucb_version(void);
HLUCB_API const char *hlucb_last_error(void);
HLUCB_API const char *hlucb_status_name(hlucb_status status);
HLUCB_API void hlucb_string_free(char *str);

/* ------------------------------------------------------------------------ */
/* Configuration                                                            */

typedef struct hlucb_config {
  size_t n;               /* item count, >= 2 */
  size_t k;               /* split point */
  size_t h;               /* allowed mistakes per returned set */
  double sigma;           /* risk parameter in (0, 1] */
  double radius_constant; /* > 0 */
} hlucb_config;

/* Fills the defaults: sigma 0.1, radius_constant 1, everything else 0. */
HLUCB_API void hlucb_config_init(hlucb_config *config);
HLUCB_API hlucb_status hlucb_config_validate(const hlucb_config *config);
HLUCB_API hlucb_status hlucb_confidence_radius(uint64_t count, size_t n, double sigma,
                                               double radius_constant, double *out);

/* ------------------------------------------------------------------------ */
/* Engine                                                                   */

typedef struct hlucb_engine hlucb_engine;

typedef enum hlucb_phase {
  HLUCB_PHASE_INITIALIZING = 0,
  HLUCB_PHASE_ACTIVE = 1,
  HLUCB_PHASE_TERMINATED = 2
} hlucb_phase;

typedef struct hlucb_duel {
  uint64_t duel_id;
  size_t focal;
  size_t opponent;
  int display_swap; /* nonzero: focal is shown on the right */
} hlucb_duel;

/* Sorted positions are 0-based (position 0 = highest score). */
typedef struct hlucb_indices {
  size_t d1, d2, b1, b2; /* sorted positions */
  size_t item_b1, item_b2;
  int stop; /* stopping condition holds */
} hlucb_indices;

HLUCB_API hlucb_status hlucb_engine_create(const hlucb_config *config, uint64_t seed,
                                           hlucb_engine **out);
HLUCB_API void hlucb_engine_destroy(hlucb_engine *engine);
/* Restores from the canonical JSON produced by hlucb_engine_snapshot. */
HLUCB_API hlucb_status hlucb_engine_restore(const char *json, hlucb_engine **out);
HLUCB_API hlucb_status hlucb_engine_snapshot(const hlucb_engine *engine, char **json_out);

/* Pending duels, or a fresh round when none are pending. Writes up to
 * `capacity` duels and stores the total in *count; returns
 * HLUCB_ERR_BUFFER_TOO_SMALL when capacity < *count (calling again returns the
 * same duels). */
HLUCB_API hlucb_status hlucb_engine_next_duels(hlucb_engine *engine, hlucb_duel *out,
                                               size_t capacity, size_t *count);
HLUCB_API hlucb_status hlucb_engine_record_outcome(hlucb_engine *engine, uint64_t duel_id,
                                                   int focal_won);
HLUCB_API hlucb_status hlucb_engine_phase(const hlucb_engine *engine, hlucb_phase *out);
HLUCB_API hlucb_status hlucb_engine_indices(const hlucb_engine *engine, hlucb_indices *out);
/* radius is +inf for count == 0. */
HLUCB_API hlucb_status hlucb_engine_score(const hlucb_engine *engine, size_t item,
                                          double *tau_hat, uint64_t *count, double *radius);
/* {set_top, middle, set_bottom, full_order, provisional}. Without
 * allow_provisional a non-terminated engine yields HLUCB_ERR_STATE. */
HLUCB_API hlucb_status hlucb_engine_result(const hlucb_engine *engine, int allow_provisional,
                                           char **json_out);

/* ------------------------------------------------------------------------ */
/* Simulation                                                               */

typedef enum hlucb_model_kind {
  HLUCB_MODEL_BRADLEY_TERRY = 0, /* values = positive weights */
  HLUCB_MODEL_PLANTED_BORDA = 1, /* values = per-item win probabilities */
  HLUCB_MODEL_DETERMINISTIC = 2  /* order = permutation, strongest first */
} hlucb_model_kind;

typedef struct hlucb_model {
  hlucb_model_kind kind;
  size_t n;
  const double *values;
  const size_t *order;
} hlucb_model;

/* ratio^(n-1), ..., ratio, 1 over items 0..n-1, shuffled when permute_seed != 0. */
HLUCB_API hlucb_status hlucb_geometric_weights(size_t n, double ratio, uint64_t permute_seed,
                                               double *out);
HLUCB_API hlucb_status hlucb_true_borda(const hlucb_model *model, double *out);
HLUCB_API const char *hlucb_sim_csv_header(void);

/* Runs one seeded simulation. Any of log_path, report_json and csv_row may be
 * NULL. When log_path is set, the full event log is written there. */
HLUCB_API hlucb_status hlucb_simulate(const hlucb_config *config, const hlucb_model *model,
                                      uint64_t budget, uint64_t seed, const char *log_path,
                                      char **report_json, char **csv_row);

/* ------------------------------------------------------------------------ */
/* Logs and replay                                                          */

/* Replays a JSONL event log into a fresh engine; instance may be NULL (all). */
HLUCB_API hlucb_status hlucb_replay_log(const char *log_path, const hlucb_config *config,
                                        uint64_t seed, const char *instance,
                                        hlucb_engine **out);
/* Replays one instance of a campaign directory (uses its campaign.json). */
HLUCB_API hlucb_status hlucb_campaign_replay(const char *manifest_path, const char *log_dir,
                                             const char *instance, hlucb_engine **out);
/* Ranking CSV `position,item_id,label`, most-fake first. */
HLUCB_API hlucb_status hlucb_campaign_ranking_csv(const char *manifest_path,
                                                  const hlucb_engine *engine,
                                                  const char *instance, char **csv_out);

/* ------------------------------------------------------------------------ */
/* Statistics                                                               */

typedef struct hlucb_accuracy {
  double true_positive_rate;
  double false_positive_rate;
  double accuracy;
  size_t n;
  size_t fakes;
  size_t reals;
  size_t top_half;
} hlucb_accuracy;

HLUCB_API hlucb_status hlucb_accuracy_from_csv(const char *ranking_path, hlucb_accuracy *out);
HLUCB_API hlucb_status hlucb_pearson(const double *x, const double *y, size_t n, double *out);
HLUCB_API hlucb_status hlucb_spearman(const double *x, const double *y, size_t n, double *out);
HLUCB_API hlucb_status hlucb_p_value(double r, size_t n, double *out);
/* transform: "identity" or "signed_log"; permutations > 0 switches to a
 * permutation test. human_path is a ranking CSV or an `item_id,score` CSV. */
HLUCB_API hlucb_status hlucb_correlate_files(const char *margins_path, const char *human_path,
                                             const char *transform, size_t permutations,
                                             uint64_t seed, char **report_json);

/* ------------------------------------------------------------------------ */
/* Rating service                                                           */

typedef struct hlucb_service hlucb_service;

/* config_path may be NULL (defaults or the persisted campaign.json). */
HLUCB_API hlucb_status hlucb_service_create(const char *manifest_path, const char *log_dir,
                                            const char *config_path, const char *image_root,
                                            hlucb_service **out);
/* port 0 picks a free port; the bound port is stored in *bound_port. */
HLUCB_API hlucb_status hlucb_service_bind(hlucb_service *service, const char *host, int port,
                                          int *bound_port);
/* Blocks until hlucb_service_stop is called from another thread. */
HLUCB_API hlucb_status hlucb_service_run(hlucb_service *service);
HLUCB_API void hlucb_service_stop(hlucb_service *service);
HLUCB_API void hlucb_service_destroy(hlucb_service *service);

#ifdef __cplusplus
}
#endif

#endif /* HLUCB_H */
