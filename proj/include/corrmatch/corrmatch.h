#ifndef CORRMATCH_H
#define CORRMATCH_H

/* C interface to the corrmatch library. Objects are opaque handles owned by
 * the caller and released with the matching *_free function. Every call that
 * can fail returns a cm_status; on failure a message is available from
 * cm_last_error() on the same thread until the next failing call. Strings
 * returned through char** outputs are heap copies released with
 * cm_string_free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CM_API __declspec(dllexport)
#else
#define CM_API __attribute__((visibility("default")))
#endif

typedef enum cm_status {
  CM_OK = 0,
  CM_ERR_INVALID_ARGUMENT = 1,
  CM_ERR_SIZE_MISMATCH = 2,
  CM_ERR_SIZE_LIMIT = 3,
  CM_ERR_INFEASIBLE = 4,
  CM_ERR_INTERNAL = 5,
  CM_ERR_CONFIG = 6,
  CM_ERR_IO = 7,
  CM_ERR_NULL_ARGUMENT = 8,
  CM_ERR_UNKNOWN = 99
} cm_status;

typedef struct cm_graph cm_graph;
typedef struct cm_bijection cm_bijection;
typedef struct cm_config cm_config;

CM_API const char* cm_version(void);
CM_API const char* cm_status_name(cm_status status);
CM_API const char* cm_last_error(void);
CM_API void cm_string_free(char* s);

/* Worker count from CORRMATCH_THREADS, else the hardware concurrency. */
CM_API unsigned cm_default_thread_count(void);

/* ---- graphs and bijections ------------------------------------------- */

/* `pairs` holds m (u, v) pairs back to back. */
CM_API cm_status cm_graph_from_edges(size_t n, const uint32_t* pairs, size_t m, cm_graph** out);
/* Edge-list text: "n m" then one "u v" line per edge. */
CM_API cm_status cm_graph_read(const char* path, cm_graph** out);
CM_API cm_status cm_graph_write(const cm_graph* g, const char* path);
CM_API size_t cm_graph_vertex_count(const cm_graph* g);
CM_API size_t cm_graph_edge_count(const cm_graph* g);
CM_API void cm_graph_free(cm_graph* g);

CM_API cm_status cm_bijection_from_images(size_t n, const uint32_t* images, cm_bijection** out);
/* Text: "n" then the n forward images. */
CM_API cm_status cm_bijection_read(const char* path, cm_bijection** out);
CM_API cm_status cm_bijection_write(const cm_bijection* pi, const char* path);
CM_API size_t cm_bijection_size(const cm_bijection* pi);
/* Copies the forward images into `images`, which must hold size() entries. */
CM_API cm_status cm_bijection_images(const cm_bijection* pi, uint32_t* images);
CM_API void cm_bijection_free(cm_bijection* pi);

/* ---- model ------------------------------------------------------------ */

/* Draws (pi*, G, Ḡ) from the correlated model with parameters (n, p, s). */
CM_API cm_status cm_sample_correlated(size_t n, double p, double s, uint64_t seed, cm_graph** g,
                                      cm_graph** g_bar, cm_bijection** pi_star);
/* p = n^-alpha, s = sqrt(lambda / (n p)). */
CM_API cm_status cm_params_from_lambda_alpha(size_t n, double lambda, double alpha, double* p,
                                             double* s);
CM_API cm_status cm_intersection_graph(const cm_graph* g, const cm_graph* g_bar,
                                       const cm_bijection* pi, cm_graph** out);

/* ---- analyses; results are JSON or CSV text --------------------------- */

/* Orbit census CSV ("length,kind,special,count"). `subset` may be NULL for
 * all pairs, else lists `subset_size` vertices. */
CM_API cm_status cm_orbit_census_csv(const cm_bijection* pi_star, const cm_bijection* pi,
                                     const uint32_t* subset, size_t subset_size, char** csv);

/* {"edges","vertices","density","subset":[...]} for the exact densest subgraph. */
CM_API cm_status cm_densest_subgraph_json(const cm_graph* g, char** json);

/* Admissibility report of `h` with default constants for (alpha, rho_hat);
 * `overrides_json` may be NULL or an object of constant overrides. */
CM_API cm_status cm_admissibility_json(const cm_graph* h, double alpha, double rho_hat,
                                       const char* overrides_json, char** json);

/* Estimator run on (G, Ḡ). `estimator` is "map" or "candidate_search";
 * `config_json` may be NULL or an estimator object (eta, rho_hat,
 * c_lambda_hat, delta, strategy, budget, restarts, seed). `truth` may be NULL.
 * The JSON carries the estimate and, with a truth, its overlap. */
CM_API cm_status cm_estimate_json(const cm_graph* g, const cm_graph* g_bar, double p, double s,
                                  const char* estimator, const char* config_json,
                                  const cm_bijection* truth, char** json);

/* Exact posterior CSV ("permutation,log_posterior,overlap_with_truth"), n <= 7. */
CM_API cm_status cm_posterior_csv(const cm_graph* g, const cm_graph* g_bar, double p, double s,
                                  const cm_bijection* truth, unsigned threads, char** csv);

/* {"exact": value or null, "mc": {"estimate","stderr"} or null}. Exact needs
 * n <= 4; Monte Carlo runs when mc_replicates > 0 and needs n <= 7. */
CM_API cm_status cm_tv_json(size_t n, double p, double s, size_t mc_replicates, uint64_t seed,
                            unsigned threads, char** json);

/* ---- experiments ------------------------------------------------------ */

/* Parses a versioned JSON config; unknown keys give CM_ERR_CONFIG. */
CM_API cm_status cm_config_parse(const char* json, cm_config** out);
CM_API cm_status cm_config_load(const char* path, cm_config** out);
CM_API cm_status cm_config_default(const char* experiment, cm_config** out);
CM_API cm_status cm_config_set_experiment(cm_config* cfg, const char* experiment);
CM_API cm_status cm_config_set_seed(cm_config* cfg, uint64_t seed);
CM_API cm_status cm_config_to_json(const cm_config* cfg, char** json);
/* Empty string when the config names no output path. */
CM_API cm_status cm_config_output(const cm_config* cfg, char** path);
CM_API void cm_config_free(cm_config* cfg);

/* Runs the configured experiment. The CSV goes to `csv_path` when non-NULL,
 * else into *csv (which may then not be NULL). *exit_code receives 0 or 2
 * (statistical-check failure); *summary_json a digest of the run. */
CM_API cm_status cm_run_experiment(const cm_config* cfg, unsigned threads, const char* csv_path,
                                   char** csv, int* exit_code, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* CORRMATCH_H */
