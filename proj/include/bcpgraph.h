/* C interface to the change point analysis core. All entry points return a
 * status code; on failure bcpg_last_error() describes the problem for the
 * calling thread. Handles are opaque and freed with the matching _destroy. */

#ifndef BCPGRAPH_H
#define BCPGRAPH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bcpg_status {
  BCPG_OK = 0,
  BCPG_ERROR_INVALID_ARGUMENT = 1,
  BCPG_ERROR_NUMERIC = 2,
  BCPG_ERROR_IO = 3,
  BCPG_ERROR_INTERNAL = 4
} bcpg_status;

typedef struct bcpg_graph bcpg_graph;
typedef struct bcpg_config bcpg_config;
typedef struct bcpg_result bcpg_result;
typedef struct bcpg_scene bcpg_scene;

const char* bcpg_version(void);
/* Message of the last failure on this thread; empty string if none. */
const char* bcpg_last_error(void);

/* ---- graphs ---- */
bcpg_status bcpg_graph_create_path(int64_t n, bcpg_graph** out);
/* neighborhood: 4 or 8 */
bcpg_status bcpg_graph_create_grid(int64_t rows, int64_t cols, int neighborhood,
                                   bcpg_graph** out);
bcpg_status bcpg_graph_create_mst(const double* x, const double* y, int64_t n,
                                  bcpg_graph** out);
bcpg_status bcpg_graph_create_from_edges(int64_t n, const int64_t* from,
                                         const int64_t* to, int64_t n_edges,
                                         bcpg_graph** out);
bcpg_status bcpg_graph_load_edge_csv(const char* path, bcpg_graph** out);
bcpg_status bcpg_graph_load_coords_csv(const char* path, bcpg_graph** out);
void bcpg_graph_destroy(bcpg_graph* graph);
int64_t bcpg_graph_node_count(const bcpg_graph* graph);
int64_t bcpg_graph_edge_count(const bcpg_graph* graph);
/* Fills from/to with edge_count entries each. */
bcpg_status bcpg_graph_edges(const bcpg_graph* graph, int64_t* from, int64_t* to);

/* ---- configuration ---- */
bcpg_config* bcpg_config_create(void); /* defaults as documented in README */
void bcpg_config_destroy(bcpg_config* config);
bcpg_status bcpg_config_set_alpha(bcpg_config* config, double alpha);
bcpg_status bcpg_config_set_d(bcpg_config* config, double d);
bcpg_status bcpg_config_set_p0(bcpg_config* config, double p0);
/* limits = (w0', ..., wk'), len = k + 1 */
bcpg_status bcpg_config_set_w_limits(bcpg_config* config, const double* limits,
                                     int64_t len);
bcpg_status bcpg_config_set_steps(bcpg_config* config, int64_t steps);
bcpg_status bcpg_config_set_discard(bcpg_config* config, int64_t discard);
bcpg_status bcpg_config_set_burn_in_fpp(bcpg_config* config, int64_t burn_in);
bcpg_status bcpg_config_set_pass_mix(bcpg_config* config, int fpp, int app,
                                     int merge, int w);
bcpg_status bcpg_config_set_pseudo_app_fraction(bcpg_config* config,
                                                double fraction);

/* ---- fits ---- */
bcpg_status bcpg_fit_path(const double* y, int64_t n, const bcpg_config* config,
                          uint64_t seed, bcpg_result** out);
/* y is row-major n x m */
bcpg_status bcpg_fit_multivariate(const double* y, int64_t n, int64_t m,
                                  const bcpg_config* config, uint64_t seed,
                                  bcpg_result** out);
/* x is row-major n x k, or NULL when k = 0 */
bcpg_status bcpg_fit_graph(const bcpg_graph* graph, const double* y,
                           const double* x, int64_t k, const bcpg_config* config,
                           uint64_t seed, bcpg_result** out);

/* ---- results ---- */
void bcpg_result_destroy(bcpg_result* result);
int64_t bcpg_result_node_count(const bcpg_result* result);
int64_t bcpg_result_dim_count(const bcpg_result* result);
int64_t bcpg_result_edge_count(const bcpg_result* result);
/* Buffers sized node_count * dim_count. */
bcpg_status bcpg_result_posterior_mean(const bcpg_result* result, double* out);
bcpg_status bcpg_result_posterior_var(const bcpg_result* result, double* out);
/* Buffer sized node_count. */
bcpg_status bcpg_result_node_boundary_prob(const bcpg_result* result, double* out);
/* Path modes only: buffer sized node_count; entry 0 is NaN (not applicable). */
bcpg_status bcpg_result_cp_prob(const bcpg_result* result, double* out);
/* Buffer sized edge_count. */
bcpg_status bcpg_result_edge_change_prob(const bcpg_result* result, double* out);
/* Graph mode: most frequent membership pattern among thinned snapshots. */
bcpg_status bcpg_result_modal_partition(const bcpg_result* result, int64_t* out);
double bcpg_result_mean_blocks(const bcpg_result* result);
double bcpg_result_runtime_seconds(const bcpg_result* result);
int bcpg_result_has_sigma2(const bcpg_result* result);
double bcpg_result_sigma2(const bcpg_result* result);
int64_t bcpg_result_retained_steps(const bcpg_result* result);
int64_t bcpg_result_wtilde_clamp_count(const bcpg_result* result);
int64_t bcpg_result_jitter_count(const bcpg_result* result);
/* Per-node posterior CSV, written atomically. */
bcpg_status bcpg_result_write_posterior_csv(const bcpg_result* result,
                                            const char* path);

/* ---- scenes and the simulation harness ---- */
bcpg_status bcpg_scene_create_archetype(const char* name, int64_t rows,
                                        int64_t cols, double sigma,
                                        bcpg_scene** out);
bcpg_status bcpg_scene_create(const char* name, int64_t rows, int64_t cols,
                              const int32_t* block_map, const double* block_means,
                              int64_t n_blocks, double sigma, bcpg_scene** out);
bcpg_status bcpg_scene_load(const char* csv_path, bcpg_scene** out);
bcpg_status bcpg_scene_save(const bcpg_scene* scene, const char* csv_path);
void bcpg_scene_destroy(bcpg_scene* scene);
int64_t bcpg_scene_node_count(const bcpg_scene* scene);
/* y/truth buffers sized node_count. */
bcpg_status bcpg_scene_simulate(const bcpg_scene* scene, uint64_t seed, double* y,
                                double* truth);

bcpg_status bcpg_evaluate_mse(const double* estimate, const double* truth,
                              int64_t n, double* out);

/* Full factorial sweep streamed to CSV. methods: 0 = BCP-Graph-0 (pseudo
 * APPs), 1 = BCP-Graph-1 (original APPs). n_threads 0 picks the hardware
 * count. failures_out (optional) receives the number of failed cells. */
bcpg_status bcpg_sweep_run(const bcpg_scene* const* scenes, int64_t n_scenes,
                           const double* alphas, int64_t n_alphas,
                           const int* methods, int64_t n_methods,
                           int64_t replicates, const bcpg_config* config,
                           uint64_t base_seed, const char* out_csv,
                           int n_threads, int64_t* failures_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BCPGRAPH_H */
