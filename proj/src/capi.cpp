#include "bcpgraph.h"

#include <cstring>
#include <string>
#include <vector>

#include "bcpgraph/errors.hpp"
#include "bcpgraph/harness.hpp"
#include "bcpgraph/io.hpp"
#include "bcpgraph/models.hpp"

namespace {

thread_local std::string g_last_error;

bcpg_status fail(bcpg_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <typename Fn>
bcpg_status guarded(Fn&& fn) {
  try {
    fn();
    return BCPG_OK;
  } catch (const bcpg::InvalidInputError& e) {
    return fail(BCPG_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const bcpg::IoError& e) {
    return fail(BCPG_ERROR_IO, e.what());
  } catch (const bcpg::NumericError& e) {
    return fail(BCPG_ERROR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(BCPG_ERROR_INTERNAL, e.what());
  }
}

bcpg_status require(bool ok, const char* what) {
  return ok ? BCPG_OK : fail(BCPG_ERROR_INVALID_ARGUMENT, what);
}

}  // namespace

struct bcpg_graph {
  bcpg::Graph graph;
};

struct bcpg_config {
  bcpg::ModelConfig model;
  bcpg::SamplerSchedule schedule;
};

struct bcpg_result {
  bcpg::PosteriorSummary summary;
  std::vector<double> y;  // input responses, node-major n*m
};

struct bcpg_scene {
  bcpg::SceneSpec spec;
};

extern "C" {

const char* bcpg_version(void) { return "1.0.0"; }

const char* bcpg_last_error(void) { return g_last_error.c_str(); }

bcpg_status bcpg_graph_create_path(int64_t n, bcpg_graph** out) {
  if (bcpg_status s = require(out != nullptr, "null output pointer")) return s;
  return guarded([&] { *out = new bcpg_graph{bcpg::Graph::path(n)}; });
}

bcpg_status bcpg_graph_create_grid(int64_t rows, int64_t cols, int neighborhood,
                                   bcpg_graph** out) {
  if (bcpg_status s = require(out != nullptr, "null output pointer")) return s;
  if (bcpg_status s = require(neighborhood == 4 || neighborhood == 8,
                              "neighborhood must be 4 or 8")) {
    return s;
  }
  return guarded([&] {
    *out = new bcpg_graph{bcpg::Graph::grid(rows, cols,
                                            neighborhood == 4
                                                ? bcpg::Neighborhood::four
                                                : bcpg::Neighborhood::eight)};
  });
}

bcpg_status bcpg_graph_create_mst(const double* x, const double* y, int64_t n,
                                  bcpg_graph** out) {
  if (bcpg_status s = require(out && x && y, "null pointer argument")) return s;
  return guarded([&] {
    *out = new bcpg_graph{bcpg::Graph::mst_from_coords(
        {x, static_cast<std::size_t>(n)}, {y, static_cast<std::size_t>(n)})};
  });
}

bcpg_status bcpg_graph_create_from_edges(int64_t n, const int64_t* from,
                                         const int64_t* to, int64_t n_edges,
                                         bcpg_graph** out) {
  if (bcpg_status s = require(out && (n_edges == 0 || (from && to)),
                              "null pointer argument")) {
    return s;
  }
  return guarded([&] {
    std::vector<bcpg::Edge> edges;
    edges.reserve(n_edges);
    for (int64_t e = 0; e < n_edges; ++e) {
      edges.emplace_back(static_cast<int32_t>(from[e]), static_cast<int32_t>(to[e]));
    }
    *out = new bcpg_graph{bcpg::Graph::from_edge_list(n, edges)};
  });
}

bcpg_status bcpg_graph_load_edge_csv(const char* path, bcpg_graph** out) {
  if (bcpg_status s = require(out && path, "null pointer argument")) return s;
  return guarded([&] { *out = new bcpg_graph{bcpg::load_edge_list_csv(path)}; });
}

bcpg_status bcpg_graph_load_coords_csv(const char* path, bcpg_graph** out) {
  if (bcpg_status s = require(out && path, "null pointer argument")) return s;
  return guarded([&] { *out = new bcpg_graph{bcpg::load_coords_csv_as_mst(path)}; });
}

void bcpg_graph_destroy(bcpg_graph* graph) { delete graph; }

int64_t bcpg_graph_node_count(const bcpg_graph* graph) {
  return graph ? graph->graph.node_count() : 0;
}

int64_t bcpg_graph_edge_count(const bcpg_graph* graph) {
  return graph ? graph->graph.edge_count() : 0;
}

bcpg_status bcpg_graph_edges(const bcpg_graph* graph, int64_t* from, int64_t* to) {
  if (bcpg_status s = require(graph && from && to, "null pointer argument")) return s;
  const auto& edges = graph->graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    from[e] = edges[e].first;
    to[e] = edges[e].second;
  }
  return BCPG_OK;
}

bcpg_config* bcpg_config_create(void) { return new bcpg_config{}; }

void bcpg_config_destroy(bcpg_config* config) { delete config; }

#define BCPG_CONFIG_SETTER(expr)                                         \
  if (bcpg_status s = require(config != nullptr, "null config")) return s; \
  return guarded([&] { expr; })

bcpg_status bcpg_config_set_alpha(bcpg_config* config, double alpha) {
  BCPG_CONFIG_SETTER(config->model.alpha = alpha);
}
bcpg_status bcpg_config_set_d(bcpg_config* config, double d) {
  BCPG_CONFIG_SETTER(config->model.d = d);
}
bcpg_status bcpg_config_set_p0(bcpg_config* config, double p0) {
  BCPG_CONFIG_SETTER(config->model.p0 = p0);
}
bcpg_status bcpg_config_set_w_limits(bcpg_config* config, const double* limits,
                                     int64_t len) {
  if (bcpg_status s = require(config && limits && len >= 1, "bad w limits")) return s;
  return guarded([&] { config->model.w_limits.assign(limits, limits + len); });
}
bcpg_status bcpg_config_set_steps(bcpg_config* config, int64_t steps) {
  BCPG_CONFIG_SETTER(config->schedule.steps = steps);
}
bcpg_status bcpg_config_set_discard(bcpg_config* config, int64_t discard) {
  BCPG_CONFIG_SETTER(config->schedule.discard = discard);
}
bcpg_status bcpg_config_set_burn_in_fpp(bcpg_config* config, int64_t burn_in) {
  BCPG_CONFIG_SETTER(config->schedule.burn_in_fpp = burn_in);
}
bcpg_status bcpg_config_set_pass_mix(bcpg_config* config, int fpp, int app,
                                     int merge, int w) {
  BCPG_CONFIG_SETTER({
    config->schedule.fpp_per_step = fpp;
    config->schedule.app_per_step = app;
    config->schedule.merge_per_step = merge;
    config->schedule.w_per_step = w;
  });
}
bcpg_status bcpg_config_set_pseudo_app_fraction(bcpg_config* config,
                                                double fraction) {
  BCPG_CONFIG_SETTER(config->schedule.pseudo_app_fraction = fraction);
}

#undef BCPG_CONFIG_SETTER

bcpg_status bcpg_fit_path(const double* y, int64_t n, const bcpg_config* config,
                          uint64_t seed, bcpg_result** out) {
  if (bcpg_status s = require(y && config && out, "null pointer argument")) return s;
  return guarded([&] {
    auto* r = new bcpg_result{};
    r->y.assign(y, y + n);
    r->summary = bcpg::fit_classical_path({y, static_cast<std::size_t>(n)},
                                          config->model, config->schedule, seed);
    *out = r;
  });
}

bcpg_status bcpg_fit_multivariate(const double* y, int64_t n, int64_t m,
                                  const bcpg_config* config, uint64_t seed,
                                  bcpg_result** out) {
  if (bcpg_status s = require(y && config && out, "null pointer argument")) return s;
  return guarded([&] {
    auto* r = new bcpg_result{};
    r->y.assign(y, y + n * m);
    r->summary = bcpg::fit_multivariate_path({y, static_cast<std::size_t>(n * m)},
                                             n, m, config->model, config->schedule,
                                             seed);
    *out = r;
  });
}

bcpg_status bcpg_fit_graph(const bcpg_graph* graph, const double* y,
                           const double* x, int64_t k, const bcpg_config* config,
                           uint64_t seed, bcpg_result** out) {
  if (bcpg_status s = require(graph && y && config && out && (k == 0 || x),
                              "null pointer argument")) {
    return s;
  }
  return guarded([&] {
    const int64_t n = graph->graph.node_count();
    auto* r = new bcpg_result{};
    r->y.assign(y, y + n);
    r->summary = bcpg::fit_graph_regression(
        graph->graph, {y, static_cast<std::size_t>(n)},
        {x, static_cast<std::size_t>(n * k)}, static_cast<int>(k), config->model,
        config->schedule, seed);
    *out = r;
  });
}

void bcpg_result_destroy(bcpg_result* result) { delete result; }

int64_t bcpg_result_node_count(const bcpg_result* r) { return r ? r->summary.n : 0; }
int64_t bcpg_result_dim_count(const bcpg_result* r) { return r ? r->summary.m : 0; }
int64_t bcpg_result_edge_count(const bcpg_result* r) {
  return r ? static_cast<int64_t>(r->summary.edges.size()) : 0;
}

namespace {
bcpg_status copy_out(const std::vector<double>& src, double* out) {
  if (bcpg_status s = require(out != nullptr, "null output buffer")) return s;
  std::memcpy(out, src.data(), src.size() * sizeof(double));
  return BCPG_OK;
}
}  // namespace

bcpg_status bcpg_result_posterior_mean(const bcpg_result* r, double* out) {
  if (bcpg_status s = require(r != nullptr, "null result")) return s;
  return copy_out(r->summary.posterior_mean, out);
}
bcpg_status bcpg_result_posterior_var(const bcpg_result* r, double* out) {
  if (bcpg_status s = require(r != nullptr, "null result")) return s;
  return copy_out(r->summary.posterior_var, out);
}
bcpg_status bcpg_result_node_boundary_prob(const bcpg_result* r, double* out) {
  if (bcpg_status s = require(r != nullptr, "null result")) return s;
  return copy_out(r->summary.node_boundary_prob, out);
}
bcpg_status bcpg_result_cp_prob(const bcpg_result* r, double* out) {
  if (bcpg_status s = require(r != nullptr, "null result")) return s;
  if (bcpg_status s = require(!r->summary.cp_prob.empty(),
                              "cp_prob is only available in path modes")) {
    return s;
  }
  return copy_out(r->summary.cp_prob, out);
}
bcpg_status bcpg_result_edge_change_prob(const bcpg_result* r, double* out) {
  if (bcpg_status s = require(r != nullptr, "null result")) return s;
  return copy_out(r->summary.edge_change_prob, out);
}
bcpg_status bcpg_result_modal_partition(const bcpg_result* r, int64_t* out) {
  if (bcpg_status s = require(r && out, "null pointer argument")) return s;
  if (bcpg_status s = require(!r->summary.modal_membership.empty(),
                              "modal partition is only tracked in graph mode")) {
    return s;
  }
  for (std::size_t i = 0; i < r->summary.modal_membership.size(); ++i) {
    out[i] = r->summary.modal_membership[i];
  }
  return BCPG_OK;
}
double bcpg_result_mean_blocks(const bcpg_result* r) {
  return r ? r->summary.mean_blocks : 0.0;
}
double bcpg_result_runtime_seconds(const bcpg_result* r) {
  return r ? r->summary.runtime_seconds : 0.0;
}
int bcpg_result_has_sigma2(const bcpg_result* r) {
  return r && r->summary.has_sigma2 ? 1 : 0;
}
double bcpg_result_sigma2(const bcpg_result* r) {
  return r ? r->summary.sigma2_mean : 0.0;
}
int64_t bcpg_result_retained_steps(const bcpg_result* r) {
  return r ? r->summary.retained_steps : 0;
}
int64_t bcpg_result_wtilde_clamp_count(const bcpg_result* r) {
  return r ? r->summary.wtilde_clamp_count : 0;
}
int64_t bcpg_result_jitter_count(const bcpg_result* r) {
  return r ? r->summary.jitter_count : 0;
}

bcpg_status bcpg_result_write_posterior_csv(const bcpg_result* r, const char* path) {
  if (bcpg_status s = require(r && path, "null pointer argument")) return s;
  return guarded([&] { bcpg::write_posterior_csv(r->summary, r->y, path); });
}

bcpg_status bcpg_scene_create_archetype(const char* name, int64_t rows,
                                        int64_t cols, double sigma,
                                        bcpg_scene** out) {
  if (bcpg_status s = require(name && out, "null pointer argument")) return s;
  return guarded([&] {
    *out = new bcpg_scene{bcpg::make_archetype(name, rows, cols, sigma)};
  });
}

bcpg_status bcpg_scene_create(const char* name, int64_t rows, int64_t cols,
                              const int32_t* block_map, const double* block_means,
                              int64_t n_blocks, double sigma, bcpg_scene** out) {
  if (bcpg_status s = require(name && block_map && block_means && out,
                              "null pointer argument")) {
    return s;
  }
  return guarded([&] {
    bcpg::SceneSpec spec;
    spec.name = name;
    spec.rows = rows;
    spec.cols = cols;
    spec.block_map.assign(block_map, block_map + rows * cols);
    spec.block_means.assign(block_means, block_means + n_blocks);
    spec.sigma = sigma;
    spec.validate();
    *out = new bcpg_scene{std::move(spec)};
  });
}

bcpg_status bcpg_scene_load(const char* csv_path, bcpg_scene** out) {
  if (bcpg_status s = require(csv_path && out, "null pointer argument")) return s;
  return guarded([&] { *out = new bcpg_scene{bcpg::load_scene(csv_path)}; });
}

bcpg_status bcpg_scene_save(const bcpg_scene* scene, const char* csv_path) {
  if (bcpg_status s = require(scene && csv_path, "null pointer argument")) return s;
  return guarded([&] { bcpg::save_scene(scene->spec, csv_path); });
}

void bcpg_scene_destroy(bcpg_scene* scene) { delete scene; }

int64_t bcpg_scene_node_count(const bcpg_scene* scene) {
  return scene ? scene->spec.node_count() : 0;
}

bcpg_status bcpg_scene_simulate(const bcpg_scene* scene, uint64_t seed, double* y,
                                double* truth) {
  if (bcpg_status s = require(scene && y && truth, "null pointer argument")) return s;
  return guarded([&] {
    const bcpg::SimulatedScene sim = bcpg::simulate_scene(scene->spec, seed);
    std::memcpy(y, sim.y.data(), sim.y.size() * sizeof(double));
    std::memcpy(truth, sim.truth.data(), sim.truth.size() * sizeof(double));
  });
}

bcpg_status bcpg_evaluate_mse(const double* estimate, const double* truth,
                              int64_t n, double* out) {
  if (bcpg_status s = require(estimate && truth && out, "null pointer argument")) {
    return s;
  }
  return guarded([&] {
    *out = bcpg::evaluate_mse({estimate, static_cast<std::size_t>(n)},
                              {truth, static_cast<std::size_t>(n)});
  });
}

bcpg_status bcpg_sweep_run(const bcpg_scene* const* scenes, int64_t n_scenes,
                           const double* alphas, int64_t n_alphas,
                           const int* methods, int64_t n_methods,
                           int64_t replicates, const bcpg_config* config,
                           uint64_t base_seed, const char* out_csv,
                           int n_threads, int64_t* failures_out) {
  if (bcpg_status s = require(scenes && alphas && methods && config && out_csv,
                              "null pointer argument")) {
    return s;
  }
  return guarded([&] {
    bcpg::SweepRequest request;
    for (int64_t i = 0; i < n_scenes; ++i) request.scenes.push_back(scenes[i]->spec);
    request.alphas.assign(alphas, alphas + n_alphas);
    for (int64_t i = 0; i < n_methods; ++i) {
      request.methods.push_back(bcpg::method_by_name(
          methods[i] == 0 ? "BCP-Graph-0" : "BCP-Graph-1"));
    }
    request.replicates = static_cast<int>(replicates);
    request.config = config->model;
    request.schedule = config->schedule;
    request.base_seed = base_seed;
    request.n_threads = n_threads;
    const bcpg::SweepOutcome outcome = bcpg::run_experiment(request, out_csv);
    if (failures_out) *failures_out = static_cast<int64_t>(outcome.failures.size());
  });
}

}  // extern "C"
