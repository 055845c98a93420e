#include "bcpgraph/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "bcpgraph/errors.hpp"
#include "bcpgraph/io.hpp"
#include "bcpgraph/rng.hpp"

namespace bcpg {

void SceneSpec::validate() const {
  if (rows < 1 || cols < 1) throw InvalidInputError("scene: zero dimension");
  if (static_cast<std::int64_t>(block_map.size()) != rows * cols) {
    throw InvalidInputError("scene: block map size mismatch");
  }
  if (!(sigma > 0.0)) throw InvalidInputError("scene: sigma must be positive");
  const std::int32_t k = static_cast<std::int32_t>(block_means.size());
  std::vector<char> seen(k, 0);
  for (std::int32_t id : block_map) {
    if (id < 0 || id >= k) throw InvalidInputError("scene: block id out of range");
    seen[id] = 1;
  }
  for (std::int32_t id = 0; id < k; ++id) {
    if (!seen[id]) throw InvalidInputError("scene: unused block id (ids must be dense)");
  }
}

std::vector<std::string> archetype_names() {
  return {"half-split", "quadrants", "island", "stripes", "checkerboard",
          "nested-square"};
}

SceneSpec make_archetype(const std::string& name, std::int64_t rows,
                         std::int64_t cols, double sigma) {
  SceneSpec s;
  s.name = name;
  s.rows = rows;
  s.cols = cols;
  s.sigma = sigma;
  s.block_map.assign(rows * cols, 0);
  auto at = [&](std::int64_t r, std::int64_t c) -> std::int32_t& {
    return s.block_map[r * cols + c];
  };
  if (name == "half-split") {
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) at(r, c) = c < cols / 2 ? 0 : 1;
    }
    s.block_means = {0.0, 3.0};
  } else if (name == "quadrants") {
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) {
        at(r, c) = static_cast<std::int32_t>((r < rows / 2 ? 0 : 2) +
                                             (c < cols / 2 ? 0 : 1));
      }
    }
    s.block_means = {0.0, 3.0, 6.0, 9.0};
  } else if (name == "island") {
    const std::int64_t r0 = rows / 2 - rows / 6, r1 = rows / 2 + rows / 6 + 1;
    const std::int64_t c0 = cols / 2 - cols / 6, c1 = cols / 2 + cols / 6 + 1;
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) {
        at(r, c) = (r >= r0 && r < r1 && c >= c0 && c < c1) ? 1 : 0;
      }
    }
    s.block_means = {0.0, 3.0};
  } else if (name == "stripes") {
    const std::int64_t height = std::max<std::int64_t>(1, rows / 5);
    std::int32_t max_id = 0;
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) {
        at(r, c) = static_cast<std::int32_t>(std::min<std::int64_t>(r / height, rows / height));
        max_id = std::max(max_id, at(r, c));
      }
    }
    s.block_means.resize(max_id + 1);
    for (std::int32_t i = 0; i <= max_id; ++i) s.block_means[i] = 3.0 * i;
  } else if (name == "checkerboard") {
    // Long-boundary stress scene: two interleaved blocks, every node active.
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) at(r, c) = (r + c) % 2;
    }
    s.block_means = {0.0, 3.0};
  } else if (name == "nested-square") {
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) {
        const std::int64_t dr = std::min(r, rows - 1 - r);
        const std::int64_t dc = std::min(c, cols - 1 - c);
        const std::int64_t depth = std::min(dr, dc);
        at(r, c) = depth >= rows / 3 ? 2 : (depth >= rows / 6 ? 1 : 0);
      }
    }
    s.block_means = {0.0, 3.0, 6.0};
  } else {
    throw InvalidInputError("unknown archetype: " + name);
  }
  s.validate();
  return s;
}

SimulatedScene simulate_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  SimulatedScene out;
  const std::int64_t n = spec.node_count();
  out.y.resize(n);
  out.truth.resize(n);
  std::mt19937_64 rng(seed);
  for (std::int64_t i = 0; i < n; ++i) {
    out.truth[i] = spec.block_means[spec.block_map[i]];
    out.y[i] = out.truth[i] + spec.sigma * normal01(rng);
  }
  return out;
}

MethodSpec method_by_name(const std::string& name) {
  if (name == "BCP-Graph-0") return {name, 1.0};
  if (name == "BCP-Graph-1") return {name, 0.0};
  throw InvalidInputError("unknown method: " + name +
                          " (expected BCP-Graph-0 or BCP-Graph-1)");
}

SweepOutcome run_experiment(const SweepRequest& request, const std::string& out_csv,
                            std::vector<ExperimentResult>* collect) {
  if (request.scenes.empty()) throw InvalidInputError("sweep: no scenes");
  if (request.alphas.empty()) throw InvalidInputError("sweep: no alphas");
  if (request.methods.empty()) throw InvalidInputError("sweep: no methods");
  if (request.replicates < 1) throw InvalidInputError("sweep: replicates < 1");

  struct Cell {
    std::size_t scene, alpha, method;
    int rep;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < request.scenes.size(); ++s) {
    for (std::size_t a = 0; a < request.alphas.size(); ++a) {
      for (std::size_t me = 0; me < request.methods.size(); ++me) {
        for (int r = 0; r < request.replicates; ++r) cells.push_back({s, a, me, r});
      }
    }
  }

  // One dataset per (scene, replicate), shared across alphas and methods so
  // per-replicate comparisons are paired.
  auto data_seed = [&](std::size_t scene, int rep) {
    return request.base_seed + 1000003ULL * scene + static_cast<std::uint64_t>(rep);
  };

  ResultsCsvWriter writer(out_csv);
  std::mutex collect_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<std::int64_t> written{0};
  std::vector<std::string> failures;
  std::mutex failures_mutex;

  // Graphs are shared read-only per scene.
  std::vector<Graph> graphs;
  graphs.reserve(request.scenes.size());
  for (const auto& scene : request.scenes) {
    graphs.push_back(Graph::grid(scene.rows, scene.cols, request.neighborhood));
  }

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const Cell& cell = cells[idx];
      const SceneSpec& scene = request.scenes[cell.scene];
      const MethodSpec& method = request.methods[cell.method];
      const std::uint64_t dseed = data_seed(cell.scene, cell.rep);
      try {
        const SimulatedScene sim = simulate_scene(scene, dseed);
        ModelConfig config = request.config;
        config.k = 0;
        config.alpha = request.alphas[cell.alpha];
        config.normalize();
        SamplerSchedule schedule = request.schedule;
        schedule.pseudo_app_fraction = method.pseudo_app_fraction;
        const std::uint64_t chain_seed = dseed ^ 0x9e3779b97f4a7c15ULL;
        const PosteriorSummary summary = fit_graph_regression(
            graphs[cell.scene], sim.y, {}, 0, config, schedule, chain_seed);
        ExperimentResult result;
        result.scene = scene.name;
        result.method = method.name;
        result.alpha = request.alphas[cell.alpha];
        result.seed = dseed;
        result.mse = evaluate_mse(summary.posterior_mean, sim.truth);
        result.runtime_s = summary.runtime_seconds;
        result.mean_blocks = summary.mean_blocks;
        writer.append(result);
        written.fetch_add(1);
        if (collect) {
          std::lock_guard<std::mutex> lock(collect_mutex);
          collect->push_back(result);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failures_mutex);
        failures.push_back(scene.name + "/" + method.name + "/alpha=" +
                           std::to_string(request.alphas[cell.alpha]) + "/rep=" +
                           std::to_string(cell.rep) + ": " + e.what());
      }
    }
  };

  int n_threads = request.n_threads > 0
                      ? request.n_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(cells.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepOutcome outcome;
  outcome.rows_written = written.load();
  outcome.failures = std::move(failures);
  return outcome;
}

}  // namespace bcpg
