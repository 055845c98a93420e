#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcpgraph/models.hpp"

namespace bcpg {

// A true grid scene: per-cell block ids, block means and the noise level.
struct SceneSpec {
  std::string name;
  std::int64_t rows = 0, cols = 0;
  std::vector<std::int32_t> block_map;  // row-major, dense ids 0..K-1
  std::vector<double> block_means;
  double sigma = 1.0;

  std::int64_t node_count() const { return rows * cols; }
  void validate() const;
};

// Built-in archetypes: half-split, quadrants, island, stripes, checkerboard,
// nested-square.
SceneSpec make_archetype(const std::string& name, std::int64_t rows,
                         std::int64_t cols, double sigma);
std::vector<std::string> archetype_names();

struct SimulatedScene {
  std::vector<double> y;
  std::vector<double> truth;
};
SimulatedScene simulate_scene(const SceneSpec& spec, std::uint64_t seed);

struct ExperimentResult {
  std::string scene;
  std::string method;  // BCP-Graph-0 or BCP-Graph-1
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double runtime_s = 0.0;
  double mean_blocks = 0.0;
};

struct MethodSpec {
  std::string name;
  double pseudo_app_fraction = 1.0;
};
// The paper's two variants: BCP-Graph-0 runs pseudo APPs, BCP-Graph-1 the
// original APPs.
MethodSpec method_by_name(const std::string& name);

struct SweepRequest {
  std::vector<SceneSpec> scenes;
  std::vector<double> alphas;
  std::vector<MethodSpec> methods;
  int replicates = 10;
  ModelConfig config;         // alpha overridden per cell
  SamplerSchedule schedule;   // pseudo fraction overridden per method
  std::uint64_t base_seed = 1;
  Neighborhood neighborhood = Neighborhood::eight;
  int n_threads = 0;          // 0: hardware concurrency
};

struct SweepOutcome {
  std::int64_t rows_written = 0;
  std::vector<std::string> failures;
};

// Full factorial sweep; each finished cell is appended to the CSV (header
// scene,method,alpha,seed,mse,runtime_s,mean_blocks) and flushed, so an
// interrupted sweep leaves a valid partial file. Replicate r of a scene uses
// one simulated dataset shared across all alphas and methods.
SweepOutcome run_experiment(const SweepRequest& request, const std::string& out_csv,
                            std::vector<ExperimentResult>* collect = nullptr);

}  // namespace bcpg
