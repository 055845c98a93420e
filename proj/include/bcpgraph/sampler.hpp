#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "bcpgraph/graph.hpp"
#include "bcpgraph/likelihood.hpp"
#include "bcpgraph/partition.hpp"
#include "bcpgraph/posterior.hpp"

namespace bcpg {

// Pass mix and burn-in schedule. The defaults reproduce 100 discarded full
// pixel passes followed by steps of 1 FPP, 20 APPs, 1 block merge pass and
// 1 w-pass, with the first `discard` steps dropped.
struct SamplerSchedule {
  std::int64_t burn_in_fpp = 100;
  std::int64_t steps = 2000;
  std::int64_t discard = 1000;
  int fpp_per_step = 1;
  int app_per_step = 20;
  int merge_per_step = 1;
  int w_per_step = 1;
  double pseudo_app_fraction = 1.0;  // share of APPs run as pseudo-APPs
  bool random_visit_order = false;
  bool app_island_new_block = false;
  int membership_thin = 10;  // snapshot stride for the modal partition

  void validate() const;
};

// Cached per-block likelihood pieces owned by the chain.
struct BlockTermCache {
  double tau_term = 0.0;
  double q = 0.0;
  double logdet = 0.0;
};

// Everything one chain mutates: the partition, the error-to-signal ratios,
// the RNG stream and the cached aggregates behind incremental evaluation.
struct McmcState {
  Partition partition;
  WVector w;
  std::mt19937_64 rng;
  std::int64_t step_index = 0;

  std::map<std::int32_t, BlockTermCache> cache;
  double tau_prior_sum = 0.0;
  double q_sum = 0.0;
  double logdet_sum = 0.0;
  std::int64_t boundary_len = 0;
  std::vector<double> path_prior_table;  // filled when rho_prior == path_beta
  DegenerateCounters counters;

  McmcState(const Dataset& data, const Graph& graph, const ModelConfig& config,
            std::uint64_t seed);

  // Rebuild every cached aggregate from the partition (exact).
  void refresh(const Dataset& data, const Graph& graph, const ModelConfig& config);
  // Log joint assembled from the cached aggregates.
  double cached_log_joint(const Dataset& data, const ModelConfig& config);
};

// One Gibbs sweep over all nodes: each node may join any live block, stay,
// or open a new block, with tau of the affected blocks resampled jointly.
void full_pixel_pass(McmcState& state, const Dataset& data, const Graph& graph,
                     const ModelConfig& config,
                     const SamplerSchedule& schedule = {});

// Sweep over the nodes active at pass start. Original variant: island nodes
// may only move to blocks containing none of their neighbors. Pseudo variant:
// islands are treated like any other active node.
void active_pixel_pass(McmcState& state, const Dataset& data, const Graph& graph,
                       const ModelConfig& config, bool pseudo,
                       const SamplerSchedule& schedule = {});

// For each block in id order, Gibbs-choose between keeping it and merging it
// into another live block with equal tau.
void block_merge_pass(McmcState& state, const Dataset& data, const Graph& graph,
                      const ModelConfig& config);

// Metropolis-within-Gibbs update of w_l for l = 1..k with independent
// uniform proposals on (0, w_l'). No-op when k = 0.
void w_pass(McmcState& state, const Dataset& data, const ModelConfig& config);

using StepObserver = std::function<void(const McmcState&)>;

// Burn-in FPPs, then `steps` scheduled steps; posterior expectations are
// accumulated after every retained step. Deterministic given the seed.
PosteriorSummary run_chain(const Dataset& data, const Graph& graph,
                           const ModelConfig& config,
                           const SamplerSchedule& schedule, std::uint64_t seed,
                           const StepObserver& observer = {});

}  // namespace bcpg
