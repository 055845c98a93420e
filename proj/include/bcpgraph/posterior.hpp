#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bcpgraph/graph.hpp"
#include "bcpgraph/likelihood.hpp"
#include "bcpgraph/partition.hpp"

namespace bcpg {

// Conditional expectation of w0 given data, partition and tau. Closed form
// (ratio of incomplete beta integrals) when the shapes allow; otherwise a
// direct quadrature of the w0 conditional, which is always valid.
double w0_star(double between, double w_tilde, std::int64_t b_eff,
               std::int64_t n_eff, double w0_limit);

// Block intercept estimate (1 - w0*) ybar_S + w0* ybar.
double intercept_estimate(double block_mean, double grand_mean, double w0star);

// (W~ + w0* B) / (n_eff - 3); caller must ensure n_eff > 3.
double sigma2_estimate(double w_tilde, double w0star, double between,
                       std::int64_t n_eff);

// Conditional expectations computed at one retained MCMC step.
struct StepEstimate {
  std::vector<double> fitted;    // n * m, node-major
  double sigma2 = 0.0;
  bool has_sigma2 = false;       // false when n_eff <= 3
  std::int64_t blocks = 1;
  std::vector<char> edge_diff;   // per graph edge: endpoints in different blocks
  std::vector<char> node_active; // per node: has a foreign neighbor
};

enum class SummaryMode { path, multivariate, graph };

// Aggregated posterior output of one fit.
struct PosteriorSummary {
  std::int64_t n = 0;
  std::int64_t m = 1;  // response dimensions
  SummaryMode mode = SummaryMode::graph;
  std::vector<double> posterior_mean;       // n * m
  std::vector<double> posterior_var;        // n * m, between-step variance
  std::vector<double> node_boundary_prob;   // n
  std::vector<Edge> edges;
  std::vector<double> edge_change_prob;     // parallel to edges
  std::vector<double> cp_prob;              // path modes: size n, [0] = NaN
  std::vector<std::int32_t> modal_membership;  // graph mode
  std::vector<std::int32_t> block_trace;       // retained block counts
  double mean_blocks = 0.0;
  double sigma2_mean = 0.0;
  bool has_sigma2 = false;
  double runtime_seconds = 0.0;
  std::int64_t retained_steps = 0;
  std::int64_t wtilde_clamp_count = 0;
  std::int64_t jitter_count = 0;
};

// Streaming aggregation over retained steps; deterministic fold, order
// independent for the mean/variance fields.
class PosteriorAccumulator {
 public:
  PosteriorAccumulator(std::int64_t n, std::int64_t m, std::int64_t n_edges,
                       int membership_thin = 10);

  void add(const StepEstimate& step,
           const std::vector<std::int32_t>* membership = nullptr);
  PosteriorSummary finish(SummaryMode mode, std::vector<Edge> edges) const;

  std::int64_t steps() const { return steps_; }

 private:
  std::int64_t n_, m_;
  int thin_;
  std::int64_t steps_ = 0;
  std::vector<double> sum_fit_, sum_fit_sq_;
  std::vector<std::int64_t> active_count_;
  std::vector<std::int64_t> edge_count_;
  std::vector<std::int32_t> block_trace_;
  double sigma2_sum_ = 0.0;
  std::int64_t sigma2_steps_ = 0;
  // Modal partition over thinned canonical snapshots.
  struct ModalEntry {
    std::int64_t count = 0;
    std::int64_t first_seen = 0;
  };
  std::vector<std::vector<std::int32_t>> modal_keys_;
  std::vector<ModalEntry> modal_entries_;
};

// Expectations for the graph sampler's state. q_credit is the cached
// regression credit sum (so W~ need not be recomputed). When rng is given,
// blocks with a singular design get fresh jitter for this calculation.
StepEstimate step_expectations(const Partition& partition, const Dataset& data,
                               const WVector& w, const ModelConfig& config,
                               const Graph& graph, double q_credit,
                               std::mt19937_64* rng = nullptr,
                               DegenerateCounters* counters = nullptr);

// One-call aggregation of a step sequence (tests and small studies; the
// samplers stream through PosteriorAccumulator with the same arithmetic).
PosteriorSummary aggregate(const std::vector<StepEstimate>& steps,
                           const Graph& graph, SummaryMode mode);

// Mean squared error against the true per-node means.
double evaluate_mse(std::span<const double> estimate, std::span<const double> truth);

}  // namespace bcpg
