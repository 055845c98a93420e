#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bcpgraph/likelihood.hpp"
#include "bcpgraph/posterior.hpp"
#include "bcpgraph/sampler.hpp"

namespace bcpg {

enum class FitMode { path, multivariate, graph };

// Mode, graph and data brought together for dispatch (the CLI's view).
struct ProblemSpec {
  FitMode mode = FitMode::graph;
  const Graph* graph = nullptr;
  const Dataset* dataset = nullptr;
  ModelConfig config;
  SamplerSchedule schedule;
};

// Observer for the path chain: called with the break flags (entry p is 1 when
// position p starts a block; entry 0 is always 1) after each retained sweep.
using BreakObserver = std::function<void(const std::vector<char>&)>;

// Classical change point analysis on sequential data: Gibbs sweeps over
// break/no-break at every position, with the sequential-data partition prior
// int_0^{p0} p^(b-1) (1-p)^(n-b) dp. Equivalent to the multivariate fit with
// a single dimension.
PosteriorSummary fit_classical_path(std::span<const double> y,
                                    const ModelConfig& config,
                                    const SamplerSchedule& schedule,
                                    std::uint64_t seed,
                                    const BreakObserver& observer = {});

// Multivariate sequential change points via the one-way ANOVA reduction:
// a shared partition, per-dimension means, pooled error variance, no tau
// sampling. Y is row-major n x m.
PosteriorSummary fit_multivariate_path(std::span<const double> y_flat,
                                       std::int64_t n, std::int64_t m,
                                       const ModelConfig& config,
                                       const SamplerSchedule& schedule,
                                       std::uint64_t seed,
                                       const BreakObserver& observer = {});

// Full regression change point analysis on a connected graph. x_flat is
// row-major n x k (empty for k = 0).
PosteriorSummary fit_graph_regression(const Graph& graph,
                                      std::span<const double> y,
                                      std::span<const double> x_flat, int k,
                                      ModelConfig config,
                                      const SamplerSchedule& schedule,
                                      std::uint64_t seed,
                                      const StepObserver& observer = {});

// Exponent bookkeeping for the multivariate reduction: m copies of the
// intercept-only likelihood with per-dimension grand means integrated out
// give the univariate formulas evaluated at these effective counts.
inline std::int64_t multivariate_b_eff(std::int64_t b, std::int64_t m) {
  return m * (b - 1) + 1;
}
inline std::int64_t multivariate_n_eff(std::int64_t n, std::int64_t m) {
  return m * (n - 1) + 1;
}

}  // namespace bcpg
