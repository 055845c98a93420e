#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bcpgraph/graph.hpp"
#include "bcpgraph/partition.hpp"

namespace bcpg {

enum class RhoPrior { graph_alpha, path_beta };

// Model hyperparameters. w_limits holds (w0', ..., wk'); entries default to
// 0.2, which works well in most settings.
struct ModelConfig {
  int k = 0;
  double alpha = 0.1;                // boundary penalty, graph prior
  std::vector<double> w_limits;      // size k+1 once validated
  double d = 10.0;                   // tau prior weight
  double p0 = 0.2;                   // path prior upper limit
  RhoPrior rho_prior = RhoPrior::graph_alpha;

  double w_limit(int j) const {
    return j < static_cast<int>(w_limits.size()) ? w_limits[j] : 0.2;
  }
  void validate() const;
  // Fills w_limits to size k+1 with the 0.2 default.
  void normalize();
};

// Error-to-signal ratios (w0, ..., wk), each in (0, wj').
struct WVector {
  std::vector<double> w;

  static WVector midpoint(const ModelConfig& config);
};

struct DegenerateCounters {
  std::int64_t wtilde_clamps = 0;
  std::int64_t jitter_events = 0;
};

// log P(tau_S = tau | n_S). For k = 0 the regression switch is vacuous:
// tau = 0 has probability one.
double log_tau_prior(int tau, std::int64_t n_s, int k, double d);

// l(rho) * log(alpha), unnormalized.
double log_rho_prior_graph(std::int64_t boundary_len, double alpha);

// log int_0^{p0} p^(b-1) (1-p)^(n-b) dp, the sequential-data partition prior.
double log_rho_prior_path(std::int64_t b, std::int64_t n, double p0);

// Diagonal of Z_S: entry 0 is (1-w0)/(n_S w0), entry j is (1-wj)/(V_Sjj wj).
// Throws SingularDesignError when some V_Sjj is numerically zero.
std::vector<double> zs_diag(const WVector& w, std::int64_t n_s,
                            const std::vector<double>& v_diag);

// Posterior mean of the slope coefficients given tau_S = 1: solves
// (V_S + diag(V_Sjj wj/(1-wj))) beta = sxy, the centered reduction of the
// full (k+1)-dimensional ridge system.
std::vector<double> beta_hat(const BlockStats& block, const WVector& w);

// Regression credit q = beta_hat' (XtX + Zinv)_(-1,-1) beta_hat and
// log det (XtX Z + I)_(-1,-1) for one full-model block.
struct BlockCredit {
  double q = 0.0;
  double logdet = 0.0;
};
BlockCredit block_credit(const BlockStats& block, const WVector& w);

// Result of shielding one likelihood evaluation from a constant predictor
// column: the affected columns and the block statistics recomputed from
// jittered values. id == 0 means the block was not singular (no-op).
struct JitterRecord {
  std::uint64_t id = 0;
  std::vector<int> columns;
  BlockStats stats;
};

// Detects constant predictor columns within the block and, if any, rebuilds
// its statistics with uniform noise of magnitude 1e-6 * max(1, column range)
// added to those columns. The noise exists only inside the returned record;
// the data and the block are untouched, and each call draws fresh noise.
JitterRecord regularize_design(const BlockStats& block, const Dataset& data,
                               std::mt19937_64& rng);

// W minus the regression credit over full-model blocks; clamped at zero.
double w_tilde(const Partition& partition, const Dataset& data, const WVector& w,
               DegenerateCounters* counters = nullptr);

// The data factor common to the joint and the w conditional.
// b_eff/n_eff are the exponent bookkeeping counts (equal to b and n for
// univariate data; scaled for the multivariate reduction).
struct DataTermStats {
  double between = 0.0;     // B
  double within = 0.0;      // W
  double q_credit = 0.0;    // sum over tau=1 blocks
  double logdet_sum = 0.0;  // sum over tau=1 blocks
  std::int64_t b_eff = 1;
  std::int64_t n_eff = 1;
};
double log_data_term(const DataTermStats& stats, double w0_limit,
                     DegenerateCounters* counters = nullptr);

// log of int_0^{w0'} w^((b_eff-1)/2 + moment) (wt + w B)^(-(n_eff-1)/2) dw.
// Shared by the fine-partition data factor (moment 0) and the quadrature
// fallback of the w0 expectation (moments 0 and 1).
double log_w0_moment_integral(double between, double wt, double b_eff,
                              double n_eff, double w0_limit, int moment);

// Unnormalized log posterior of (rho, tau) given w: tau prior + partition
// prior + data term. Pure; used directly by enumeration oracles and as the
// reference for the sampler's incremental bookkeeping.
double log_joint_rho_tau(const Partition& partition, const Dataset& data,
                         const WVector& w, const ModelConfig& config,
                         const Graph& graph,
                         DegenerateCounters* counters = nullptr);

// Data term as a function of w with (rho, tau) fixed; -infinity outside the
// prior box. Constant in w when no full-model blocks exist.
double log_w_conditional(const WVector& w, const Partition& partition,
                         const Dataset& data, const ModelConfig& config,
                         DegenerateCounters* counters = nullptr);

}  // namespace bcpg
