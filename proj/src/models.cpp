#include "bcpgraph/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "bcpgraph/errors.hpp"
#include "bcpgraph/rng.hpp"

namespace bcpg {

namespace {

// Sequential-data chain over contiguous partitions. Works per dimension on
// responses centered at their grand means, so the between-block sums need no
// cancellation-prone correction.
class PathChain {
 public:
  PathChain(std::span<const double> y_flat, std::int64_t n, std::int64_t m,
            const ModelConfig& config)
      : n_(n), m_(m), config_(config) {
    if (n < 1 || m < 1) throw InvalidInputError("path fit: need n >= 1, m >= 1");
    if (static_cast<std::int64_t>(y_flat.size()) != n * m) {
      throw InvalidInputError("path fit: response array size mismatch");
    }
    grand_mean_.assign(m, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < m; ++j) grand_mean_[j] += y_flat[i * m + j];
    }
    for (std::int64_t j = 0; j < m; ++j) grand_mean_[j] /= static_cast<double>(n);
    cum_.assign(m, std::vector<double>(n + 1, 0.0));
    total_ss_ = 0.0;
    for (std::int64_t j = 0; j < m; ++j) {
      for (std::int64_t i = 0; i < n; ++i) {
        const double c = y_flat[i * m + j] - grand_mean_[j];
        cum_[j][i + 1] = cum_[j][i] + c;
        total_ss_ += c * c;
      }
    }
    prior_table_.assign(n + 1, 0.0);
    for (std::int64_t b = 1; b <= n; ++b) {
      prior_table_[b] = log_rho_prior_path(b, n, config.p0);
    }
    // Start from every position broken; the first sweeps remove breaks, so
    // competing adjacent positions are resolved by a joint comparison rather
    // than by which one the sweep happens to visit first.
    sum_zc_ = 0.0;
    for (std::int32_t p = 0; p < n; ++p) {
      breaks_.insert(p);
      sum_zc_ += seg_zc(p, p + 1);
    }
    b_ = n;
  }

  std::int64_t n_eff() const { return multivariate_n_eff(n_, m_); }
  std::int64_t b_eff() const { return multivariate_b_eff(b_, m_); }
  double between() const { return sum_zc_ < 0 ? 0.0 : sum_zc_; }
  double within() const {
    const double w = total_ss_ - sum_zc_;
    return w < 0 ? 0.0 : w;
  }
  std::int64_t blocks() const { return b_; }
  const std::set<std::int32_t>& breaks() const { return breaks_; }

  void sweep(std::mt19937_64& rng) {
    for (std::int32_t p = 1; p < n_; ++p) {
      auto it = breaks_.upper_bound(p);
      const std::int32_t hi = (it == breaks_.end()) ? static_cast<std::int32_t>(n_) : *it;
      const bool is_break = breaks_.count(p) > 0;
      const std::int32_t lo = is_break ? *std::prev(breaks_.find(p))
                                       : *std::prev(it);
      const double zc_l = seg_zc(lo, p);
      const double zc_r = seg_zc(p, hi);
      const double zc_m = seg_zc(lo, hi);

      const double zc_others = sum_zc_ - (is_break ? zc_l + zc_r : zc_m);
      const std::int64_t b_no = b_ - (is_break ? 1 : 0);
      const std::int64_t b_yes = b_no + 1;

      const double w_no = log_weight(zc_others + zc_m, b_no);
      const double w_yes = log_weight(zc_others + zc_l + zc_r, b_yes);
      const double p_break = 1.0 / (1.0 + std::exp(w_no - w_yes));
      const bool choose_break = uniform01(rng) < p_break;
      if (choose_break != is_break) {
        if (choose_break) {
          breaks_.insert(p);
          sum_zc_ = zc_others + zc_l + zc_r;
          b_ = b_yes;
        } else {
          breaks_.erase(p);
          sum_zc_ = zc_others + zc_m;
          b_ = b_no;
        }
      }
    }
    shift_pass(rng);
  }

  // Metropolis shift of each break one position left or right. Break/no-break
  // updates alone mix torpidly between adjacent boundary positions (the
  // in-between states carry a block-count penalty that grows with the
  // response dimension); a shift hops directly between those modes while
  // leaving the block count, and so the stationary law, untouched.
  void shift_pass(std::mt19937_64& rng) {
    std::vector<std::int32_t> snapshot(breaks_.begin(), breaks_.end());
    for (std::int32_t p : snapshot) {
      if (p == 0 || breaks_.count(p) == 0) continue;
      const std::int32_t q = uniform01(rng) < 0.5 ? p - 1 : p + 1;
      if (q <= 0 || q >= n_ || breaks_.count(q) > 0) continue;
      const std::int32_t lo = *std::prev(breaks_.find(p));
      auto next = breaks_.upper_bound(p);
      const std::int32_t hi =
          (next == breaks_.end()) ? static_cast<std::int32_t>(n_) : *next;
      if (q <= lo || q >= hi) continue;  // would empty a block
      const double zc_old = seg_zc(lo, p) + seg_zc(p, hi);
      const double zc_new = seg_zc(lo, q) + seg_zc(q, hi);
      const double delta = log_weight(sum_zc_ - zc_old + zc_new, b_) -
                           log_weight(sum_zc_, b_);
      if (std::log(std::max(uniform01(rng), 1e-300)) < delta) {
        breaks_.erase(p);
        breaks_.insert(q);
        sum_zc_ += zc_new - zc_old;
      }
    }
  }

  // Fitted values and step quantities for the current partition.
  void step_estimate(StepEstimate& est, DegenerateCounters& counters) const {
    (void)counters;
    est.blocks = b_;
    est.fitted.assign(n_ * m_, 0.0);
    const double w0s = w0_star(between(), within(), b_eff(), n_eff(),
                               config_.w_limit(0));
    auto it = breaks_.begin();
    while (it != breaks_.end()) {
      const std::int32_t lo = *it;
      ++it;
      const std::int32_t hi = (it == breaks_.end()) ? static_cast<std::int32_t>(n_) : *it;
      const double len = static_cast<double>(hi - lo);
      for (std::int64_t j = 0; j < m_; ++j) {
        const double seg_mean_c = (cum_[j][hi] - cum_[j][lo]) / len;
        const double fit = intercept_estimate(grand_mean_[j] + seg_mean_c,
                                              grand_mean_[j], w0s);
        for (std::int32_t i = lo; i < hi; ++i) est.fitted[i * m_ + j] = fit;
      }
    }
    est.has_sigma2 = n_eff() > 3;
    if (est.has_sigma2) {
      est.sigma2 = sigma2_estimate(within(), w0s, between(), n_eff());
    }
    est.edge_diff.assign(n_ - 1, 0);
    est.node_active.assign(n_, 0);
    for (std::int32_t p : breaks_) {
      if (p == 0) continue;
      est.edge_diff[p - 1] = 1;
      est.node_active[p - 1] = 1;
      est.node_active[p] = 1;
    }
  }

  std::vector<char> break_flags() const {
    std::vector<char> flags(n_, 0);
    for (std::int32_t p : breaks_) flags[p] = 1;
    return flags;
  }

 private:
  double seg_zc(std::int64_t lo, std::int64_t hi) const {
    const double len = static_cast<double>(hi - lo);
    double acc = 0.0;
    for (std::int64_t j = 0; j < m_; ++j) {
      const double s = cum_[j][hi] - cum_[j][lo];
      acc += s * s / len;
    }
    return acc;
  }

  double log_weight(double zc, std::int64_t b) const {
    DataTermStats stats;
    stats.between = zc < 0 ? 0.0 : zc;
    stats.within = std::max(total_ss_ - stats.between, 0.0);
    stats.b_eff = multivariate_b_eff(b, m_);
    stats.n_eff = n_eff();
    return prior_table_[b] + log_data_term(stats, config_.w_limit(0), &counters_);
  }

  std::int64_t n_, m_;
  ModelConfig config_;
  std::vector<double> grand_mean_;
  std::vector<std::vector<double>> cum_;  // per-dimension centered prefix sums
  std::vector<double> prior_table_;       // log path prior by block count
  double total_ss_ = 0.0;
  std::set<std::int32_t> breaks_;
  double sum_zc_ = 0.0;
  std::int64_t b_ = 1;

 public:
  mutable DegenerateCounters counters_;
};

}  // namespace

PosteriorSummary fit_multivariate_path(std::span<const double> y_flat,
                                       std::int64_t n, std::int64_t m,
                                       const ModelConfig& config_in,
                                       const SamplerSchedule& schedule,
                                       std::uint64_t seed,
                                       const BreakObserver& observer) {
  ModelConfig config = config_in;
  config.k = 0;
  config.normalize();
  schedule.validate();
  const auto t0 = std::chrono::steady_clock::now();

  PathChain chain(y_flat, n, m, config);
  std::mt19937_64 rng(seed);
  const Graph path_graph = Graph::path(n);
  PosteriorAccumulator acc(n, m, n > 1 ? n - 1 : 0, schedule.membership_thin);
  StepEstimate est;
  for (std::int64_t step = 0; step < schedule.steps; ++step) {
    chain.sweep(rng);
    if (step >= schedule.discard) {
      chain.step_estimate(est, chain.counters_);
      acc.add(est);
      if (observer) observer(chain.break_flags());
    }
  }

  PosteriorSummary summary;
  if (acc.steps() > 0) {
    summary = acc.finish(m > 1 ? SummaryMode::multivariate : SummaryMode::path,
                         path_graph.edges());
  } else {
    summary.n = n;
    summary.m = m;
    summary.mode = m > 1 ? SummaryMode::multivariate : SummaryMode::path;
    summary.edges = path_graph.edges();
  }
  summary.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary.wtilde_clamp_count = chain.counters_.wtilde_clamps;
  return summary;
}

PosteriorSummary fit_classical_path(std::span<const double> y,
                                    const ModelConfig& config,
                                    const SamplerSchedule& schedule,
                                    std::uint64_t seed,
                                    const BreakObserver& observer) {
  return fit_multivariate_path(y, static_cast<std::int64_t>(y.size()), 1, config,
                               schedule, seed, observer);
}

PosteriorSummary fit_graph_regression(const Graph& graph,
                                      std::span<const double> y,
                                      std::span<const double> x_flat, int k,
                                      ModelConfig config,
                                      const SamplerSchedule& schedule,
                                      std::uint64_t seed,
                                      const StepObserver& observer) {
  if (graph.node_count() != static_cast<std::int64_t>(y.size())) {
    throw InvalidInputError("graph fit: response length does not match graph");
  }
  config.k = k;
  config.normalize();
  const Dataset data = Dataset::make(std::vector<double>(y.begin(), y.end()),
                                     std::vector<double>(x_flat.begin(), x_flat.end()),
                                     k);
  return run_chain(data, graph, config, schedule, seed, observer);
}

}  // namespace bcpg
