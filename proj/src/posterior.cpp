#include "bcpgraph/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bcpgraph/errors.hpp"
#include "bcpgraph/special.hpp"

namespace bcpg {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double w0_star(double between, double w_tilde, std::int64_t b_eff,
               std::int64_t n_eff, double w0_limit) {
  if (between <= 0.0) return 0.5 * w0_limit;
  const double b = static_cast<double>(b_eff);
  const double n = static_cast<double>(n_eff);
  if (n_eff - b_eff - 4 > 0 && w_tilde > 0.0) {
    const double xx = 1.0 / (1.0 + w_tilde / (between * w0_limit));
    const double log_num =
        log_incomplete_beta(xx, 0.5 * (b + 3.0), 0.5 * (n - b - 4.0));
    const double log_den =
        log_incomplete_beta(xx, 0.5 * (b + 1.0), 0.5 * (n - b - 2.0));
    return (w_tilde / between) * std::exp(log_num - log_den);
  }
  // Degenerate shapes: E(w0) as a ratio of the two moment integrals of the
  // w0 conditional, which are always proper.
  const double wt = std::max(w_tilde, 1e-300);
  return std::exp(log_w0_moment_integral(between, wt, b, n, w0_limit, 1) -
                  log_w0_moment_integral(between, wt, b, n, w0_limit, 0));
}

double intercept_estimate(double block_mean, double grand_mean, double w0star) {
  return (1.0 - w0star) * block_mean + w0star * grand_mean;
}

double sigma2_estimate(double w_tilde, double w0star, double between,
                       std::int64_t n_eff) {
  return (w_tilde + w0star * between) / static_cast<double>(n_eff - 3);
}

StepEstimate step_expectations(const Partition& partition, const Dataset& data,
                               const WVector& w, const ModelConfig& config,
                               const Graph& graph, double q_credit,
                               std::mt19937_64* rng, DegenerateCounters* counters) {
  StepEstimate est;
  est.blocks = partition.block_count();
  est.fitted.assign(data.n, 0.0);

  const double within = partition.sum_ss();
  const double between = partition.sum_zc();
  double wt = within - q_credit;
  if (wt < 0.0) wt = 0.0;
  const double w0s = w0_star(between, wt, partition.block_count(), data.n,
                             config.w_limit(0));

  for (const auto& [id, blk] : partition.blocks()) {
    const double alpha_s = intercept_estimate(blk.mean_y(), data.y_bar, w0s);
    if (blk.tau == 1) {
      const BlockStats* use = &blk;
      JitterRecord rec;
      if (rng != nullptr) {
        rec = regularize_design(blk, data, *rng);
        if (rec.id != 0) {
          rec.stats.members = blk.members;
          use = &rec.stats;
          if (counters) ++counters->jitter_events;
        }
      }
      const std::vector<double> beta = beta_hat(*use, w);
      for (std::int32_t v : blk.members) {
        double fit = alpha_s;
        for (int j = 0; j < data.k; ++j) {
          fit += (data.xv(v, j) - use->sum_x[j] / static_cast<double>(blk.n)) * beta[j];
        }
        est.fitted[v] = fit;
      }
    } else {
      for (std::int32_t v : blk.members) est.fitted[v] = alpha_s;
    }
  }

  est.has_sigma2 = data.n > 3;
  if (est.has_sigma2) est.sigma2 = sigma2_estimate(wt, w0s, between, data.n);

  const auto& mem = partition.membership();
  est.edge_diff.resize(graph.edge_count());
  std::int64_t e = 0;
  for (const auto& [u, v] : graph.edges()) {
    est.edge_diff[e++] = mem[u] != mem[v] ? 1 : 0;
  }
  est.node_active.assign(data.n, 0);
  for (std::int64_t v = 0; v < data.n; ++v) {
    for (std::int32_t u : graph.neighbors(static_cast<std::int32_t>(v))) {
      if (mem[u] != mem[v]) {
        est.node_active[v] = 1;
        break;
      }
    }
  }
  return est;
}

PosteriorAccumulator::PosteriorAccumulator(std::int64_t n, std::int64_t m,
                                           std::int64_t n_edges, int membership_thin)
    : n_(n), m_(m), thin_(membership_thin) {
  sum_fit_.assign(n * m, 0.0);
  sum_fit_sq_.assign(n * m, 0.0);
  active_count_.assign(n, 0);
  edge_count_.assign(n_edges, 0);
}

void PosteriorAccumulator::add(const StepEstimate& step,
                               const std::vector<std::int32_t>* membership) {
  ++steps_;
  for (std::size_t i = 0; i < step.fitted.size(); ++i) {
    sum_fit_[i] += step.fitted[i];
    sum_fit_sq_[i] += step.fitted[i] * step.fitted[i];
  }
  for (std::size_t v = 0; v < step.node_active.size(); ++v) {
    active_count_[v] += step.node_active[v];
  }
  for (std::size_t e = 0; e < step.edge_diff.size(); ++e) {
    edge_count_[e] += step.edge_diff[e];
  }
  block_trace_.push_back(static_cast<std::int32_t>(step.blocks));
  if (step.has_sigma2) {
    sigma2_sum_ += step.sigma2;
    ++sigma2_steps_;
  }
  if (membership != nullptr && (steps_ - 1) % thin_ == 0) {
    // Canonical relabelling by first appearance.
    std::vector<std::int32_t> canon(membership->size());
    std::vector<std::int32_t> ids;
    for (std::size_t i = 0; i < membership->size(); ++i) {
      const std::int32_t raw = (*membership)[i];
      std::int32_t rank = -1;
      for (std::size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] == raw) {
          rank = static_cast<std::int32_t>(r);
          break;
        }
      }
      if (rank < 0) {
        rank = static_cast<std::int32_t>(ids.size());
        ids.push_back(raw);
      }
      canon[i] = rank;
    }
    for (std::size_t i = 0; i < modal_keys_.size(); ++i) {
      if (modal_keys_[i] == canon) {
        ++modal_entries_[i].count;
        return;
      }
    }
    modal_keys_.push_back(std::move(canon));
    modal_entries_.push_back({1, steps_});
  }
}

PosteriorSummary PosteriorAccumulator::finish(SummaryMode mode,
                                              std::vector<Edge> edges) const {
  if (steps_ == 0) throw InvalidInputError("aggregate: no retained steps");
  PosteriorSummary s;
  s.n = n_;
  s.m = m_;
  s.mode = mode;
  s.retained_steps = steps_;
  const double inv = 1.0 / static_cast<double>(steps_);
  s.posterior_mean.resize(sum_fit_.size());
  s.posterior_var.resize(sum_fit_.size());
  for (std::size_t i = 0; i < sum_fit_.size(); ++i) {
    const double mean = sum_fit_[i] * inv;
    s.posterior_mean[i] = mean;
    double var = 0.0;
    if (steps_ > 1) {
      var = (sum_fit_sq_[i] - static_cast<double>(steps_) * mean * mean) /
            static_cast<double>(steps_ - 1);
      if (var < 0.0) var = 0.0;
    }
    s.posterior_var[i] = var;
  }
  s.node_boundary_prob.resize(n_);
  for (std::int64_t v = 0; v < n_; ++v) {
    s.node_boundary_prob[v] = static_cast<double>(active_count_[v]) * inv;
  }
  s.edges = std::move(edges);
  s.edge_change_prob.resize(edge_count_.size());
  for (std::size_t e = 0; e < edge_count_.size(); ++e) {
    s.edge_change_prob[e] = static_cast<double>(edge_count_[e]) * inv;
  }
  if (mode != SummaryMode::graph) {
    // Path edge e joins nodes (e, e+1); position i starts a new block exactly
    // when that edge separates blocks.
    s.cp_prob.assign(n_, kNaN);
    for (std::size_t e = 0; e < edge_count_.size(); ++e) {
      s.cp_prob[e + 1] = static_cast<double>(edge_count_[e]) * inv;
    }
  }
  double bsum = 0.0;
  for (std::int32_t b : block_trace_) bsum += b;
  s.block_trace = block_trace_;
  s.mean_blocks = bsum * inv;
  s.has_sigma2 = sigma2_steps_ > 0;
  if (s.has_sigma2) s.sigma2_mean = sigma2_sum_ / static_cast<double>(sigma2_steps_);

  if (!modal_keys_.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < modal_keys_.size(); ++i) {
      const auto& e = modal_entries_[i];
      const auto& b = modal_entries_[best];
      if (e.count > b.count || (e.count == b.count && e.first_seen < b.first_seen)) {
        best = i;
      }
    }
    s.modal_membership = modal_keys_[best];
  }
  return s;
}

PosteriorSummary aggregate(const std::vector<StepEstimate>& steps,
                           const Graph& graph, SummaryMode mode) {
  if (steps.empty()) throw InvalidInputError("aggregate: empty step sequence");
  const std::int64_t n = graph.node_count();
  const std::int64_t m = static_cast<std::int64_t>(steps.front().fitted.size()) / n;
  PosteriorAccumulator acc(n, m, graph.edge_count());
  for (const auto& st : steps) acc.add(st);
  return acc.finish(mode, graph.edges());
}

double evaluate_mse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size() || estimate.empty()) {
    throw InvalidInputError("evaluate_mse: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = estimate[i] - truth[i];
    acc += d * d;
  }
  return acc / static_cast<double>(estimate.size());
}

}  // namespace bcpg
