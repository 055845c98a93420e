#include "bcpgraph/likelihood.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "bcpgraph/errors.hpp"
#include "bcpgraph/rng.hpp"
#include "bcpgraph/special.hpp"

namespace bcpg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTinyFloor = 1e-300;
constexpr double kSingularDetectTol = 1e-12;

std::atomic<std::uint64_t> g_jitter_serial{1};

// Cholesky of a small SPD matrix in place (row-major k*k). Returns false if
// a pivot is non-positive.
bool cholesky(std::vector<double>& m, int k) {
  for (int j = 0; j < k; ++j) {
    double d = m[j * k + j];
    for (int l = 0; l < j; ++l) d -= m[j * k + l] * m[j * k + l];
    if (d <= 0.0) return false;
    const double root = std::sqrt(d);
    m[j * k + j] = root;
    for (int i = j + 1; i < k; ++i) {
      double v = m[i * k + j];
      for (int l = 0; l < j; ++l) v -= m[i * k + l] * m[j * k + l];
      m[i * k + j] = v / root;
    }
  }
  return true;
}

// Solve L L' x = b given the Cholesky factor in the lower triangle.
void cholesky_solve(const std::vector<double>& l, int k, std::vector<double>& b) {
  for (int i = 0; i < k; ++i) {
    double v = b[i];
    for (int j = 0; j < i; ++j) v -= l[i * k + j] * b[j];
    b[i] = v / l[i * k + i];
  }
  for (int i = k - 1; i >= 0; --i) {
    double v = b[i];
    for (int j = i + 1; j < k; ++j) v -= l[j * k + i] * b[j];
    b[i] = v / l[i * k + i];
  }
}

// Hard rejection only; the sampler detects near-singular columns (and adds
// jitter) at a looser threshold before calling in.
void check_not_singular(const BlockStats& block, int k) {
  for (int j = 0; j < k; ++j) {
    if (block.sxx[j * k + j] <= 0.0) {
      throw SingularDesignError("constant predictor column " + std::to_string(j) +
                                " within block");
    }
  }
}

}  // namespace

// log int_0^{w0'} w^((b-1)/2 + moment) (wt + w B)^(-(n-1)/2) dw, the integral
// behind the B > 0 data factor and the w0 expectation. Only needed when the
// incomplete-beta decomposition breaks down (n_eff - b_eff - 2 <= 0); there
// the in-log integrand's slope (b+1)/2 + moment - (n-1)/2 * B w/(wt + B w) is
// nonnegative, so the mass sits against the upper limit and a bracketed
// composite Simpson in u = log w is accurate.
double log_w0_moment_integral(double between, double wt, double b_eff,
                              double n_eff, double w0_limit, int moment) {
  const double p1 = 0.5 * (b_eff - 1.0) + 1.0 + static_cast<double>(moment);
  const double q = 0.5 * (n_eff - 1.0);
  const auto log_f = [&](double u) {
    return p1 * u - q * std::log(wt + std::exp(u) * between);
  };
  const double u_hi = std::log(w0_limit);
  const double top = log_f(u_hi);
  double step = 1.0;
  double u_lo = u_hi - step;
  double u_in = u_hi;  // rightmost point known to be within 45 of the top
  while (top - log_f(u_lo) < 45.0 && u_lo > u_hi - 4000.0) {
    u_in = u_lo;
    step *= 2.0;
    u_lo -= step;
  }
  for (int i = 0; i < 20 && u_in - u_lo > 0.5; ++i) {  // tighten the bracket
    const double mid = 0.5 * (u_in + u_lo);
    (top - log_f(mid) < 45.0 ? u_in : u_lo) = mid;
  }
  constexpr int kSegments = 512;  // even
  const double h = (u_hi - u_lo) / kSegments;
  double max_term = -kInf;
  double terms[kSegments + 1];
  for (int i = 0; i <= kSegments; ++i) {
    const double simpson = (i == 0 || i == kSegments) ? 0.0 : (i % 2 ? 1.3862943611198906 : 0.6931471805599453);
    terms[i] = log_f(u_lo + h * i) + simpson;  // log of 1/4/2 weights
    max_term = std::max(max_term, terms[i]);
  }
  double acc = 0.0;
  for (int i = 0; i <= kSegments; ++i) acc += std::exp(terms[i] - max_term);
  return max_term + std::log(acc) + std::log(h / 3.0);
}

void ModelConfig::validate() const {
  if (k < 0) throw InvalidInputError("config: negative k");
  if (rho_prior == RhoPrior::graph_alpha && !(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidInputError("config: alpha must lie in (0, 1)");
  }
  if (!(p0 > 0.0 && p0 <= 1.0)) throw InvalidInputError("config: p0 must lie in (0, 1]");
  if (!(d > 0.0)) throw InvalidInputError("config: d must be positive");
  for (double wl : w_limits) {
    if (!(wl > 0.0 && wl <= 1.0)) {
      throw InvalidInputError("config: every w limit must lie in (0, 1]");
    }
  }
}

void ModelConfig::normalize() {
  w_limits.resize(k + 1, 0.2);
  validate();
}

WVector WVector::midpoint(const ModelConfig& config) {
  WVector w;
  w.w.resize(config.k + 1);
  for (int j = 0; j <= config.k; ++j) w.w[j] = 0.5 * config.w_limit(j);
  return w;
}

double log_tau_prior(int tau, std::int64_t n_s, int k, double d) {
  if (k == 0) return tau == 0 ? 0.0 : -kInf;
  const bool small = n_s < 2 * static_cast<std::int64_t>(k);
  const double ns = static_cast<double>(n_s);
  if (tau == 0) return small ? 0.0 : std::log(d / (ns + d));
  return small ? -kInf : std::log(ns / (ns + d));
}

double log_rho_prior_graph(std::int64_t boundary_len, double alpha) {
  return static_cast<double>(boundary_len) * std::log(alpha);
}

double log_rho_prior_path(std::int64_t b, std::int64_t n, double p0) {
  if (b < 1 || b > n) throw InvalidInputError("path prior: need 1 <= b <= n");
  return log_incomplete_beta(p0, static_cast<double>(b),
                             static_cast<double>(n - b + 1));
}

std::vector<double> zs_diag(const WVector& w, std::int64_t n_s,
                            const std::vector<double>& v_diag) {
  std::vector<double> out(v_diag.size() + 1);
  out[0] = (1.0 - w.w[0]) / (static_cast<double>(n_s) * w.w[0]);
  for (std::size_t j = 0; j < v_diag.size(); ++j) {
    if (v_diag[j] <= 0.0) {
      throw SingularDesignError("zs_diag: zero V_Sjj at predictor " +
                                std::to_string(j));
    }
    out[j + 1] = (1.0 - w.w[j + 1]) / (v_diag[j] * w.w[j + 1]);
  }
  return out;
}

std::vector<double> beta_hat(const BlockStats& block, const WVector& w) {
  const int k = static_cast<int>(block.sxy.size());
  check_not_singular(block, k);
  std::vector<double> a = block.sxx;
  for (int j = 0; j < k; ++j) {
    const double wj = w.w[j + 1];
    a[j * k + j] += block.sxx[j * k + j] * wj / (1.0 - wj);
  }
  if (!cholesky(a, k)) throw NumericError("beta_hat: penalized system not SPD");
  std::vector<double> beta = block.sxy;
  cholesky_solve(a, k, beta);
  return beta;
}

BlockCredit block_credit(const BlockStats& block, const WVector& w) {
  const int k = static_cast<int>(block.sxy.size());
  check_not_singular(block, k);

  // q = sxy' (V + diag(V_jj w/(1-w)))^-1 sxy
  std::vector<double> a = block.sxx;
  for (int j = 0; j < k; ++j) {
    const double wj = w.w[j + 1];
    a[j * k + j] += block.sxx[j * k + j] * wj / (1.0 - wj);
  }
  if (!cholesky(a, k)) throw NumericError("block_credit: penalized system not SPD");
  std::vector<double> beta = block.sxy;
  cholesky_solve(a, k, beta);
  double q = 0.0;
  for (int j = 0; j < k; ++j) q += beta[j] * block.sxy[j];

  // det (V Z + I) via the symmetric similarity Z^(1/2) V Z^(1/2) + I; the
  // diagonal of that matrix is exactly 1/wj.
  std::vector<double> m(static_cast<std::size_t>(k) * k);
  std::vector<double> sqrt_z(k);
  for (int j = 0; j < k; ++j) {
    const double wj = w.w[j + 1];
    sqrt_z[j] = std::sqrt((1.0 - wj) / (block.sxx[j * k + j] * wj));
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      m[i * k + j] = block.sxx[i * k + j] * sqrt_z[i] * sqrt_z[j] + (i == j ? 1.0 : 0.0);
    }
  }
  if (!cholesky(m, k)) throw NumericError("block_credit: VZ + I not SPD");
  double logdet = 0.0;
  for (int j = 0; j < k; ++j) logdet += 2.0 * std::log(m[j * k + j]);
  if (logdet < -1e-9) throw NumericError("block_credit: det(VZ+I) below one");
  return {q, std::max(logdet, 0.0)};
}

JitterRecord regularize_design(const BlockStats& block, const Dataset& data,
                               std::mt19937_64& rng) {
  JitterRecord rec;
  const int k = data.k;
  for (int j = 0; j < k; ++j) {
    if (block.sxx[j * k + j] <= kSingularDetectTol) rec.columns.push_back(j);
  }
  if (rec.columns.empty()) return rec;
  rec.id = g_jitter_serial.fetch_add(1, std::memory_order_relaxed);

  // Recompute the block from scratch with noise on the constant columns only.
  rec.stats = block.stats_only();
  const std::int64_t n = block.n;
  std::vector<double> jit(rec.columns.size() * n);
  for (std::size_t cj = 0; cj < rec.columns.size(); ++cj) {
    const double eps = 1e-6 * std::max(1.0, data.x_col_range[rec.columns[cj]]);
    for (std::int64_t i = 0; i < n; ++i) {
      jit[cj * n + i] = uniform_range(rng, -eps, eps);
    }
  }
  auto xval = [&](std::int64_t idx, int j) {
    double v = data.xv(block.members[idx], j);
    for (std::size_t cj = 0; cj < rec.columns.size(); ++cj) {
      if (rec.columns[cj] == j) v += jit[cj * n + idx];
    }
    return v;
  };
  std::vector<double> sum_x(k, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) sum_x[j] += xval(i, j);
  }
  const double my = block.mean_y();
  std::fill(rec.stats.sxx.begin(), rec.stats.sxx.end(), 0.0);
  std::fill(rec.stats.sxy.begin(), rec.stats.sxy.end(), 0.0);
  rec.stats.sum_x = sum_x;
  for (std::int64_t i = 0; i < n; ++i) {
    const double dy = data.y[block.members[i]] - my;
    for (int j = 0; j < k; ++j) {
      const double dxj = xval(i, j) - sum_x[j] / static_cast<double>(n);
      rec.stats.sxy[j] += dxj * dy;
      for (int l = 0; l <= j; ++l) {
        const double dxl = xval(i, l) - sum_x[l] / static_cast<double>(n);
        rec.stats.sxx[j * k + l] += dxj * dxl;
      }
    }
  }
  for (int j = 0; j < k; ++j) {
    for (int l = j + 1; l < k; ++l) rec.stats.sxx[j * k + l] = rec.stats.sxx[l * k + j];
  }
  return rec;
}

double w_tilde(const Partition& partition, const Dataset& data, const WVector& w,
               DegenerateCounters* counters) {
  double credit = 0.0;
  for (const auto& [id, blk] : partition.blocks()) {
    if (blk.tau == 1) credit += block_credit(blk, w).q;
  }
  const double within = partition.sum_ss();
  double wt = within - credit;
  if (wt < 0.0) {
    if (counters) ++counters->wtilde_clamps;
    wt = std::numeric_limits<double>::epsilon() * within;
  }
  (void)data;
  return wt;
}

double log_data_term(const DataTermStats& stats, double w0_limit,
                     DegenerateCounters* counters) {
  const double b = static_cast<double>(stats.b_eff);
  const double n = static_cast<double>(stats.n_eff);
  double wt = stats.within - stats.q_credit;
  const double floor =
      std::max(std::numeric_limits<double>::epsilon() * stats.within, kTinyFloor);
  if (wt < floor) {
    if (counters) ++counters->wtilde_clamps;
    wt = floor;
  }
  if (stats.n_eff <= 1) return 0.0;  // single observation: no data factor

  if (stats.b_eff == 1 || stats.between <= 0.0) {
    // B = 0 branch as the continuous limit of the B > 0 factor; at b = 1 this
    // is exactly w0' / W~^((n-1)/2).
    return b * std::log(w0_limit) + std::log(2.0 / (b + 1.0)) -
           0.5 * stats.logdet_sum - 0.5 * (n - 1.0) * std::log(wt);
  }
  const double base = 0.5 * (b - 1.0) * std::log(w0_limit) - 0.5 * stats.logdet_sum;
  if (stats.n_eff - stats.b_eff - 2 > 0) {
    const double shape_a = 0.5 * (b + 1.0);
    const double shape_b = 0.5 * (n - b - 2.0);
    const double xx = 1.0 / (1.0 + wt / (stats.between * w0_limit));
    return base - shape_a * std::log(stats.between) - shape_b * std::log(wt) +
           log_incomplete_beta(xx, shape_a, shape_b);
  }
  // Very fine partitions: the incomplete-beta decomposition is unavailable but
  // the underlying integral still converges; evaluate it directly.
  return base + log_w0_moment_integral(stats.between, wt, b, n, w0_limit, 0);
}

double log_joint_rho_tau(const Partition& partition, const Dataset& data,
                         const WVector& w, const ModelConfig& config,
                         const Graph& graph, DegenerateCounters* counters) {
  double tau_sum = 0.0;
  double q_credit = 0.0;
  double logdet_sum = 0.0;
  for (const auto& [id, blk] : partition.blocks()) {
    tau_sum += log_tau_prior(blk.tau, blk.n, config.k, config.d);
    if (blk.tau == 1) {
      const BlockCredit credit = block_credit(blk, w);
      q_credit += credit.q;
      logdet_sum += credit.logdet;
    }
  }
  if (tau_sum == -kInf) return -kInf;

  const double rho_prior =
      config.rho_prior == RhoPrior::graph_alpha
          ? log_rho_prior_graph(partition.boundary_length(graph), config.alpha)
          : log_rho_prior_path(partition.block_count(), data.n, config.p0);

  DataTermStats stats;
  stats.between = partition.sum_zc();
  stats.within = partition.sum_ss();
  stats.q_credit = q_credit;
  stats.logdet_sum = logdet_sum;
  stats.b_eff = partition.block_count();
  stats.n_eff = data.n;
  return tau_sum + rho_prior + log_data_term(stats, config.w_limit(0), counters);
}

double log_w_conditional(const WVector& w, const Partition& partition,
                         const Dataset& data, const ModelConfig& config,
                         DegenerateCounters* counters) {
  for (int j = 0; j <= config.k; ++j) {
    if (!(w.w[j] > 0.0 && w.w[j] < config.w_limit(j))) return -kInf;
  }
  double q_credit = 0.0;
  double logdet_sum = 0.0;
  for (const auto& [id, blk] : partition.blocks()) {
    if (blk.tau == 1) {
      const BlockCredit credit = block_credit(blk, w);
      q_credit += credit.q;
      logdet_sum += credit.logdet;
    }
  }
  DataTermStats stats;
  stats.between = partition.sum_zc();
  stats.within = partition.sum_ss();
  stats.q_credit = q_credit;
  stats.logdet_sum = logdet_sum;
  stats.b_eff = partition.block_count();
  stats.n_eff = data.n;
  return log_data_term(stats, config.w_limit(0), counters);
}

}  // namespace bcpg
