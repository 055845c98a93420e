#pragma once

// Independent reference computations used to pin expected test values:
// quadrature, exhaustive enumeration and plain least squares. Nothing here
// touches the library's own numeric paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

// Tanh-sinh (double exponential) quadrature on (lo, hi); robust to endpoint
// singularities like t^(a-1) with a < 1.
inline long double integrate(const std::function<long double(long double)>& f,
                             long double lo, long double hi) {
  const long double half = 0.5L * (hi - lo);
  const long double mid = 0.5L * (hi + lo);
  const long double pi_half = 1.57079632679489661923L;
  long double best = 0.0L;
  int stable = 0;
  for (int level = 4; level <= 14; ++level) {
    const long double h = std::pow(2.0L, -static_cast<long double>(level)) * 6.0L;
    long double sum = 0.0L;
    for (long long k = -(1 << level); k <= (1 << level); ++k) {
      const long double u = h * static_cast<long double>(k);
      const long double s = pi_half * std::sinh(u);
      const long double x = mid + half * std::tanh(s);
      const long double c = std::cosh(s);
      const long double w = half * pi_half * std::cosh(u) / (c * c);
      if (x <= lo || x >= hi || w < 1e-44L) continue;
      const long double v = f(x);
      if (std::isfinite(static_cast<double>(v))) sum += w * v;
    }
    const long double est = sum * h;
    if (level > 4) {
      stable = std::fabs(est - best) <= 1e-17L * std::fabs(est) ? stable + 1 : 0;
      if (stable >= 2) return est;
    }
    best = est;
  }
  return best;
}

// log int_0^x t^(a-1) (1-t)^(b-1) dt. The substitution t = x u^(1/a) turns
// the integral into (x^a / a) int_0^1 (1 - x u^(1/a))^(b-1) du with a smooth
// bounded integrand, so the endpoint singularity never reaches the
// quadrature.
inline double log_incomplete_beta_quad(double x, double a, double b) {
  if (x <= 0.0) return -INFINITY;
  const long double xl = static_cast<long double>(x);
  const long double al = static_cast<long double>(a);
  const long double bl = static_cast<long double>(b);
  if (a < 1.0) {
    // Singular mass against t = 0; the substitution keeps it in range.
    const long double val = integrate(
        [&](long double u) {
          const long double t = xl * std::pow(u, 1.0L / al);
          return std::pow(1.0L - t, bl - 1.0L);
        },
        0.0L, 1.0L);
    return static_cast<double>(al * std::log(xl) - std::log(al) + std::log(val));
  }
  // a >= 1: the integrand vanishes at t = 0; integrate directly with a shift
  // at the in-range peak for scaling.
  const long double t_peak =
      std::min(xl, (al - 1.0L) / std::max(al + bl - 2.0L, 1e-30L));
  const long double shift =
      (al - 1.0L) * std::log(std::max(t_peak, 1e-30L)) +
      (bl - 1.0L) * std::log1p(-t_peak);
  const long double val = integrate(
      [&](long double t) {
        return std::exp((al - 1.0L) * std::log(t) +
                        (bl - 1.0L) * std::log1p(-t) - shift);
      },
      0.0L, xl);
  return static_cast<double>(std::log(val) + shift);
}

// log int_0^w0 w^((b-1)/2) (wt + wB)^(-(n-1)/2) dw, the integral behind the
// B > 0 data factor, by direct quadrature in log scale.
inline double log_w0_integral_quad(double between, double wt, double b_eff,
                                   double n_eff, double w0_limit) {
  const long double p = 0.5L * (b_eff - 1.0);
  const long double q = 0.5L * (n_eff - 1.0);
  // Shift by the integrand's value at the right end for range safety.
  const long double shift =
      p * std::log(static_cast<long double>(w0_limit)) -
      q * std::log(static_cast<long double>(wt + w0_limit * between));
  const long double val = integrate(
      [&](long double w) {
        return std::exp(p * std::log(w) - q * std::log(wt + w * between) - shift);
      },
      0.0L, static_cast<long double>(w0_limit));
  return static_cast<double>(std::log(val) + shift);
}

// E(w0) under f(w0) ~ w0^((b-1)/2) (wt + w0 B)^(-(n-1)/2) on (0, w0').
inline double w0_expectation_quad(double between, double wt, double b_eff,
                                  double n_eff, double w0_limit) {
  const long double p = 0.5L * (b_eff - 1.0);
  const long double q = 0.5L * (n_eff - 1.0);
  const long double shift =
      -q * std::log(static_cast<long double>(wt + 0.5 * w0_limit * between));
  auto dens = [&](long double w) {
    return std::exp(p * std::log(w) - q * std::log(wt + w * between) - shift);
  };
  const long double den = integrate(dens, 0.0L, static_cast<long double>(w0_limit));
  const long double num = integrate([&](long double w) { return w * dens(w); },
                                    0.0L, static_cast<long double>(w0_limit));
  return static_cast<double>(num / den);
}

// All spanning trees of the complete graph on n <= 6 labelled points; returns
// the minimum total Euclidean length.
inline double min_spanning_tree_brute(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  std::vector<std::pair<int, int>> all_edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) all_edges.emplace_back(i, j);
  }
  const int m = static_cast<int>(all_edges.size());
  double best = INFINITY;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != n - 1) continue;
    // Union-find connectivity check.
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    int comps = n;
    double length = 0.0;
    for (int e = 0; e < m; ++e) {
      if (!(mask & (1u << e))) continue;
      const auto [u, v] = all_edges[e];
      length += std::hypot(x[u] - x[v], y[u] - y[v]);
      const int ru = find(u), rv = find(v);
      if (ru != rv) {
        parent[ru] = rv;
        --comps;
      }
    }
    if (comps == 1) best = std::min(best, length);
  }
  return best;
}

// Contiguous partitions of 0..n-1 as break bitmasks over positions 1..n-1.
// Bit p-1 set means position p starts a new block.
inline std::vector<std::vector<int>> blocks_of_mask(std::uint32_t mask, int n) {
  std::vector<std::vector<int>> blocks;
  blocks.push_back({0});
  for (int i = 1; i < n; ++i) {
    if (mask & (1u << (i - 1))) blocks.push_back({});
    blocks.back().push_back(i);
  }
  return blocks;
}

// All set partitions of n elements (restricted growth strings).
inline std::vector<std::vector<std::int32_t>> set_partitions(int n) {
  std::vector<std::vector<std::int32_t>> out;
  std::vector<std::int32_t> rgs(n, 0);
  std::function<void(int, int)> rec = [&](int i, int max_used) {
    if (i == n) {
      out.push_back(rgs);
      return;
    }
    for (int v = 0; v <= max_used + 1; ++v) {
      rgs[i] = v;
      rec(i + 1, std::max(max_used, v));
    }
  };
  if (n > 0) rec(1, 0);
  if (n == 1) out.push_back(rgs);
  return out;
}

// Ordinary least squares with intercept: returns fitted values for rows of x
// (n x k, row-major). Gaussian elimination on the (k+1) normal equations.
inline std::vector<double> ols_fitted(const std::vector<double>& y,
                                      const std::vector<double>& x, int k) {
  const int n = static_cast<int>(y.size());
  const int p = k + 1;
  std::vector<double> a(p * p, 0.0), rhs(p, 0.0);
  auto xv = [&](int i, int j) { return j == 0 ? 1.0 : x[i * k + (j - 1)]; };
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < p; ++r) {
      rhs[r] += xv(i, r) * y[i];
      for (int c = 0; c < p; ++c) a[r * p + c] += xv(i, r) * xv(i, c);
    }
  }
  for (int col = 0; col < p; ++col) {
    int piv = col;
    for (int r = col + 1; r < p; ++r) {
      if (std::fabs(a[r * p + col]) > std::fabs(a[piv * p + col])) piv = r;
    }
    for (int c = 0; c < p; ++c) std::swap(a[col * p + c], a[piv * p + c]);
    std::swap(rhs[col], rhs[piv]);
    for (int r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = a[r * p + col] / a[col * p + col];
      for (int c = 0; c < p; ++c) a[r * p + c] -= f * a[col * p + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> beta(p);
  for (int r = 0; r < p; ++r) beta[r] = rhs[r] / a[r * p + r];
  std::vector<double> fitted(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < p; ++r) fitted[i] += xv(i, r) * beta[r];
  }
  return fitted;
}

// Total variation distance between a sampled histogram and exact
// probabilities over the same keys.
template <typename Key>
double total_variation(const std::map<Key, std::int64_t>& counts,
                       const std::map<Key, double>& exact, std::int64_t total) {
  double tv = 0.0;
  for (const auto& [key, p] : exact) {
    const auto it = counts.find(key);
    const double hat =
        it == counts.end() ? 0.0
                           : static_cast<double>(it->second) / static_cast<double>(total);
    tv += std::fabs(hat - p);
  }
  for (const auto& [key, c] : counts) {
    if (exact.find(key) == exact.end()) {
      tv += static_cast<double>(c) / static_cast<double>(total);
    }
  }
  return 0.5 * tv;
}

inline double log_sum_exp(const std::vector<double>& v) {
  double mx = -INFINITY;
  for (double t : v) mx = std::max(mx, t);
  if (mx == -INFINITY) return mx;
  double acc = 0.0;
  for (double t : v) acc += std::exp(t - mx);
  return mx + std::log(acc);
}

}  // namespace oracle
