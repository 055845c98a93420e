#include "bcpgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "bcpgraph/errors.hpp"

namespace bcpg {

Graph::Graph(std::int64_t n, std::vector<Edge> edges, GraphKind kind)
    : n_(n), kind_(kind), edges_(std::move(edges)) {
  for (auto& [u, v] : edges_) {
    if (u > v) std::swap(u, v);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  offsets_.assign(n_ + 1, 0);
  for (const auto& [u, v] : edges_) {
    ++offsets_[u + 1];
    ++offsets_[v + 1];
  }
  for (std::int64_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  adj_.resize(offsets_[n_]);
  std::vector<std::int32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, v] : edges_) {
    adj_[fill[u]++] = v;
    adj_[fill[v]++] = u;
  }
  for (std::int64_t i = 0; i < n_; ++i) {
    std::sort(adj_.begin() + offsets_[i], adj_.begin() + offsets_[i + 1]);
  }
}

bool Graph::is_connected() const {
  if (n_ == 0) return false;
  std::vector<char> seen(n_, 0);
  std::queue<std::int32_t> q;
  q.push(0);
  seen[0] = 1;
  std::int64_t reached = 1;
  while (!q.empty()) {
    const std::int32_t v = q.front();
    q.pop();
    for (std::int32_t u : neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        q.push(u);
      }
    }
  }
  return reached == n_;
}

Graph Graph::path(std::int64_t n) {
  if (n < 1) throw InvalidInputError("path graph: need n >= 1");
  std::vector<Edge> edges;
  edges.reserve(n > 0 ? n - 1 : 0);
  for (std::int64_t i = 0; i + 1 < n; ++i) {
    edges.emplace_back(static_cast<std::int32_t>(i),
                       static_cast<std::int32_t>(i + 1));
  }
  return Graph(n, std::move(edges), GraphKind::path);
}

Graph Graph::grid(std::int64_t rows, std::int64_t cols, Neighborhood nb) {
  if (rows < 1 || cols < 1) throw InvalidInputError("grid graph: zero dimension");
  std::vector<Edge> edges;
  auto id = [cols](std::int64_t r, std::int64_t c) {
    return static_cast<std::int32_t>(r * cols + c);
  };
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
      if (nb == Neighborhood::eight && r + 1 < rows) {
        if (c + 1 < cols) edges.emplace_back(id(r, c), id(r + 1, c + 1));
        if (c > 0) edges.emplace_back(id(r, c), id(r + 1, c - 1));
      }
    }
  }
  return Graph(rows * cols,
               std::move(edges),
               nb == Neighborhood::four ? GraphKind::grid4 : GraphKind::grid8);
}

Graph Graph::mst_from_coords(std::span<const double> x, std::span<const double> y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (n < 1 || y.size() != x.size()) {
    throw InvalidInputError("mst: need >= 1 node and matching coordinate arrays");
  }
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidInputError("mst: non-finite coordinate at row " + std::to_string(i));
    }
  }
  auto dist2 = [&](std::int64_t a, std::int64_t b) {
    const double dx = x[a] - x[b];
    const double dy = y[a] - y[b];
    return dx * dx + dy * dy;
  };

  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> best_from(n, -1);
  std::vector<Edge> edges;
  edges.reserve(n - 1);

  in_tree[0] = 1;
  for (std::int64_t j = 1; j < n; ++j) {
    best[j] = dist2(0, j);
    best_from[j] = 0;
  }
  for (std::int64_t added = 1; added < n; ++added) {
    std::int64_t pick = -1;
    for (std::int64_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      if (pick < 0 || best[j] < best[pick] ||
          (best[j] == best[pick] && (best_from[j] < best_from[pick] ||
                                     (best_from[j] == best_from[pick] && j < pick)))) {
        pick = j;
      }
    }
    in_tree[pick] = 1;
    edges.emplace_back(best_from[pick], static_cast<std::int32_t>(pick));
    for (std::int64_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = dist2(pick, j);
      if (d < best[j] || (d == best[j] && pick < best_from[j])) {
        best[j] = d;
        best_from[j] = static_cast<std::int32_t>(pick);
      }
    }
  }
  return Graph(n, std::move(edges), GraphKind::mst);
}

Graph Graph::from_edge_list(std::int64_t n, std::span<const Edge> edges) {
  if (n < 1) throw InvalidInputError("edge list: need n >= 1");
  std::vector<Edge> cleaned;
  cleaned.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw InvalidInputError("edge list: endpoint out of range");
    }
    if (u == v) throw InvalidInputError("edge list: self-loop on node " + std::to_string(u));
    cleaned.emplace_back(u, v);
  }
  Graph g(n, std::move(cleaned), GraphKind::custom);
  if (!g.is_connected()) throw InvalidInputError("edge list: graph is not connected");
  return g;
}

}  // namespace bcpg
