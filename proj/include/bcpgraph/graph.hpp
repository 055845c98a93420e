#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace bcpg {

enum class GraphKind { path, grid4, grid8, mst, custom };
enum class Neighborhood { four, eight };

using Edge = std::pair<std::int32_t, std::int32_t>;  // (u, v), u < v

// Undirected, simple, connected graph on nodes 0..n-1. Immutable after
// construction; safe for concurrent reads from any number of chains.
class Graph {
 public:
  static Graph path(std::int64_t n);
  static Graph grid(std::int64_t rows, std::int64_t cols, Neighborhood nb);
  // Euclidean minimum spanning tree via Prim; ties between equal-length
  // candidate edges broken by smallest (tree endpoint id, new endpoint id).
  static Graph mst_from_coords(std::span<const double> x,
                               std::span<const double> y);
  // Deduplicates; rejects self-loops, out-of-range endpoints and
  // disconnected results.
  static Graph from_edge_list(std::int64_t n, std::span<const Edge> edges);

  std::int64_t node_count() const { return n_; }
  std::int64_t edge_count() const { return static_cast<std::int64_t>(edges_.size()); }
  GraphKind kind() const { return kind_; }

  std::span<const std::int32_t> neighbors(std::int32_t v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  std::int32_t degree(std::int32_t v) const {
    return offsets_[v + 1] - offsets_[v];
  }
  // Lexicographically sorted, u < v per edge.
  const std::vector<Edge>& edges() const { return edges_; }

  // True iff a BFS from node 0 reaches every node.
  bool is_connected() const;

 private:
  Graph(std::int64_t n, std::vector<Edge> edges, GraphKind kind);

  std::int64_t n_ = 0;
  GraphKind kind_ = GraphKind::custom;
  std::vector<Edge> edges_;
  std::vector<std::int32_t> offsets_;  // n+1, CSR
  std::vector<std::int32_t> adj_;      // sorted per node
};

}  // namespace bcpg
