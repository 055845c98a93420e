#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bcpgraph/graph.hpp"

namespace bcpg {

// Per-node response and predictor rows, plus the global quantities every
// likelihood evaluation needs. k = 0 means intercept-only (classical) data.
struct Dataset {
  std::int64_t n = 0;
  int k = 0;
  std::vector<double> y;            // raw responses, length n
  std::vector<double> x;            // row-major n*k
  double y_bar = 0.0;
  double total_ss = 0.0;            // sum (y_i - y_bar)^2
  std::vector<double> x_col_range;  // per predictor, max - min (jitter scale)

  static Dataset make(std::vector<double> y, std::vector<double> x, int k);

  double xv(std::int64_t i, int j) const { return x[i * k + j]; }
};

inline constexpr std::int32_t kNewBlock = -1;

// Sufficient statistics of one block. The moment fields are maintained
// incrementally (Welford-style) by Partition; `members` is kept in sync by
// Partition only, so stats-only copies used for proposal evaluation leave it
// empty and carry the size in `n`.
struct BlockStats {
  std::int64_t n = 0;
  std::vector<std::int32_t> members;
  double sum_y = 0.0;
  double ss = 0.0;                 // sum over block of (y - block mean)^2
  std::vector<double> sum_x;       // k
  std::vector<double> sxx;         // k*k row-major, centered cross products V_S
  std::vector<double> sxy;         // k, centered predictor-response products
  int tau = 0;

  double mean_y() const { return sum_y / static_cast<double>(n); }
  // Between-block contribution n_S * (mean_S - y_bar)^2, computed from sums.
  double zc(double y_bar) const {
    const double c = sum_y - static_cast<double>(n) * y_bar;
    return c * c / static_cast<double>(n);
  }

  void init_dims(int k);
  void add_point(const Dataset& data, std::int32_t node);
  void remove_point(const Dataset& data, std::int32_t node);
  static BlockStats merged_stats(const BlockStats& a, const BlockStats& b, int k);
  // Rebuild moments from `members` (exact two-pass).
  void recompute(const Dataset& data);
  // Copy without the member list, for proposal evaluation.
  BlockStats stats_only() const;
};

struct ActiveSet {
  std::vector<std::int32_t> nodes;
  std::vector<char> island;  // parallel to nodes
};

struct MoveResult {
  std::int32_t from = -1;
  std::int32_t to = -1;
  bool created = false;
  bool removed = false;
  bool no_op = false;
};

struct MoveUndo {
  std::int32_t node = -1;
  std::int32_t from = -1;
  std::int32_t to = -1;
  bool created_to = false;
  bool removed_from = false;
  BlockStats from_snapshot;
  BlockStats to_snapshot;  // valid when !created_to
  double sum_ss = 0.0, sum_zc = 0.0;
  std::int32_t next_id = 0;
  bool no_op = true;
};

struct MergeUndo {
  std::int32_t keep = -1;
  std::int32_t other = -1;
  BlockStats keep_snapshot;
  BlockStats other_snapshot;
  double sum_ss = 0.0, sum_zc = 0.0;
};

// The partition rho: node -> block membership, per-block statistics and the
// running sums behind W and B. Single-owner mutable state; one chain owns one
// Partition.
class Partition {
 public:
  explicit Partition(const Dataset& data);  // all nodes in one block
  Partition(const Dataset& data, std::vector<std::int32_t> membership);

  const std::vector<std::int32_t>& membership() const { return membership_; }
  std::int64_t block_count() const { return static_cast<std::int64_t>(blocks_.size()); }
  std::int32_t block_of(std::int32_t node) const { return membership_[node]; }
  const BlockStats& block(std::int32_t id) const { return blocks_.at(id); }
  const std::map<std::int32_t, BlockStats>& blocks() const { return blocks_; }
  std::int32_t peek_next_id() const { return next_id_; }

  void set_tau(std::int32_t id, int tau) { blocks_.at(id).tau = tau; }

  // Running W (within) and B (between); W + B = total_ss up to rounding.
  double sum_ss() const { return sum_ss_ < 0 ? 0.0 : sum_ss_; }
  double sum_zc() const { return sum_zc_ < 0 ? 0.0 : sum_zc_; }
  std::pair<double, double> within_between(const Dataset& data) const;

  // Moves `node` into `target` (an existing block id, or kNewBlock). Updates
  // stats incrementally in O(k^2); an emptied source block is removed. When
  // `undo` is given, enough state is captured to roll back bit-identically.
  MoveResult move_node(std::int32_t node, std::int32_t target, const Dataset& data,
                       MoveUndo* undo = nullptr);
  void undo_move(const MoveUndo& undo);

  // Merges `other` into `keep` (keep's id survives).
  void merge_blocks(std::int32_t keep, std::int32_t other, const Dataset& data,
                    MergeUndo* undo = nullptr);
  void undo_merge(const MergeUndo& undo);

  // Total boundary length l(rho): for each node, the number of distinct
  // foreign blocks among its neighbors.
  std::int64_t boundary_length(const Graph& graph) const;

  ActiveSet active_nodes(const Graph& graph) const;

  // Exact rebuild of all moments and running sums from membership.
  void refresh_cache(const Dataset& data);
  // Throws NumericError/InvalidInputError if internal state is inconsistent
  // with a from-scratch recompute (relative tolerance 1e-9). Test hook.
  void validate(const Dataset& data) const;

  std::int64_t moves_applied() const { return moves_applied_; }

 private:
  void attach_member(std::int32_t node, std::int32_t block_id);
  void detach_member(std::int32_t node, std::int32_t block_id);
  void rebuild_positions(const BlockStats& blk, std::int32_t id);
  void maybe_periodic_refresh(const Dataset& data);

  std::vector<std::int32_t> membership_;
  std::vector<std::int32_t> member_pos_;  // index of node in its block's members
  std::map<std::int32_t, BlockStats> blocks_;
  std::int32_t next_id_ = 0;
  double sum_ss_ = 0.0;
  double sum_zc_ = 0.0;
  double y_bar_ = 0.0;
  std::int64_t moves_applied_ = 0;
  std::int64_t moves_since_refresh_ = 0;
};

// l(rho) change if `node` moved to `target_label` (pass Partition::peek_next_id
// for a fresh block). Only nodes in {node} + N(node) can change contribution.
std::int64_t boundary_delta_move(const Graph& graph,
                                 const std::vector<std::int32_t>& membership,
                                 std::int32_t node, std::int32_t target_label,
                                 std::vector<std::int32_t>& scratch);

// l(rho) change if blocks a and b were merged (label of b replaced by a).
std::int64_t boundary_delta_merge(const Graph& graph, const Partition& partition,
                                  std::int32_t a, std::int32_t b,
                                  std::vector<std::int32_t>& scratch,
                                  std::vector<std::int32_t>& stamp);

}  // namespace bcpg
