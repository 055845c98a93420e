#include "bcpgraph/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "bcpgraph/errors.hpp"

namespace bcpg {

namespace {
constexpr std::int64_t kRefreshEvery = 10000;  // periodic drift guard
}

Dataset Dataset::make(std::vector<double> y_in, std::vector<double> x_in, int k) {
  Dataset d;
  d.n = static_cast<std::int64_t>(y_in.size());
  d.k = k;
  if (d.n < 1) throw InvalidInputError("dataset: need at least one observation");
  if (k < 0) throw InvalidInputError("dataset: negative predictor count");
  if (static_cast<std::int64_t>(x_in.size()) != d.n * k) {
    throw InvalidInputError("dataset: predictor array size mismatch");
  }
  for (double v : y_in) {
    if (!std::isfinite(v)) throw InvalidInputError("dataset: non-finite response");
  }
  for (double v : x_in) {
    if (!std::isfinite(v)) throw InvalidInputError("dataset: non-finite predictor");
  }
  d.y = std::move(y_in);
  d.x = std::move(x_in);

  double sum = 0.0;
  for (double v : d.y) sum += v;
  d.y_bar = sum / static_cast<double>(d.n);
  double ss = 0.0;
  for (double v : d.y) {
    const double c = v - d.y_bar;
    ss += c * c;
  }
  d.total_ss = ss;

  d.x_col_range.assign(k, 0.0);
  for (int j = 0; j < k; ++j) {
    double lo = d.xv(0, j), hi = d.xv(0, j);
    for (std::int64_t i = 1; i < d.n; ++i) {
      lo = std::min(lo, d.xv(i, j));
      hi = std::max(hi, d.xv(i, j));
    }
    d.x_col_range[j] = hi - lo;
  }
  return d;
}

void BlockStats::init_dims(int k) {
  sum_x.assign(k, 0.0);
  sxx.assign(static_cast<std::size_t>(k) * k, 0.0);
  sxy.assign(k, 0.0);
}

void BlockStats::add_point(const Dataset& data, std::int32_t node) {
  const int k = data.k;
  const double yv = data.y[node];
  if (n == 0) {
    n = 1;
    sum_y = yv;
    ss = 0.0;
    if (static_cast<int>(sum_x.size()) != k) init_dims(k);
    for (int j = 0; j < k; ++j) {
      sum_x[j] = data.xv(node, j);
      sxy[j] = 0.0;
    }
    std::fill(sxx.begin(), sxx.end(), 0.0);
    return;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double f = static_cast<double>(n) / static_cast<double>(n + 1);
  const double dy = yv - sum_y * inv_n;
  ss += f * dy * dy;
  for (int j = 0; j < k; ++j) {
    const double dxj = data.xv(node, j) - sum_x[j] * inv_n;
    sxy[j] += f * dxj * dy;
    for (int l = 0; l <= j; ++l) {
      const double dxl = data.xv(node, l) - sum_x[l] * inv_n;
      const double upd = f * dxj * dxl;
      sxx[j * k + l] += upd;
      if (l != j) sxx[l * k + j] += upd;
    }
  }
  sum_y += yv;
  for (int j = 0; j < k; ++j) sum_x[j] += data.xv(node, j);
  ++n;
}

void BlockStats::remove_point(const Dataset& data, std::int32_t node) {
  const int k = data.k;
  const double yv = data.y[node];
  if (n <= 1) {
    n = 0;
    sum_y = 0.0;
    ss = 0.0;
    std::fill(sum_x.begin(), sum_x.end(), 0.0);
    std::fill(sxx.begin(), sxx.end(), 0.0);
    std::fill(sxy.begin(), sxy.end(), 0.0);
    return;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double f = static_cast<double>(n) / static_cast<double>(n - 1);
  const double dy = yv - sum_y * inv_n;  // deviation from mean incl. point
  ss -= f * dy * dy;
  if (ss < 0.0) ss = 0.0;
  for (int j = 0; j < k; ++j) {
    const double dxj = data.xv(node, j) - sum_x[j] * inv_n;
    sxy[j] -= f * dxj * dy;
    for (int l = 0; l <= j; ++l) {
      const double dxl = data.xv(node, l) - sum_x[l] * inv_n;
      const double upd = f * dxj * dxl;
      sxx[j * k + l] -= upd;
      if (l != j) sxx[l * k + j] -= upd;
    }
  }
  sum_y -= yv;
  for (int j = 0; j < k; ++j) sum_x[j] -= data.xv(node, j);
  --n;
}

BlockStats BlockStats::merged_stats(const BlockStats& a, const BlockStats& b, int k) {
  BlockStats m;
  m.init_dims(k);
  m.n = a.n + b.n;
  m.sum_y = a.sum_y + b.sum_y;
  const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
  const double f = na * nb / (na + nb);
  const double dy = a.sum_y / na - b.sum_y / nb;
  m.ss = a.ss + b.ss + f * dy * dy;
  for (int j = 0; j < k; ++j) {
    m.sum_x[j] = a.sum_x[j] + b.sum_x[j];
    const double dxj = a.sum_x[j] / na - b.sum_x[j] / nb;
    m.sxy[j] = a.sxy[j] + b.sxy[j] + f * dxj * dy;
    for (int l = 0; l <= j; ++l) {
      const double dxl = a.sum_x[l] / na - b.sum_x[l] / nb;
      const double v = a.sxx[j * k + l] + b.sxx[j * k + l] + f * dxj * dxl;
      m.sxx[j * k + l] = v;
      if (l != j) m.sxx[l * k + j] = v;
    }
  }
  m.tau = a.tau;
  return m;
}

void BlockStats::recompute(const Dataset& data) {
  const int k = data.k;
  n = static_cast<std::int64_t>(members.size());
  init_dims(k);
  sum_y = 0.0;
  for (std::int32_t v : members) {
    sum_y += data.y[v];
    for (int j = 0; j < k; ++j) sum_x[j] += data.xv(v, j);
  }
  const double my = sum_y / static_cast<double>(n);
  ss = 0.0;
  for (std::int32_t v : members) {
    const double dy = data.y[v] - my;
    ss += dy * dy;
    for (int j = 0; j < k; ++j) {
      const double dxj = data.xv(v, j) - sum_x[j] / static_cast<double>(n);
      sxy[j] += dxj * dy;
      for (int l = 0; l <= j; ++l) {
        const double dxl = data.xv(v, l) - sum_x[l] / static_cast<double>(n);
        sxx[j * k + l] += dxj * dxl;
      }
    }
  }
  for (int j = 0; j < k; ++j) {
    for (int l = j + 1; l < k; ++l) sxx[j * k + l] = sxx[l * k + j];
  }
}

BlockStats BlockStats::stats_only() const {
  BlockStats c;
  c.n = n;
  c.sum_y = sum_y;
  c.ss = ss;
  c.sum_x = sum_x;
  c.sxx = sxx;
  c.sxy = sxy;
  c.tau = tau;
  return c;
}

Partition::Partition(const Dataset& data)
    : Partition(data, std::vector<std::int32_t>(data.n, 0)) {}

Partition::Partition(const Dataset& data, std::vector<std::int32_t> membership)
    : membership_(std::move(membership)) {
  if (static_cast<std::int64_t>(membership_.size()) != data.n) {
    throw InvalidInputError("partition: membership length mismatch");
  }
  member_pos_.assign(data.n, -1);
  y_bar_ = data.y_bar;
  for (std::int64_t i = 0; i < data.n; ++i) {
    const std::int32_t id = membership_[i];
    if (id < 0) throw InvalidInputError("partition: negative block id");
    auto [it, fresh] = blocks_.try_emplace(id);
    if (fresh) it->second.init_dims(data.k);
    it->second.members.push_back(static_cast<std::int32_t>(i));
    member_pos_[i] = static_cast<std::int32_t>(it->second.members.size()) - 1;
    next_id_ = std::max(next_id_, id + 1);
  }
  refresh_cache(data);
}

void Partition::refresh_cache(const Dataset& data) {
  sum_ss_ = 0.0;
  sum_zc_ = 0.0;
  for (auto& [id, blk] : blocks_) {
    blk.recompute(data);
    sum_ss_ += blk.ss;
    sum_zc_ += blk.zc(y_bar_);
  }
  moves_since_refresh_ = 0;
}

std::pair<double, double> Partition::within_between(const Dataset&) const {
  return {sum_ss(), sum_zc()};
}

void Partition::rebuild_positions(const BlockStats& blk, std::int32_t id) {
  for (std::size_t p = 0; p < blk.members.size(); ++p) {
    member_pos_[blk.members[p]] = static_cast<std::int32_t>(p);
    membership_[blk.members[p]] = id;
  }
}

void Partition::detach_member(std::int32_t node, std::int32_t block_id) {
  auto& mem = blocks_.at(block_id).members;
  const std::int32_t pos = member_pos_[node];
  const std::int32_t last = mem.back();
  mem[pos] = last;
  member_pos_[last] = pos;
  mem.pop_back();
}

void Partition::attach_member(std::int32_t node, std::int32_t block_id) {
  auto& mem = blocks_.at(block_id).members;
  mem.push_back(node);
  member_pos_[node] = static_cast<std::int32_t>(mem.size()) - 1;
}

void Partition::maybe_periodic_refresh(const Dataset& data) {
  ++moves_applied_;
  if (++moves_since_refresh_ >= kRefreshEvery) refresh_cache(data);
}

MoveResult Partition::move_node(std::int32_t node, std::int32_t target,
                                const Dataset& data, MoveUndo* undo) {
  const std::int32_t from = membership_[node];
  BlockStats& src = blocks_.at(from);
  const bool creating = (target == kNewBlock);
  if (target == from || (creating && src.n == 1)) {
    if (undo) {
      *undo = MoveUndo{};
      undo->no_op = true;
    }
    return {from, from, false, false, true};
  }
  if (!creating && blocks_.find(target) == blocks_.end()) {
    throw InvalidInputError("move_node: unknown target block");
  }

  const std::int32_t to = creating ? next_id_ : target;
  if (undo) {
    undo->no_op = false;
    undo->node = node;
    undo->from = from;
    undo->to = to;
    undo->created_to = creating;
    undo->removed_from = (src.n == 1);
    undo->from_snapshot = src;
    if (!creating) undo->to_snapshot = blocks_.at(to);
    undo->sum_ss = sum_ss_;
    undo->sum_zc = sum_zc_;
    undo->next_id = next_id_;
  }

  sum_ss_ -= src.ss;
  sum_zc_ -= src.zc(y_bar_);
  detach_member(node, from);
  bool removed = false;
  if (src.n == 1) {
    blocks_.erase(from);
    removed = true;
  } else {
    src.remove_point(data, node);
    if (src.n < 2 * data.k) src.tau = 0;  // small blocks are intercept-only
    sum_ss_ += src.ss;
    sum_zc_ += src.zc(y_bar_);
  }

  if (creating) {
    auto [it, fresh] = blocks_.try_emplace(next_id_);
    (void)fresh;
    it->second.init_dims(data.k);
    ++next_id_;
  } else {
    BlockStats& tgt = blocks_.at(to);
    sum_ss_ -= tgt.ss;
    sum_zc_ -= tgt.zc(y_bar_);
  }
  BlockStats& tgt = blocks_.at(to);
  tgt.add_point(data, node);
  attach_member(node, to);
  membership_[node] = to;
  sum_ss_ += tgt.ss;
  sum_zc_ += tgt.zc(y_bar_);

  maybe_periodic_refresh(data);
  return {from, to, creating, removed, false};
}

void Partition::undo_move(const MoveUndo& undo) {
  if (undo.no_op) return;
  if (undo.created_to) {
    blocks_.erase(undo.to);
  } else {
    blocks_[undo.to] = undo.to_snapshot;
    rebuild_positions(blocks_.at(undo.to), undo.to);
  }
  blocks_[undo.from] = undo.from_snapshot;
  rebuild_positions(blocks_.at(undo.from), undo.from);
  sum_ss_ = undo.sum_ss;
  sum_zc_ = undo.sum_zc;
  next_id_ = undo.next_id;
}

void Partition::merge_blocks(std::int32_t keep, std::int32_t other,
                             const Dataset& data, MergeUndo* undo) {
  if (keep == other) throw InvalidInputError("merge_blocks: same block twice");
  BlockStats& a = blocks_.at(keep);
  BlockStats& b = blocks_.at(other);
  if (undo) {
    undo->keep = keep;
    undo->other = other;
    undo->keep_snapshot = a;
    undo->other_snapshot = b;
    undo->sum_ss = sum_ss_;
    undo->sum_zc = sum_zc_;
  }
  sum_ss_ -= a.ss + b.ss;
  sum_zc_ -= a.zc(y_bar_) + b.zc(y_bar_);

  BlockStats m = BlockStats::merged_stats(a, b, data.k);
  m.members = std::move(a.members);
  m.members.insert(m.members.end(), b.members.begin(), b.members.end());
  m.tau = a.tau;
  blocks_[keep] = std::move(m);
  blocks_.erase(other);
  rebuild_positions(blocks_.at(keep), keep);

  sum_ss_ += blocks_.at(keep).ss;
  sum_zc_ += blocks_.at(keep).zc(y_bar_);
  maybe_periodic_refresh(data);
}

void Partition::undo_merge(const MergeUndo& undo) {
  blocks_[undo.keep] = undo.keep_snapshot;
  blocks_[undo.other] = undo.other_snapshot;
  rebuild_positions(blocks_.at(undo.keep), undo.keep);
  rebuild_positions(blocks_.at(undo.other), undo.other);
  sum_ss_ = undo.sum_ss;
  sum_zc_ = undo.sum_zc;
}

namespace {

// Number of distinct labels != own among v's neighbors, with an optional
// single-node override (moved -> label).
int foreign_count(const Graph& graph, const std::vector<std::int32_t>& mem,
                  std::int32_t v, std::int32_t moved, std::int32_t label,
                  std::vector<std::int32_t>& scratch) {
  const std::int32_t own = (v == moved) ? label : mem[v];
  scratch.clear();
  for (std::int32_t u : graph.neighbors(v)) {
    const std::int32_t lu = (u == moved) ? label : mem[u];
    if (lu == own) continue;
    bool seen = false;
    for (std::int32_t s : scratch) {
      if (s == lu) {
        seen = true;
        break;
      }
    }
    if (!seen) scratch.push_back(lu);
  }
  return static_cast<int>(scratch.size());
}

}  // namespace

std::int64_t Partition::boundary_length(const Graph& graph) const {
  std::int64_t total = 0;
  std::vector<std::int32_t> scratch;
  scratch.reserve(16);
  for (std::int64_t v = 0; v < graph.node_count(); ++v) {
    total += foreign_count(graph, membership_, static_cast<std::int32_t>(v), -1,
                           -1, scratch);
  }
  return total;
}

ActiveSet Partition::active_nodes(const Graph& graph) const {
  ActiveSet out;
  for (std::int64_t v = 0; v < graph.node_count(); ++v) {
    const std::int32_t own = membership_[v];
    int diff = 0, total = 0;
    for (std::int32_t u : graph.neighbors(static_cast<std::int32_t>(v))) {
      ++total;
      if (membership_[u] != own) ++diff;
    }
    if (diff > 0) {
      out.nodes.push_back(static_cast<std::int32_t>(v));
      out.island.push_back(diff == total ? 1 : 0);
    }
  }
  return out;
}

void Partition::validate(const Dataset& data) const {
  std::int64_t covered = 0;
  for (const auto& [id, blk] : blocks_) {
    if (blk.n < 1 || blk.n != static_cast<std::int64_t>(blk.members.size())) {
      throw NumericError("partition: block size inconsistency");
    }
    covered += blk.n;
    for (std::int32_t v : blk.members) {
      if (membership_[v] != id) throw NumericError("partition: membership mismatch");
      if (blk.members[member_pos_[v]] != v) {
        throw NumericError("partition: member position mismatch");
      }
    }
    BlockStats fresh;
    fresh.members = blk.members;
    fresh.recompute(data);
    auto close = [](double a, double b) {
      const double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
      return std::fabs(a - b) <= 1e-9 * scale;
    };
    if (!close(fresh.sum_y, blk.sum_y) || !close(fresh.ss, blk.ss)) {
      throw NumericError("partition: cached response stats drifted");
    }
    for (int j = 0; j < data.k; ++j) {
      if (!close(fresh.sum_x[j], blk.sum_x[j]) || !close(fresh.sxy[j], blk.sxy[j])) {
        throw NumericError("partition: cached predictor stats drifted");
      }
      for (int l = 0; l < data.k; ++l) {
        if (!close(fresh.sxx[j * data.k + l], blk.sxx[j * data.k + l])) {
          throw NumericError("partition: cached cross products drifted");
        }
      }
    }
    if (blk.n < 2 * data.k && blk.tau != 0) {
      throw NumericError("partition: tau=1 on a small block");
    }
  }
  if (covered != static_cast<std::int64_t>(membership_.size())) {
    throw NumericError("partition: blocks do not cover all nodes");
  }
}

std::int64_t boundary_delta_move(const Graph& graph,
                                 const std::vector<std::int32_t>& membership,
                                 std::int32_t node, std::int32_t target_label,
                                 std::vector<std::int32_t>& scratch) {
  if (membership[node] == target_label) return 0;
  std::int64_t before = foreign_count(graph, membership, node, -1, -1, scratch);
  std::int64_t after = foreign_count(graph, membership, node, node, target_label, scratch);
  for (std::int32_t u : graph.neighbors(node)) {
    before += foreign_count(graph, membership, u, -1, -1, scratch);
    after += foreign_count(graph, membership, u, node, target_label, scratch);
  }
  return after - before;
}

std::int64_t boundary_delta_merge(const Graph& graph, const Partition& partition,
                                  std::int32_t a, std::int32_t b,
                                  std::vector<std::int32_t>& scratch,
                                  std::vector<std::int32_t>& stamp) {
  const auto& mem = partition.membership();
  if (stamp.size() != mem.size()) stamp.assign(mem.size(), 0);
  static thread_local std::vector<std::int32_t> affected;
  affected.clear();
  auto mark = [&](std::int32_t v) {
    if (!stamp[v]) {
      stamp[v] = 1;
      affected.push_back(v);
    }
  };
  for (std::int32_t id : {a, b}) {
    for (std::int32_t v : partition.block(id).members) {
      mark(v);
      for (std::int32_t u : graph.neighbors(v)) mark(u);
    }
  }
  // Merged labelling: members of b relabelled a.
  std::int64_t delta = 0;
  for (std::int32_t v : affected) {
    stamp[v] = 0;
    const std::int32_t own = mem[v];
    const std::int32_t own_after = (own == b) ? a : own;
    scratch.clear();
    int before = 0, after = 0;
    for (std::int32_t u : graph.neighbors(v)) {
      const std::int32_t lu = mem[u];
      if (lu != own) {
        bool seen = false;
        for (std::int32_t s : scratch) {
          if (s == lu) {
            seen = true;
            break;
          }
        }
        if (!seen) {
          scratch.push_back(lu);
          ++before;
        }
      }
    }
    scratch.clear();
    for (std::int32_t u : graph.neighbors(v)) {
      std::int32_t lu = mem[u];
      if (lu == b) lu = a;
      if (lu != own_after) {
        bool seen = false;
        for (std::int32_t s : scratch) {
          if (s == lu) {
            seen = true;
            break;
          }
        }
        if (!seen) {
          scratch.push_back(lu);
          ++after;
        }
      }
    }
    delta += after - before;
  }
  return delta;
}

}  // namespace bcpg
