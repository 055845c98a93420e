#include "bcpgraph/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "bcpgraph/errors.hpp"
#include "bcpgraph/rng.hpp"

namespace bcpg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSingularTol = 1e-12;

// One membership candidate for a node: target block (or new), tau choices for
// the affected blocks, and the cached pieces needed to apply it.
struct NodeCandidate {
  std::int32_t target = -1;
  bool is_new = false;
  bool stay = false;
  int tau_src = -1;  // -1: source dies (or stay candidate)
  int tau_tgt = 0;   // for stay candidates: the source block's tau
  double log_weight = -kInf;
  double k_src = 0.0, q_src = 0.0, ld_src = 0.0;
  double k_tgt = 0.0, q_tgt = 0.0, ld_tgt = 0.0;
  std::int64_t delta_l = 0;
};

struct TauOption {
  int tau = 0;
  double k_term = 0.0;
  double q = 0.0;
  double logdet = 0.0;
};

struct Workspace {
  BlockStats src_after;
  BlockStats tgt_after;
  BlockStats merged;
  std::vector<NodeCandidate> cands;
  std::vector<TauOption> src_opts, tgt_opts, stay_opts;
  std::vector<std::int32_t> scratch;
  std::vector<std::int32_t> stamp;
  std::vector<std::int32_t> order;
  std::vector<std::int32_t> members_scratch;
  std::vector<std::int32_t> ids;
  std::vector<std::int32_t> labels;
};

Workspace& workspace() {
  static thread_local Workspace ws;
  return ws;
}

bool column_constant(const BlockStats& stats, int k) {
  for (int j = 0; j < k; ++j) {
    if (stats.sxx[j * k + j] <= kSingularTol) return true;
  }
  return false;
}

// Regression credit for candidate statistics, regenerating jitter when the
// block's design is singular. `members`/`add`/`drop` describe the node set
// the candidate stats were derived from.
BlockCredit credit_for(const BlockStats& stats, const Dataset& data,
                       const WVector& w, std::mt19937_64& rng,
                       DegenerateCounters& counters,
                       const std::vector<std::int32_t>& members,
                       std::int32_t add_node, std::int32_t drop_node) {
  if (!column_constant(stats, data.k)) return block_credit(stats, w);
  auto& ms = workspace().members_scratch;
  ms.clear();
  for (std::int32_t v : members) {
    if (v != drop_node) ms.push_back(v);
  }
  if (add_node >= 0) ms.push_back(add_node);

  BlockStats tmp;
  tmp.members = ms;
  tmp.recompute(data);
  JitterRecord rec = regularize_design(tmp, data, rng);
  ++counters.jitter_events;
  return block_credit(rec.id != 0 ? rec.stats : tmp, w);
}

// Valid tau assignments with their prior/credit pieces for candidate stats.
void tau_options(std::vector<TauOption>& out, const BlockStats& stats,
                 const Dataset& data, const WVector& w, const ModelConfig& config,
                 std::mt19937_64& rng, DegenerateCounters& counters,
                 const std::vector<std::int32_t>& members, std::int32_t add_node,
                 std::int32_t drop_node) {
  out.clear();
  out.push_back({0, log_tau_prior(0, stats.n, config.k, config.d), 0.0, 0.0});
  if (config.k >= 1 && stats.n >= 2 * static_cast<std::int64_t>(config.k)) {
    const BlockCredit credit =
        credit_for(stats, data, w, rng, counters, members, add_node, drop_node);
    out.push_back({1, log_tau_prior(1, stats.n, config.k, config.d), credit.q,
                   credit.logdet});
  }
}

double rho_prior_for(const McmcState& state, const ModelConfig& config,
                     std::int64_t b, std::int64_t boundary) {
  if (config.rho_prior == RhoPrior::graph_alpha) {
    return log_rho_prior_graph(boundary, config.alpha);
  }
  return state.path_prior_table[b];
}

int pick_candidate(const std::vector<NodeCandidate>& cands, std::mt19937_64& rng) {
  double mx = -kInf;
  for (const auto& c : cands) mx = std::max(mx, c.log_weight);
  if (mx == -kInf) return -1;
  double total = 0.0;
  for (const auto& c : cands) total += std::exp(c.log_weight - mx);
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    acc += std::exp(cands[i].log_weight - mx);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(cands.size()) - 1;
}

// Gibbs update of one node's membership over the given target blocks
// (kNewBlock allowed; the current block must be present).
void gibbs_update_node(McmcState& state, const Dataset& data, const Graph& graph,
                       const ModelConfig& config, std::int32_t node,
                       const std::vector<std::int32_t>& targets) {
  auto& ws = workspace();
  Partition& part = state.partition;
  const std::int32_t from = part.block_of(node);
  const BlockStats& src = part.block(from);
  const BlockTermCache& src_cache = state.cache.at(from);

  const bool src_dies = (src.n == 1);
  ws.src_after = src.stats_only();
  if (!src_dies) ws.src_after.remove_point(data, node);

  // tau options for the shrunk source (once per node) and for staying put.
  if (!src_dies) {
    tau_options(ws.src_opts, ws.src_after, data, state.w, config, state.rng,
                state.counters, src.members, -1, node);
  }
  tau_options(ws.stay_opts, src, data, state.w, config, state.rng, state.counters,
              src.members, -1, -1);

  const double w_sum = part.sum_ss();
  const double z_sum = part.sum_zc();
  const std::int64_t b = part.block_count();
  const double src_zc = src.zc(data.y_bar);
  const double src_after_zc = src_dies ? 0.0 : ws.src_after.zc(data.y_bar);

  ws.cands.clear();
  for (std::int32_t target : targets) {
    if (target == from) {
      for (const TauOption& opt : ws.stay_opts) {
        NodeCandidate c;
        c.target = from;
        c.stay = true;
        c.tau_tgt = opt.tau;
        c.k_tgt = opt.k_term;
        c.q_tgt = opt.q;
        c.ld_tgt = opt.logdet;
        DataTermStats stats;
        stats.within = w_sum;
        stats.between = z_sum;
        stats.q_credit = state.q_sum - src_cache.q + opt.q;
        stats.logdet_sum = state.logdet_sum - src_cache.logdet + opt.logdet;
        stats.b_eff = b;
        stats.n_eff = data.n;
        c.log_weight = state.tau_prior_sum - src_cache.tau_term + opt.k_term +
                       rho_prior_for(state, config, b, state.boundary_len) +
                       log_data_term(stats, config.w_limit(0), &state.counters);
        ws.cands.push_back(c);
      }
      continue;
    }

    const bool is_new = (target == kNewBlock);
    if (is_new && src_dies) continue;  // identical to staying put
    const std::int32_t label = is_new ? part.peek_next_id() : target;
    const std::int64_t delta_l =
        config.rho_prior == RhoPrior::graph_alpha
            ? boundary_delta_move(graph, part.membership(), node, label, ws.scratch)
            : 0;

    double tgt_ss_old = 0.0, tgt_zc_old = 0.0, tgt_k_old = 0.0, tgt_q_old = 0.0,
           tgt_ld_old = 0.0;
    if (is_new) {
      ws.tgt_after = BlockStats{};
      ws.tgt_after.init_dims(data.k);
      ws.tgt_after.add_point(data, node);
      tau_options(ws.tgt_opts, ws.tgt_after, data, state.w, config, state.rng,
                  state.counters, ws.tgt_after.members /*empty*/, node, -1);
    } else {
      const BlockStats& tgt = part.block(target);
      const BlockTermCache& tgt_cache = state.cache.at(target);
      tgt_ss_old = tgt.ss;
      tgt_zc_old = tgt.zc(data.y_bar);
      tgt_k_old = tgt_cache.tau_term;
      tgt_q_old = tgt_cache.q;
      tgt_ld_old = tgt_cache.logdet;
      ws.tgt_after = tgt.stats_only();
      ws.tgt_after.add_point(data, node);
      tau_options(ws.tgt_opts, ws.tgt_after, data, state.w, config, state.rng,
                  state.counters, tgt.members, node, -1);
    }

    const double w_cand = w_sum - src.ss + (src_dies ? 0.0 : ws.src_after.ss) -
                          tgt_ss_old + ws.tgt_after.ss;
    const double z_cand = z_sum - src_zc + src_after_zc - tgt_zc_old +
                          ws.tgt_after.zc(data.y_bar);
    const std::int64_t b_cand = b - (src_dies ? 1 : 0) + (is_new ? 1 : 0);
    const double base_k = state.tau_prior_sum - src_cache.tau_term - tgt_k_old;
    const double base_q = state.q_sum - src_cache.q - tgt_q_old;
    const double base_ld = state.logdet_sum - src_cache.logdet - tgt_ld_old;
    const double rho =
        rho_prior_for(state, config, b_cand, state.boundary_len + delta_l);

    const std::size_t n_src_opts = src_dies ? 1 : ws.src_opts.size();
    for (std::size_t si = 0; si < n_src_opts; ++si) {
      const TauOption* so = src_dies ? nullptr : &ws.src_opts[si];
      for (const TauOption& to : ws.tgt_opts) {
        NodeCandidate c;
        c.target = target;
        c.is_new = is_new;
        c.tau_src = so ? so->tau : -1;
        c.tau_tgt = to.tau;
        c.delta_l = delta_l;
        if (so) {
          c.k_src = so->k_term;
          c.q_src = so->q;
          c.ld_src = so->logdet;
        }
        c.k_tgt = to.k_term;
        c.q_tgt = to.q;
        c.ld_tgt = to.logdet;
        DataTermStats stats;
        stats.within = w_cand;
        stats.between = z_cand;
        stats.q_credit = base_q + c.q_src + to.q;
        stats.logdet_sum = base_ld + c.ld_src + to.logdet;
        stats.b_eff = b_cand;
        stats.n_eff = data.n;
        c.log_weight = base_k + c.k_src + to.k_term + rho +
                       log_data_term(stats, config.w_limit(0), &state.counters);
        ws.cands.push_back(c);
      }
    }
  }

  const int pick = pick_candidate(ws.cands, state.rng);
  if (pick < 0) return;
  const NodeCandidate& c = ws.cands[pick];

  if (c.stay) {
    if (part.block(from).tau != c.tau_tgt) part.set_tau(from, c.tau_tgt);
    BlockTermCache& entry = state.cache.at(from);
    state.tau_prior_sum += c.k_tgt - entry.tau_term;
    state.q_sum += c.q_tgt - entry.q;
    state.logdet_sum += c.ld_tgt - entry.logdet;
    entry = {c.k_tgt, c.q_tgt, c.ld_tgt};
    return;
  }

  state.tau_prior_sum -= src_cache.tau_term;
  state.q_sum -= src_cache.q;
  state.logdet_sum -= src_cache.logdet;
  if (!c.is_new) {
    const BlockTermCache& tc = state.cache.at(c.target);
    state.tau_prior_sum -= tc.tau_term;
    state.q_sum -= tc.q;
    state.logdet_sum -= tc.logdet;
  }

  const MoveResult res =
      part.move_node(node, c.is_new ? kNewBlock : c.target, data);
  if (res.removed) {
    state.cache.erase(from);
  } else {
    part.set_tau(from, c.tau_src);
    state.cache[from] = {c.k_src, c.q_src, c.ld_src};
    state.tau_prior_sum += c.k_src;
    state.q_sum += c.q_src;
    state.logdet_sum += c.ld_src;
  }
  part.set_tau(res.to, c.tau_tgt);
  state.cache[res.to] = {c.k_tgt, c.q_tgt, c.ld_tgt};
  state.tau_prior_sum += c.k_tgt;
  state.q_sum += c.q_tgt;
  state.logdet_sum += c.ld_tgt;
  state.boundary_len += c.delta_l;
}

void visit_order(McmcState& state, std::int64_t n, bool randomize,
                 std::vector<std::int32_t>& order) {
  order.resize(n);
  std::iota(order.begin(), order.end(), 0);
  if (randomize) {
    for (std::int64_t i = n - 1; i > 0; --i) {
      const std::int64_t j =
          static_cast<std::int64_t>(uniform01(state.rng) * static_cast<double>(i + 1));
      std::swap(order[i], order[std::min(j, i)]);
    }
  }
}

}  // namespace

void SamplerSchedule::validate() const {
  if (steps < 0 || discard < 0 || burn_in_fpp < 0) {
    throw InvalidInputError("schedule: negative counts");
  }
  if (discard > steps) throw InvalidInputError("schedule: discard exceeds steps");
  if (!(pseudo_app_fraction >= 0.0 && pseudo_app_fraction <= 1.0)) {
    throw InvalidInputError("schedule: pseudo_app_fraction outside [0, 1]");
  }
  if (fpp_per_step < 0 || app_per_step < 0 || merge_per_step < 0 || w_per_step < 0) {
    throw InvalidInputError("schedule: negative pass counts");
  }
  if (membership_thin < 1) throw InvalidInputError("schedule: thin must be >= 1");
}

namespace {
std::vector<std::int32_t> singleton_membership(std::int64_t n) {
  std::vector<std::int32_t> mem(n);
  std::iota(mem.begin(), mem.end(), 0);
  return mem;
}
}  // namespace

// Chains start from the all-singletons partition: the passes coarsen it
// toward the posterior, whereas growing blocks out of a single block would
// have to cross the boundary-prior barrier one node at a time.
McmcState::McmcState(const Dataset& data, const Graph& graph,
                     const ModelConfig& config, std::uint64_t seed)
    : partition(data, singleton_membership(data.n)),
      w(WVector::midpoint(config)),
      rng(seed) {
  if (config.rho_prior == RhoPrior::path_beta) {
    path_prior_table.assign(data.n + 1, -kInf);
    for (std::int64_t b = 1; b <= data.n; ++b) {
      path_prior_table[b] = log_rho_prior_path(b, data.n, config.p0);
    }
  }
  refresh(data, graph, config);
}

void McmcState::refresh(const Dataset& data, const Graph& graph,
                        const ModelConfig& config) {
  cache.clear();
  tau_prior_sum = 0.0;
  q_sum = 0.0;
  logdet_sum = 0.0;
  for (const auto& [id, blk] : partition.blocks()) {
    BlockTermCache entry;
    entry.tau_term = log_tau_prior(blk.tau, blk.n, config.k, config.d);
    if (blk.tau == 1) {
      const BlockCredit credit = credit_for(blk, data, w, rng, counters,
                                            blk.members, -1, -1);
      entry.q = credit.q;
      entry.logdet = credit.logdet;
    }
    cache[id] = entry;
    tau_prior_sum += entry.tau_term;
    q_sum += entry.q;
    logdet_sum += entry.logdet;
  }
  boundary_len = partition.boundary_length(graph);
}

double McmcState::cached_log_joint(const Dataset& data, const ModelConfig& config) {
  DataTermStats stats;
  stats.within = partition.sum_ss();
  stats.between = partition.sum_zc();
  stats.q_credit = q_sum;
  stats.logdet_sum = logdet_sum;
  stats.b_eff = partition.block_count();
  stats.n_eff = data.n;
  const double rho = config.rho_prior == RhoPrior::graph_alpha
                         ? log_rho_prior_graph(boundary_len, config.alpha)
                         : path_prior_table[partition.block_count()];
  return tau_prior_sum + rho + log_data_term(stats, config.w_limit(0), &counters);
}

void full_pixel_pass(McmcState& state, const Dataset& data, const Graph& graph,
                     const ModelConfig& config, const SamplerSchedule& schedule) {
  auto& ws = workspace();
  visit_order(state, data.n, schedule.random_visit_order, ws.order);
  std::vector<std::int32_t> targets;
  for (std::int32_t node : ws.order) {
    targets.clear();
    for (const auto& [id, blk] : state.partition.blocks()) targets.push_back(id);
    if (state.partition.block(state.partition.block_of(node)).n > 1) {
      targets.push_back(kNewBlock);
    }
    gibbs_update_node(state, data, graph, config, node, targets);
  }
}

void active_pixel_pass(McmcState& state, const Dataset& data, const Graph& graph,
                       const ModelConfig& config, bool pseudo,
                       const SamplerSchedule& schedule) {
  auto& ws = workspace();
  ActiveSet snapshot = state.partition.active_nodes(graph);
  if (schedule.random_visit_order && !snapshot.nodes.empty()) {
    for (std::size_t i = snapshot.nodes.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(
          uniform01(state.rng) * static_cast<double>(i + 1));
      std::swap(snapshot.nodes[i], snapshot.nodes[std::min(j, i)]);
    }
  }
  std::vector<std::int32_t> targets;
  for (std::int32_t node : snapshot.nodes) {
    // Re-check at visit time; skip nodes interior by now.
    const auto& mem = state.partition.membership();
    const std::int32_t own = mem[node];
    ws.labels.clear();
    int foreign = 0, total = 0;
    for (std::int32_t u : graph.neighbors(node)) {
      ++total;
      if (mem[u] != own) {
        ++foreign;
        bool seen = false;
        for (std::int32_t s : ws.labels) {
          if (s == mem[u]) {
            seen = true;
            break;
          }
        }
        if (!seen) ws.labels.push_back(mem[u]);
      }
    }
    if (foreign == 0) continue;
    const bool island = (foreign == total);

    targets.clear();
    targets.push_back(own);
    if (!island || pseudo) {
      for (std::int32_t lbl : ws.labels) targets.push_back(lbl);
    } else {
      // Original treatment: only island-preserving targets, i.e. blocks
      // containing none of the node's neighbors.
      for (const auto& [id, blk] : state.partition.blocks()) {
        if (id == own) continue;
        bool touches = false;
        for (std::int32_t lbl : ws.labels) {
          if (lbl == id) {
            touches = true;
            break;
          }
        }
        if (!touches) targets.push_back(id);
      }
      if (schedule.app_island_new_block &&
          state.partition.block(own).n > 1) {
        targets.push_back(kNewBlock);
      }
    }
    gibbs_update_node(state, data, graph, config, node, targets);
  }
}

void block_merge_pass(McmcState& state, const Dataset& data, const Graph& graph,
                      const ModelConfig& config) {
  auto& ws = workspace();
  Partition& part = state.partition;
  ws.ids.clear();
  for (const auto& [id, blk] : part.blocks()) ws.ids.push_back(id);

  for (std::int32_t j : ws.ids) {
    if (part.blocks().find(j) == part.blocks().end()) continue;  // merged away
    const BlockStats& bj = part.block(j);
    const int tau_j = bj.tau;
    const double w_sum = part.sum_ss();
    const double z_sum = part.sum_zc();
    const std::int64_t b = part.block_count();
    const BlockTermCache& cj = state.cache.at(j);

    struct MergeCand {
      std::int32_t other = -1;
      double log_weight = -kInf;
      double k_m = 0.0, q_m = 0.0, ld_m = 0.0;
      std::int64_t delta_l = 0;
    };
    std::vector<MergeCand> cands;
    // Keep-as-is candidate.
    {
      MergeCand keep;
      keep.other = -1;
      DataTermStats stats;
      stats.within = w_sum;
      stats.between = z_sum;
      stats.q_credit = state.q_sum;
      stats.logdet_sum = state.logdet_sum;
      stats.b_eff = b;
      stats.n_eff = data.n;
      keep.log_weight = state.tau_prior_sum +
                        rho_prior_for(state, config, b, state.boundary_len) +
                        log_data_term(stats, config.w_limit(0), &state.counters);
      cands.push_back(keep);
    }
    for (const auto& [s, bs] : part.blocks()) {
      if (s == j || bs.tau != tau_j) continue;
      MergeCand mc;
      mc.other = s;
      ws.merged = BlockStats::merged_stats(bj, bs, data.k);
      mc.k_m = log_tau_prior(tau_j, ws.merged.n, config.k, config.d);
      if (tau_j == 1) {
        // Jitter path needs the union of member lists.
        if (column_constant(ws.merged, data.k)) {
          ws.members_scratch = bj.members;
          ws.members_scratch.insert(ws.members_scratch.end(), bs.members.begin(),
                                    bs.members.end());
          BlockStats tmp;
          tmp.members = ws.members_scratch;
          tmp.recompute(data);
          JitterRecord rec = regularize_design(tmp, data, state.rng);
          ++state.counters.jitter_events;
          const BlockCredit credit = block_credit(rec.id ? rec.stats : tmp, state.w);
          mc.q_m = credit.q;
          mc.ld_m = credit.logdet;
        } else {
          const BlockCredit credit = block_credit(ws.merged, state.w);
          mc.q_m = credit.q;
          mc.ld_m = credit.logdet;
        }
      }
      mc.delta_l = config.rho_prior == RhoPrior::graph_alpha
                       ? boundary_delta_merge(graph, part, j, s, ws.scratch, ws.stamp)
                       : 0;
      const BlockTermCache& cs = state.cache.at(s);
      DataTermStats stats;
      stats.within = w_sum - bj.ss - bs.ss + ws.merged.ss;
      stats.between =
          z_sum - bj.zc(data.y_bar) - bs.zc(data.y_bar) + ws.merged.zc(data.y_bar);
      stats.q_credit = state.q_sum - cj.q - cs.q + mc.q_m;
      stats.logdet_sum = state.logdet_sum - cj.logdet - cs.logdet + mc.ld_m;
      stats.b_eff = b - 1;
      stats.n_eff = data.n;
      mc.log_weight =
          state.tau_prior_sum - cj.tau_term - cs.tau_term + mc.k_m +
          rho_prior_for(state, config, b - 1, state.boundary_len + mc.delta_l) +
          log_data_term(stats, config.w_limit(0), &state.counters);
      cands.push_back(mc);
    }

    double mx = -kInf;
    for (const auto& c : cands) mx = std::max(mx, c.log_weight);
    double total = 0.0;
    for (const auto& c : cands) total += std::exp(c.log_weight - mx);
    const double u = uniform01(state.rng) * total;
    double acc = 0.0;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      acc += std::exp(cands[i].log_weight - mx);
      if (u < acc) {
        pick = i;
        break;
      }
      pick = i;
    }
    const MergeCand& c = cands[pick];
    if (c.other < 0) continue;

    const BlockTermCache cs = state.cache.at(c.other);
    state.tau_prior_sum -= cj.tau_term + cs.tau_term;
    state.q_sum -= cj.q + cs.q;
    state.logdet_sum -= cj.logdet + cs.logdet;
    part.merge_blocks(j, c.other, data);
    state.cache.erase(c.other);
    state.cache[j] = {c.k_m, c.q_m, c.ld_m};
    state.tau_prior_sum += c.k_m;
    state.q_sum += c.q_m;
    state.logdet_sum += c.ld_m;
    state.boundary_len += c.delta_l;
  }
}

void w_pass(McmcState& state, const Dataset& data, const ModelConfig& config) {
  if (config.k == 0) return;
  // Same data factor as log_w_conditional, but with the jitter shield for
  // blocks whose design is singular.
  auto eval = [&](const WVector& w) {
    for (int j = 0; j <= config.k; ++j) {
      if (!(w.w[j] > 0.0 && w.w[j] < config.w_limit(j))) return -kInf;
    }
    DataTermStats stats;
    stats.within = state.partition.sum_ss();
    stats.between = state.partition.sum_zc();
    stats.b_eff = state.partition.block_count();
    stats.n_eff = data.n;
    for (const auto& [id, blk] : state.partition.blocks()) {
      if (blk.tau != 1) continue;
      const BlockCredit credit =
          credit_for(blk, data, w, state.rng, state.counters, blk.members, -1, -1);
      stats.q_credit += credit.q;
      stats.logdet_sum += credit.logdet;
    }
    return log_data_term(stats, config.w_limit(0), &state.counters);
  };
  double current = eval(state.w);
  for (int l = 1; l <= config.k; ++l) {
    WVector cand = state.w;
    cand.w[l] = uniform_range(state.rng, 0.0, config.w_limit(l));
    const double cand_val = eval(cand);
    const double u = uniform01(state.rng);
    if (std::log(std::max(u, 1e-300)) < cand_val - current) {
      state.w = cand;
      current = cand_val;
    }
  }
  // Per-block credits depend on w; rebuild them for the accepted vector.
  state.q_sum = 0.0;
  state.logdet_sum = 0.0;
  for (const auto& [id, blk] : state.partition.blocks()) {
    BlockTermCache& entry = state.cache.at(id);
    if (blk.tau == 1) {
      const BlockCredit credit = credit_for(blk, data, state.w, state.rng,
                                            state.counters, blk.members, -1, -1);
      entry.q = credit.q;
      entry.logdet = credit.logdet;
    } else {
      entry.q = 0.0;
      entry.logdet = 0.0;
    }
    state.q_sum += entry.q;
    state.logdet_sum += entry.logdet;
  }
}

PosteriorSummary run_chain(const Dataset& data, const Graph& graph,
                           const ModelConfig& config,
                           const SamplerSchedule& schedule, std::uint64_t seed,
                           const StepObserver& observer) {
  schedule.validate();
  const auto t0 = std::chrono::steady_clock::now();
  McmcState state(data, graph, config, seed);

  for (std::int64_t i = 0; i < schedule.burn_in_fpp; ++i) {
    full_pixel_pass(state, data, graph, config, schedule);
  }

  PosteriorAccumulator acc(data.n, 1, graph.edge_count(), schedule.membership_thin);
  const int pseudo_count = static_cast<int>(
      std::llround(schedule.pseudo_app_fraction * schedule.app_per_step));
  for (std::int64_t step = 0; step < schedule.steps; ++step) {
    for (int i = 0; i < schedule.fpp_per_step; ++i) {
      full_pixel_pass(state, data, graph, config, schedule);
    }
    for (int i = 0; i < schedule.app_per_step; ++i) {
      active_pixel_pass(state, data, graph, config, i < pseudo_count, schedule);
    }
    for (int i = 0; i < schedule.merge_per_step; ++i) {
      block_merge_pass(state, data, graph, config);
    }
    for (int i = 0; i < schedule.w_per_step; ++i) {
      w_pass(state, data, config);
    }
    ++state.step_index;
    if (step >= schedule.discard) {
      const StepEstimate est =
          step_expectations(state.partition, data, state.w, config, graph,
                            state.q_sum, &state.rng, &state.counters);
      acc.add(est, &state.partition.membership());
      if (observer) observer(state);
    }
  }

  PosteriorSummary summary;
  if (acc.steps() > 0) {
    summary = acc.finish(SummaryMode::graph, graph.edges());
  } else {
    summary.n = data.n;
    summary.mode = SummaryMode::graph;
    summary.edges = graph.edges();
  }
  summary.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary.wtilde_clamp_count = state.counters.wtilde_clamps;
  summary.jitter_count = state.counters.jitter_events;
  return summary;
}

}  // namespace bcpg
