#ifndef ZOMBIE_COMMUNITY_HPP
#define ZOMBIE_COMMUNITY_HPP

// Louvain community detection on the symmetrized follower graph.
//
// Conventions: A is the symmetric weight matrix of an UndirectedGraph, with
// A_ii holding a self-loop once. k_i = sum_j A_ij, 2m = sum_ij A_ij, and
//
//   Q = 1/2m * sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j).
//
// Per community this is in_c / 2m - (tot_c / 2m)^2 with in_c the sum of A_ij
// over ordered member pairs and tot_c the sum of member degrees. Aggregating
// a community into one node whose self-loop weight is in_c keeps Q invariant,
// which is what lets the levels compose.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zombie/errors.hpp"
#include "zombie/graph.hpp"
#include "zombie/random.hpp"

namespace zombie {

using CommunityId = std::uint32_t;

/// Node-to-community assignment with dense ids in [0, community_count()).
class Partition {
public:
  Partition() = default;

  /// Compacts arbitrary labels to dense ids, preserving the order of label values.
  static Partition from_labels(std::span<const std::uint64_t> labels) {
    std::vector<std::uint64_t> distinct(labels.begin(), labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<CommunityId> dense(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      dense[i] = static_cast<CommunityId>(std::lower_bound(distinct.begin(), distinct.end(), labels[i]) -
                                          distinct.begin());
    }
    return Partition(std::move(dense), distinct.size());
  }

  static Partition from_dense(std::vector<CommunityId> assignment) {
    std::size_t c = 0;
    for (CommunityId x : assignment) c = std::max<std::size_t>(c, std::size_t{x} + 1);
    Partition p(std::move(assignment), c);
    for (const auto& m : p.members_)
      if (m.empty()) throw ValidationError("community ids are not dense");
    return p;
  }

  static Partition singletons(std::size_t n) {
    std::vector<CommunityId> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<CommunityId>(i);
    return Partition(std::move(a), n);
  }

  std::size_t node_count() const noexcept { return assignment_.size(); }
  std::size_t community_count() const noexcept { return members_.size(); }
  CommunityId community_of(NodeId u) const { return assignment_[u]; }
  std::span<const CommunityId> assignment() const noexcept { return assignment_; }
  /// Members of c in increasing node order.
  std::span<const NodeId> members(CommunityId c) const { return members_[c]; }

  friend bool operator==(const Partition& a, const Partition& b) { return a.assignment_ == b.assignment_; }

private:
  Partition(std::vector<CommunityId> assignment, std::size_t count)
      : assignment_(std::move(assignment)), members_(count) {
    for (NodeId u = 0; u < assignment_.size(); ++u) members_[assignment_[u]].push_back(u);
  }

  std::vector<CommunityId> assignment_;
  std::vector<std::vector<NodeId>> members_;
};

enum class ModularityVariant {
  standard,     ///< sum over all ordered same-community pairs, i = j included
  off_diagonal, ///< i = j terms dropped
};

inline double modularity(const UndirectedGraph& g, const Partition& p,
                         ModularityVariant variant = ModularityVariant::standard) {
  if (p.node_count() != g.node_count())
    throw ValidationError("partition covers " + std::to_string(p.node_count()) + " nodes, graph has " +
                          std::to_string(g.node_count()));
  const double two_m = 2.0 * g.total_weight();
  if (two_m <= 0.0) return 0.0;
  std::vector<double> in(p.community_count(), 0.0);
  std::vector<double> tot(p.community_count(), 0.0);
  double diagonal = 0.0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const CommunityId cu = p.community_of(u);
    const double k = g.weighted_degree(u);
    tot[cu] += k;
    auto nb = g.neighbors(u);
    auto w = g.weights(u);
    for (std::size_t e = 0; e < nb.size(); ++e) {
      if (p.community_of(nb[e]) == cu) in[cu] += w[e];
      if (nb[e] == u) diagonal += w[e];
    }
    if (variant == ModularityVariant::off_diagonal) diagonal -= k * k / two_m;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < in.size(); ++c) q += in[c] - tot[c] * tot[c] / two_m;
  if (variant == ModularityVariant::off_diagonal) q -= diagonal;
  return q / two_m;
}

/// Running community sums for local moving.
///
/// gain(i, c) is the modularity change of inserting i into c with i first
/// taken out of its own community; it equals
///   k_{i,c} / m - tot_c * k_i / (2 m^2)
/// where k_{i,c} is i's weight into c (self-loop excluded) and tot_c excludes i.
/// The gain for i's current community is the cost of removing it, so
/// move_delta(i, c) = gain(i, c) - gain(i, community(i)) is the exact
/// change in Q for the move.
class LouvainState {
public:
  explicit LouvainState(const UndirectedGraph& g) : LouvainState(g, Partition::singletons(g.node_count())) {}

  LouvainState(const UndirectedGraph& g, const Partition& p)
      : g_(&g), community_(p.assignment().begin(), p.assignment().end()),
        in_(g.node_count(), 0.0), tot_(g.node_count(), 0.0), self_(g.node_count(), 0.0),
        scratch_(g.node_count(), 0.0), mark_(g.node_count(), 0) {
    if (p.node_count() != g.node_count()) throw ValidationError("partition size does not match graph");
    m_ = g.total_weight();
    for (NodeId u = 0; u < g.node_count(); ++u) {
      self_[u] = g.weight(u, u);
      tot_[community_[u]] += g.weighted_degree(u);
      auto nb = g.neighbors(u);
      auto w = g.weights(u);
      for (std::size_t e = 0; e < nb.size(); ++e)
        if (community_[nb[e]] == community_[u]) in_[community_[u]] += w[e];
    }
  }

  std::size_t node_count() const noexcept { return community_.size(); }
  CommunityId community(NodeId i) const { return community_[i]; }
  std::span<const CommunityId> assignment() const noexcept { return community_; }
  double total_weight() const noexcept { return m_; }

  double modularity() const {
    if (m_ <= 0.0) return 0.0;
    const double two_m = 2.0 * m_;
    double q = 0.0;
    for (std::size_t c = 0; c < in_.size(); ++c) q += in_[c] / two_m - (tot_[c] / two_m) * (tot_[c] / two_m);
    return q;
  }

  /// Weight from i into community c, self-loop excluded.
  double weight_to(NodeId i, CommunityId c) const {
    double k = 0.0;
    auto nb = g_->neighbors(i);
    auto w = g_->weights(i);
    for (std::size_t e = 0; e < nb.size(); ++e)
      if (nb[e] != i && community_[nb[e]] == c) k += w[e];
    return k;
  }

  /// Gain with k_{i,c} already known and tot_c taken as if i were removed.
  double gain_with(NodeId i, CommunityId c, double weight_into_c) const {
    if (m_ <= 0.0) return 0.0;
    const double ki = g_->weighted_degree(i);
    const double tot = tot_[c] - (community_[i] == c ? ki : 0.0);
    return weight_into_c / m_ - tot * ki / (2.0 * m_ * m_);
  }

  double gain(NodeId i, CommunityId c) const { return gain_with(i, c, weight_to(i, c)); }

  double move_delta(NodeId i, CommunityId c) const { return gain(i, c) - gain(i, community_[i]); }

  void move(NodeId i, CommunityId c) {
    const CommunityId from = community_[i];
    if (from == c) return;
    const double k_from = weight_to(i, from);
    const double k_to = weight_to(i, c);
    relocate(i, from, c, k_from, k_to);
  }

  /// One local-moving pass over `order`; returns the number of nodes moved.
  /// Every accepted move has move_delta > 0. Ties keep the current
  /// community, otherwise favour the smallest community id.
  std::size_t sweep(std::span<const NodeId> order) {
    std::size_t moves = 0;
    std::vector<CommunityId> touched;
    for (NodeId i : order) {
      const CommunityId current = community_[i];
      touched.clear();
      auto nb = g_->neighbors(i);
      auto w = g_->weights(i);
      for (std::size_t e = 0; e < nb.size(); ++e) {
        if (nb[e] == i) continue;
        CommunityId c = community_[nb[e]];
        if (!mark_[c]) {
          mark_[c] = 1;
          touched.push_back(c);
        }
        scratch_[c] += w[e];
      }
      CommunityId best = current;
      double best_gain = gain_with(i, current, scratch_[current]);
      for (CommunityId c : touched) {
        if (c == current) continue;
        double g = gain_with(i, c, scratch_[c]);
        if (g > best_gain || (g == best_gain && best != current && c < best)) {
          best = c;
          best_gain = g;
        }
      }
      if (best != current) {
        relocate(i, current, best, scratch_[current], scratch_[best]);
        ++moves;
      }
      for (CommunityId c : touched) {
        scratch_[c] = 0.0;
        mark_[c] = 0;
      }
    }
    return moves;
  }

private:
  void relocate(NodeId i, CommunityId from, CommunityId to, double k_from, double k_to) {
    const double ki = g_->weighted_degree(i);
    tot_[from] -= ki;
    in_[from] -= 2.0 * k_from + self_[i];
    tot_[to] += ki;
    in_[to] += 2.0 * k_to + self_[i];
    community_[i] = to;
  }

  const UndirectedGraph* g_;
  std::vector<CommunityId> community_;
  std::vector<double> in_;
  std::vector<double> tot_;
  std::vector<double> self_;
  std::vector<double> scratch_;
  std::vector<std::uint8_t> mark_;
  double m_ = 0.0;
};

inline double modularity_gain(const LouvainState& state, NodeId i, CommunityId c) { return state.gain(i, c); }

struct LouvainConfig {
  std::size_t max_levels = 100;
  double min_level_gain = 1e-7;
  std::uint64_t seed = 42;
  /// Safety cap on local-moving passes per level.
  std::size_t max_sweeps = 1000;

  void validate() const {
    if (max_levels < 1) throw ValidationError("max_levels must be >= 1");
    if (!(min_level_gain >= 0.0)) throw ValidationError("min_level_gain must be >= 0");
    if (max_sweeps < 1) throw ValidationError("max_sweeps must be >= 1");
  }
};

struct DendrogramLevel {
  std::size_t node_count = 0;
  std::size_t entry_count = 0;
  double total_weight = 0.0;
  double modularity = 0.0;
  std::size_t sweeps = 0;
  /// Level node -> community on the next level.
  Partition partition;
};

struct Dendrogram {
  std::vector<DendrogramLevel> levels;
  Partition partition; ///< on the original nodes
  double modularity = 0.0;

  /// Composes the per-level assignments.
  Partition flatten(std::size_t n) const {
    std::vector<CommunityId> a(n);
    for (NodeId u = 0; u < n; ++u) a[u] = u;
    for (const auto& level : levels)
      for (auto& x : a) x = level.partition.community_of(x);
    return Partition::from_dense(std::move(a));
  }
};

/// Collapses each community into one node. Inter-community weights are summed;
/// intra-community weight becomes the self-loop in_c.
inline UndirectedGraph aggregate(const UndirectedGraph& g, const Partition& p) {
  const std::size_t c_count = p.community_count();
  std::vector<EdgeIndex> offsets(c_count + 1, 0);
  std::vector<NodeId> nbrs;
  std::vector<double> weights;
  std::vector<double> acc(c_count, 0.0);
  std::vector<std::uint8_t> seen(c_count, 0);
  std::vector<CommunityId> touched;
  for (CommunityId c = 0; c < c_count; ++c) {
    touched.clear();
    for (NodeId u : p.members(c)) {
      auto nb = g.neighbors(u);
      auto w = g.weights(u);
      for (std::size_t e = 0; e < nb.size(); ++e) {
        CommunityId d = p.community_of(nb[e]);
        if (!seen[d]) {
          seen[d] = 1;
          touched.push_back(d);
        }
        acc[d] += w[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (CommunityId d : touched) {
      nbrs.push_back(d);
      weights.push_back(acc[d]);
      acc[d] = 0.0;
      seen[d] = 0;
    }
    offsets[c + 1] = nbrs.size();
  }
  return UndirectedGraph(std::move(offsets), std::move(nbrs), std::move(weights));
}

/// Multi-level Louvain. Each level runs local moving until a full pass moves
/// nothing, then aggregates. Stops when a level moves nothing, when a level
/// improves modularity by less than cfg.min_level_gain, or after
/// cfg.max_levels levels.
inline Dendrogram louvain(const UndirectedGraph& g, const LouvainConfig& cfg = {}) {
  cfg.validate();
  if (g.node_count() == 0) throw ValidationError("louvain: graph is empty");
  random::Engine rng(cfg.seed);

  Dendrogram result;
  UndirectedGraph level_graph = g;
  double previous_q = LouvainState(g).modularity();

  for (std::size_t level = 0; level < cfg.max_levels; ++level) {
    LouvainState state(level_graph);
    std::vector<NodeId> order(level_graph.node_count());
    for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
    random::shuffle(std::span<NodeId>(order), rng);

    std::size_t sweeps = 0;
    std::size_t moved = 0;
    while (sweeps < cfg.max_sweeps) {
      ++sweeps;
      std::size_t moves = state.sweep(order);
      moved += moves;
      if (moves == 0) break;
    }

    if (moved == 0 && !result.levels.empty()) break;

    std::vector<std::uint64_t> labels(state.assignment().begin(), state.assignment().end());
    DendrogramLevel lv;
    lv.node_count = level_graph.node_count();
    lv.entry_count = level_graph.entry_count();
    lv.total_weight = level_graph.total_weight();
    lv.sweeps = sweeps;
    lv.partition = Partition::from_labels(labels);
    lv.modularity = state.modularity();
    const double q = lv.modularity;
    result.levels.push_back(std::move(lv));

    if (moved == 0 || q - previous_q < cfg.min_level_gain) break;
    previous_q = q;
    level_graph = aggregate(level_graph, result.levels.back().partition);
  }

  result.partition = result.flatten(g.node_count());
  result.modularity = modularity(g, result.partition);
  return result;
}

/// One directed view per community, arcs kept in their original direction.
inline std::vector<SubgraphView> community_views(const DirectedGraph& g, const Partition& p) {
  if (p.node_count() != g.node_count()) throw ValidationError("partition size does not match graph");
  std::vector<NodeId> local_index(g.node_count());
  for (CommunityId c = 0; c < p.community_count(); ++c) {
    auto m = p.members(c);
    for (NodeId i = 0; i < m.size(); ++i) local_index[m[i]] = i;
  }
  std::vector<SubgraphView> views;
  views.reserve(p.community_count());
  for (CommunityId c = 0; c < p.community_count(); ++c) {
    auto m = p.members(c);
    views.push_back(SubgraphView::build(g, std::vector<NodeId>(m.begin(), m.end()), [&](NodeId q) {
      return p.community_of(q) == c ? local_index[q] : kNoNode;
    }));
  }
  return views;
}

} // namespace zombie

#endif // ZOMBIE_COMMUNITY_HPP
