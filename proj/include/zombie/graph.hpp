#ifndef ZOMBIE_GRAPH_HPP
#define ZOMBIE_GRAPH_HPP

// Compressed adjacency storage for the follower graph.
//
// DirectedGraph keeps both directions as offset-indexed arrays: out_[off..]
// lists successors (followees), in_[off..] lists predecessors (fans), both
// sorted. UndirectedGraph is the weighted symmetric view that community
// detection works on; aggregated levels keep intra-community weight on the
// diagonal as self-loops.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "zombie/errors.hpp"

namespace zombie {

using NodeId = std::uint32_t;
using EdgeIndex = std::uint64_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Arc {
  NodeId source = 0;
  NodeId target = 0;
  bool reciprocal = false;

  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Counts of input arcs that build_graph discarded.
struct BuildStats {
  std::size_t dropped_self_loops = 0;
  std::size_t dropped_duplicates = 0;
};

struct Degrees {
  std::size_t in = 0;
  std::size_t out = 0;

  friend bool operator==(const Degrees&, const Degrees&) = default;
};

class DirectedGraph {
public:
  DirectedGraph() : out_offsets_(1, 0), in_offsets_(1, 0) {}

  std::size_t node_count() const noexcept { return out_offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return out_targets_.size(); }

  std::span<const NodeId> out_neighbors(NodeId u) const {
    return {out_targets_.data() + out_offsets_[u], out_targets_.data() + out_offsets_[u + 1]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {in_sources_.data() + in_offsets_[v], in_sources_.data() + in_offsets_[v + 1]};
  }
  /// Reciprocal flags aligned with out_neighbors(u).
  std::span<const std::uint8_t> out_flags(NodeId u) const {
    return {out_flags_.data() + out_offsets_[u], out_flags_.data() + out_offsets_[u + 1]};
  }

  std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  bool has_arc(NodeId u, NodeId v) const {
    auto out = out_neighbors(u);
    return std::binary_search(out.begin(), out.end(), v);
  }

  /// All arcs in (source, target) order.
  std::vector<Arc> arcs() const {
    std::vector<Arc> result;
    result.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u) {
      auto out = out_neighbors(u);
      auto flags = out_flags(u);
      for (std::size_t k = 0; k < out.size(); ++k) result.push_back({u, out[k], flags[k] != 0});
    }
    return result;
  }

  const std::vector<EdgeIndex>& out_offsets() const noexcept { return out_offsets_; }
  const std::vector<NodeId>& out_targets() const noexcept { return out_targets_; }

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.out_offsets_ == b.out_offsets_ && a.out_targets_ == b.out_targets_ &&
           a.out_flags_ == b.out_flags_;
  }

  /// Builds from sorted, duplicate-free out-adjacency. The reverse index is derived.
  static DirectedGraph from_sorted_out(std::vector<EdgeIndex> offsets, std::vector<NodeId> targets,
                                       std::vector<std::uint8_t> flags) {
    DirectedGraph g;
    g.out_offsets_ = std::move(offsets);
    g.out_targets_ = std::move(targets);
    g.out_flags_ = std::move(flags);
    g.build_reverse();
    return g;
  }

private:
  void build_reverse() {
    const std::size_t n = node_count();
    in_offsets_.assign(n + 1, 0);
    for (NodeId v : out_targets_) ++in_offsets_[v + 1];
    std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
    in_sources_.resize(out_targets_.size());
    std::vector<EdgeIndex> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
    // Sources are visited in increasing order, so each in-list comes out sorted.
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v : out_neighbors(u)) in_sources_[cursor[v]++] = u;
    }
  }

  std::vector<EdgeIndex> out_offsets_;
  std::vector<NodeId> out_targets_;
  std::vector<std::uint8_t> out_flags_;
  std::vector<EdgeIndex> in_offsets_;
  std::vector<NodeId> in_sources_;
};

/// Builds a DirectedGraph from an arc list.
///
/// Self-loops and repeated arcs are dropped and tallied in `stats`. An arc
/// flagged reciprocal also materializes its reverse; the flag is then set on
/// both directions. Reverse arcs created this way are not counted as
/// duplicates when the input also lists them.
inline DirectedGraph build_graph(std::span<const Arc> arcs, std::size_t node_count,
                                 BuildStats* stats = nullptr) {
  if (node_count >= kNoNode) throw ValidationError("node count exceeds NodeId range");

  struct Entry {
    NodeId u, v;
    bool flag;
    bool explicit_arc;
  };
  std::vector<Entry> entries;
  entries.reserve(arcs.size());
  BuildStats local;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const Arc& a = arcs[i];
    if (a.source >= node_count || a.target >= node_count) {
      throw ValidationError("arc " + std::to_string(i) + " (" + std::to_string(a.source) + " -> " +
                            std::to_string(a.target) + ") has an endpoint outside [0, " +
                            std::to_string(node_count) + ")");
    }
    if (a.source == a.target) {
      ++local.dropped_self_loops;
      continue;
    }
    entries.push_back({a.source, a.target, a.reciprocal, true});
    if (a.reciprocal) entries.push_back({a.target, a.source, true, false});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.u, x.v) < std::tie(y.u, y.v);
  });

  std::vector<EdgeIndex> offsets(node_count + 1, 0);
  std::vector<NodeId> targets;
  std::vector<std::uint8_t> flags;
  targets.reserve(entries.size());
  flags.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i;
    bool flag = false;
    std::size_t explicit_count = 0;
    while (j < entries.size() && entries[j].u == entries[i].u && entries[j].v == entries[i].v) {
      flag = flag || entries[j].flag;
      explicit_count += entries[j].explicit_arc ? 1 : 0;
      ++j;
    }
    if (explicit_count > 1) local.dropped_duplicates += explicit_count - 1;
    targets.push_back(entries[i].v);
    flags.push_back(flag ? 1 : 0);
    ++offsets[entries[i].u + 1];
    i = j;
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());

  // A flag on either direction marks the pair; both arcs exist by now.
  for (NodeId u = 0; u < node_count; ++u) {
    for (EdgeIndex k = offsets[u]; k < offsets[u + 1]; ++k) {
      if (!flags[k]) continue;
      NodeId v = targets[k];
      auto first = targets.begin() + static_cast<std::ptrdiff_t>(offsets[v]);
      auto last = targets.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]);
      auto it = std::lower_bound(first, last, u);
      flags[static_cast<std::size_t>(it - targets.begin())] = 1;
    }
  }

  if (stats) *stats = local;
  return DirectedGraph::from_sorted_out(std::move(offsets), std::move(targets), std::move(flags));
}

inline Degrees degrees(const DirectedGraph& g, NodeId u) {
  if (u >= g.node_count()) throw ValidationError("node " + std::to_string(u) + " out of range");
  return {g.in_degree(u), g.out_degree(u)};
}

/// Symmetric weighted graph. A self-loop entry (i, w) appears once in i's
/// list and contributes w once to i's weighted degree; `total_weight()` is
/// half the sum of all matrix entries.
class UndirectedGraph {
public:
  UndirectedGraph() : offsets_(1, 0) {}

  UndirectedGraph(std::vector<EdgeIndex> offsets, std::vector<NodeId> neighbors,
                  std::vector<double> weights)
      : offsets_(std::move(offsets)), neighbors_(std::move(neighbors)), weights_(std::move(weights)) {
    degree_.assign(node_count(), 0.0);
    double sum = 0.0;
    for (NodeId u = 0; u < node_count(); ++u) {
      double k = 0.0;
      for (EdgeIndex e = offsets_[u]; e < offsets_[u + 1]; ++e) k += weights_[e];
      degree_[u] = k;
      sum += k;
    }
    total_weight_ = sum / 2.0;
  }

  std::size_t node_count() const noexcept { return offsets_.size() - 1; }
  /// Number of stored adjacency entries (each off-diagonal edge twice).
  std::size_t entry_count() const noexcept { return neighbors_.size(); }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {neighbors_.data() + offsets_[u], neighbors_.data() + offsets_[u + 1]};
  }
  std::span<const double> weights(NodeId u) const {
    return {weights_.data() + offsets_[u], weights_.data() + offsets_[u + 1]};
  }

  double weighted_degree(NodeId u) const { return degree_[u]; }
  double total_weight() const noexcept { return total_weight_; }

  /// A_uv; 0 when absent.
  double weight(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return 0.0;
    return weights_[offsets_[u] + static_cast<EdgeIndex>(it - nb.begin())];
  }

private:
  std::vector<EdgeIndex> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<double> weights_;
  std::vector<double> degree_;
  double total_weight_ = 0.0;
};

/// One weight-1 edge per adjacent pair; mutual follows collapse to one edge.
inline UndirectedGraph symmetrize(const DirectedGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<EdgeIndex> offsets(n + 1, 0);
  std::vector<NodeId> neighbors;
  neighbors.reserve(2 * g.edge_count());
  for (NodeId u = 0; u < n; ++u) {
    auto out = g.out_neighbors(u);
    auto in = g.in_neighbors(u);
    std::set_union(out.begin(), out.end(), in.begin(), in.end(), std::back_inserter(neighbors));
    offsets[u + 1] = neighbors.size();
  }
  std::vector<double> weights(neighbors.size(), 1.0);
  return UndirectedGraph(std::move(offsets), std::move(neighbors), std::move(weights));
}

/// Directed subgraph induced by a member set, with local ids 0..size-1 in
/// increasing parent-id order. The parent must outlive the view.
class SubgraphView {
public:
  std::size_t node_count() const noexcept { return members_.size(); }
  std::size_t arc_count() const noexcept { return out_targets_.size(); }

  const DirectedGraph& parent() const noexcept { return *parent_; }
  std::span<const NodeId> members() const noexcept { return members_; }

  NodeId to_parent(NodeId local) const { return members_[local]; }
  std::optional<NodeId> to_local(NodeId parent_id) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), parent_id);
    if (it == members_.end() || *it != parent_id) return std::nullopt;
    return static_cast<NodeId>(it - members_.begin());
  }

  std::span<const NodeId> out_neighbors(NodeId local) const {
    return {out_targets_.data() + out_offsets_[local], out_targets_.data() + out_offsets_[local + 1]};
  }
  std::span<const NodeId> in_neighbors(NodeId local) const {
    return {in_sources_.data() + in_offsets_[local], in_sources_.data() + in_offsets_[local + 1]};
  }
  std::size_t out_degree(NodeId local) const { return out_offsets_[local + 1] - out_offsets_[local]; }
  std::size_t in_degree(NodeId local) const { return in_offsets_[local + 1] - in_offsets_[local]; }
  /// Offset of local's first out-arc in arc order; arc data can be stored aligned with it.
  EdgeIndex out_offset(NodeId local) const { return out_offsets_[local]; }

  /// Local arcs in (source, target) order.
  std::vector<std::pair<NodeId, NodeId>> local_arcs() const {
    std::vector<std::pair<NodeId, NodeId>> result;
    result.reserve(arc_count());
    for (NodeId a = 0; a < node_count(); ++a)
      for (NodeId b : out_neighbors(a)) result.emplace_back(a, b);
    return result;
  }

  /// `local_of(p)` must give p's local id, or kNoNode for non-members.
  /// `members` must be sorted and consistent with `local_of`.
  template <typename LocalOf>
  static SubgraphView build(const DirectedGraph& parent, std::vector<NodeId> members,
                            LocalOf&& local_of) {
    SubgraphView view;
    view.parent_ = &parent;
    view.members_ = std::move(members);
    const std::size_t n = view.members_.size();
    view.out_offsets_.assign(n + 1, 0);
    view.in_offsets_.assign(n + 1, 0);
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId p : parent.out_neighbors(view.members_[a])) {
        NodeId b = local_of(p);
        if (b == kNoNode) continue;
        view.out_targets_.push_back(b);
        ++view.in_offsets_[b + 1];
      }
      view.out_offsets_[a + 1] = view.out_targets_.size();
    }
    std::partial_sum(view.in_offsets_.begin(), view.in_offsets_.end(), view.in_offsets_.begin());
    view.in_sources_.resize(view.out_targets_.size());
    std::vector<EdgeIndex> cursor(view.in_offsets_.begin(), view.in_offsets_.end() - 1);
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b : view.out_neighbors(a)) view.in_sources_[cursor[b]++] = a;
    return view;
  }

private:
  const DirectedGraph* parent_ = nullptr;
  std::vector<NodeId> members_;
  std::vector<EdgeIndex> out_offsets_;
  std::vector<NodeId> out_targets_;
  std::vector<EdgeIndex> in_offsets_;
  std::vector<NodeId> in_sources_;
};

inline SubgraphView induced_subgraph(const DirectedGraph& g, std::span<const NodeId> members) {
  if (members.empty()) throw ValidationError("induced_subgraph: member set is empty");
  std::vector<NodeId> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.back() >= g.node_count())
    throw ValidationError("induced_subgraph: member " + std::to_string(sorted.back()) + " out of range");
  std::vector<NodeId> local_of(g.node_count(), kNoNode);
  for (NodeId i = 0; i < sorted.size(); ++i) local_of[sorted[i]] = i;
  return SubgraphView::build(g, std::move(sorted), [&](NodeId p) { return local_of[p]; });
}

} // namespace zombie

#endif // ZOMBIE_GRAPH_HPP
