#ifndef ZOMBIE_RANK_HPP
#define ZOMBIE_RANK_HPP

// Credibility-weighted PageRank inside one community.
//
// An account's IO score is fans / (fans + followees). Instead of splitting
// its rank evenly over its followees, a node u hands followee v the share
// IO_v / sum_{w in out(u)} IO_w, so followees that are themselves followed
// receive more. Rank is computed by damped power iteration:
//
//   x'_v = (1 - d) / n + d * (sum_{u -> v} W_uv x_u + dangling / n)
//
// where dangling is the rank held by nodes without followees.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "zombie/community.hpp"
#include "zombie/errors.hpp"
#include "zombie/graph.hpp"
#include "zombie/ingest.hpp"

namespace zombie {

/// fans / (follows + fans); 0 for an account with neither.
inline double io_score(std::uint64_t fan_num, std::uint64_t follow_num) {
  if (fan_num == 0) return 0.0;
  return static_cast<double>(fan_num) / (static_cast<double>(follow_num) + static_cast<double>(fan_num));
}

enum class IoSource { local_degrees, profile_counts };

inline const char* to_string(IoSource s) { return s == IoSource::local_degrees ? "local" : "profile"; }

/// Per-node lookup of profiles by NodeId; entries may be null.
using ProfileIndex = std::vector<const UserProfile*>;

inline ProfileIndex index_profiles(std::span<const UserProfile> profiles, std::size_t node_count) {
  ProfileIndex idx(node_count, nullptr);
  for (const auto& p : profiles)
    if (p.id < node_count) idx[p.id] = &p;
  return idx;
}

/// IO score of every member of `view`, indexed by local id. Under
/// profile_counts a member without usable follower/followee counts falls
/// back to its local degrees and is tallied in `fallbacks`.
inline std::vector<double> io_scores_for(const SubgraphView& view, IoSource source,
                                         const ProfileIndex* profiles = nullptr,
                                         std::size_t* fallbacks = nullptr) {
  std::vector<double> io(view.node_count());
  std::size_t missing = 0;
  for (NodeId a = 0; a < view.node_count(); ++a) {
    if (source == IoSource::profile_counts) {
      const UserProfile* p = profiles ? (*profiles)[view.to_parent(a)] : nullptr;
      if (p && p->followers && p->followees && *p->followers >= 0 && *p->followees >= 0) {
        io[a] = io_score(static_cast<std::uint64_t>(*p->followers), static_cast<std::uint64_t>(*p->followees));
        continue;
      }
      ++missing;
    }
    io[a] = io_score(view.in_degree(a), view.out_degree(a));
  }
  if (fallbacks) *fallbacks += missing;
  return io;
}

/// Share of u's rank passed along each local arc, aligned with arc order
/// (index view.out_offset(u) + k for the k-th followee of u). A node whose
/// followees all score 0 splits evenly.
inline std::vector<double> transition_weights(const SubgraphView& view, std::span<const double> io) {
  if (io.size() != view.node_count()) throw ValidationError("IO scores do not cover the subgraph");
  std::vector<double> w(view.arc_count());
  for (NodeId u = 0; u < view.node_count(); ++u) {
    auto out = view.out_neighbors(u);
    if (out.empty()) continue;
    const EdgeIndex base = view.out_offset(u);
    double denom = 0.0;
    for (NodeId v : out) denom += io[v];
    for (std::size_t k = 0; k < out.size(); ++k)
      w[base + k] = denom > 0.0 ? io[out[k]] / denom : 1.0 / static_cast<double>(out.size());
  }
  return w;
}

enum class RankMode { even, uneven };

inline const char* to_string(RankMode m) { return m == RankMode::even ? "even" : "uneven"; }

struct RankConfig {
  double damping = 0.85;
  double tolerance = 1e-10;
  std::size_t max_iterations = 1000;
  RankMode mode = RankMode::uneven;

  void validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw ValidationError("damping must be in (0, 1]");
    if (!(tolerance > 0.0)) throw ValidationError("tolerance must be > 0");
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  }
};

struct ImportanceVector {
  std::vector<double> values;
  std::size_t iterations = 0;
  double residual = 0.0; ///< L1 change of the last iteration
  bool converged = false;
};

/// Optional per-iteration record, for diagnostics and tests.
struct RankTrace {
  std::vector<double> residuals;
  std::vector<double> sums;
};

inline ImportanceVector pagerank(const SubgraphView& view, const RankConfig& cfg,
                                 std::optional<std::span<const double>> io = std::nullopt,
                                 RankTrace* trace = nullptr) {
  cfg.validate();
  const std::size_t n = view.node_count();
  if (n == 0) throw ValidationError("pagerank: subgraph is empty");

  std::vector<double> w;
  if (cfg.mode == RankMode::uneven) {
    if (!io) throw ValidationError("pagerank: uneven mode needs IO scores");
    w = transition_weights(view, *io);
  } else {
    w.resize(view.arc_count());
    for (NodeId u = 0; u < n; ++u) {
      auto d = view.out_degree(u);
      for (std::size_t k = 0; k < d; ++k) w[view.out_offset(u) + k] = 1.0 / static_cast<double>(d);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const double d = cfg.damping;
  ImportanceVector result;
  std::vector<double> x(n, inv_n);
  std::vector<double> next(n);

  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    double dangling = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      auto out = view.out_neighbors(u);
      if (out.empty()) {
        dangling += x[u];
        continue;
      }
      const EdgeIndex base = view.out_offset(u);
      for (std::size_t k = 0; k < out.size(); ++k) next[out[k]] += w[base + k] * x[u];
    }
    const double base_share = (1.0 - d) * inv_n + d * dangling * inv_n;
    double residual = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      next[v] = base_share + d * next[v];
      residual += std::abs(next[v] - x[v]);
    }
    x.swap(next);
    result.iterations = it + 1;
    result.residual = residual;
    if (trace) {
      trace->residuals.push_back(residual);
      double s = 0.0;
      for (double v : x) s += v;
      trace->sums.push_back(s);
    }
    if (residual < cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.values = std::move(x);
  return result;
}

/// Rank results for one community, members in increasing node order.
struct CommunityRanks {
  CommunityId community = 0;
  std::vector<NodeId> members;
  std::vector<double> io;
  ImportanceVector importance;
};

struct RankOptions {
  IoSource io_source = IoSource::local_degrees;
  const ProfileIndex* profiles = nullptr;
  unsigned threads = 1;
};

struct RankSummary {
  std::vector<CommunityRanks> communities; ///< indexed by community id
  std::size_t io_fallbacks = 0;
  std::size_t non_converged = 0;
};

/// PageRank of every community, distributed over worker threads. Output is
/// independent of the thread count.
inline RankSummary rank_all_communities(const DirectedGraph& g, const Partition& p, const RankConfig& cfg,
                                        const RankOptions& opts = {}) {
  cfg.validate();
  if (p.node_count() != g.node_count()) throw ValidationError("partition size does not match graph");
  if (opts.io_source == IoSource::profile_counts && !opts.profiles)
    throw ValidationError("profile IO source needs profiles");

  std::vector<NodeId> local_index(g.node_count());
  for (CommunityId c = 0; c < p.community_count(); ++c) {
    auto m = p.members(c);
    for (NodeId i = 0; i < m.size(); ++i) local_index[m[i]] = i;
  }

  RankSummary summary;
  summary.communities.resize(p.community_count());
  std::vector<std::size_t> fallbacks(p.community_count(), 0);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < p.community_count();) {
      auto m = p.members(static_cast<CommunityId>(c));
      SubgraphView view = SubgraphView::build(g, std::vector<NodeId>(m.begin(), m.end()), [&](NodeId q) {
        return p.community_of(q) == c ? local_index[q] : kNoNode;
      });
      CommunityRanks& out = summary.communities[c];
      out.community = static_cast<CommunityId>(c);
      out.members.assign(m.begin(), m.end());
      out.io = io_scores_for(view, opts.io_source, opts.profiles, &fallbacks[c]);
      out.importance = pagerank(view, cfg, std::span<const double>(out.io));
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(p.community_count())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t c = 0; c < p.community_count(); ++c) {
    summary.io_fallbacks += fallbacks[c];
    if (!summary.communities[c].importance.converged) ++summary.non_converged;
  }
  return summary;
}

} // namespace zombie

#endif // ZOMBIE_RANK_HPP
