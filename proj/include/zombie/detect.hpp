#ifndef ZOMBIE_DETECT_HPP
#define ZOMBIE_DETECT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zombie/community.hpp"
#include "zombie/errors.hpp"
#include "zombie/graph.hpp"
#include "zombie/rank.hpp"

namespace zombie {

enum class QuartileMethod {
  linear,       ///< h = (n - 1) p / 100, interpolate between floor(h) and ceil(h)
  nearest_rank, ///< element ceil(p n / 100), 1-based, at least the first
};

inline const char* to_string(QuartileMethod m) { return m == QuartileMethod::linear ? "linear" : "nearest-rank"; }

inline QuartileMethod parse_quartile_method(std::string_view s) {
  if (s == "linear") return QuartileMethod::linear;
  if (s == "nearest-rank") return QuartileMethod::nearest_rank;
  throw ValidationError("unknown quartile method '" + std::string(s) + "'");
}

/// p-th percentile of ascending `sorted`.
inline double percentile_sorted(std::span<const double> sorted, double p, QuartileMethod method) {
  if (sorted.empty()) throw ValidationError("percentile of an empty sample");
  const std::size_t n = sorted.size();
  if (method == QuartileMethod::nearest_rank) {
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    return sorted[std::clamp<std::size_t>(rank, 1, n) - 1];
  }
  const double h = static_cast<double>(n - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct Quartiles {
  double q1 = 0.0;
  double q3 = 0.0;
};

inline Quartiles quartiles(std::span<const double> values, QuartileMethod method = QuartileMethod::linear) {
  if (values.empty()) throw ValidationError("quartiles of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {percentile_sorted(sorted, 25.0, method), percentile_sorted(sorted, 75.0, method)};
}

/// Lower Tukey fence Q1 - 1.5 (Q3 - Q1). Not clamped; may be negative.
inline double iqr_threshold(std::span<const double> values, QuartileMethod method = QuartileMethod::linear) {
  auto [q1, q3] = quartiles(values, method);
  return q1 - 1.5 * (q3 - q1);
}

/// Importance values of one community, parallel arrays.
struct CommunityScores {
  CommunityId community = 0;
  std::vector<NodeId> nodes;
  std::vector<double> values;
};

inline std::vector<CommunityScores> to_scores(const RankSummary& ranks) {
  std::vector<CommunityScores> out;
  out.reserve(ranks.communities.size());
  for (const auto& c : ranks.communities) out.push_back({c.community, c.members, c.importance.values});
  return out;
}

struct DetectConfig {
  std::size_t min_community_size = 5;
  QuartileMethod method = QuartileMethod::linear;
};

struct ZombieRow {
  NodeId node = 0;
  CommunityId community = 0;
  double pagerank = 0.0;
  double threshold = 0.0; ///< NaN for communities below the minimum size
  bool zombie = false;
};

struct ZombieReport {
  std::vector<ZombieRow> rows; ///< sorted by node
  std::size_t communities = 0;
  std::size_t thresholded_communities = 0;
  std::size_t small_communities = 0;
  std::size_t zombie_count = 0;
  QuartileMethod method = QuartileMethod::linear;
  std::size_t min_community_size = 5;

  std::size_t total() const noexcept { return rows.size(); }
  double proportion() const noexcept {
    return rows.empty() ? 0.0 : static_cast<double>(zombie_count) / static_cast<double>(rows.size());
  }
};

/// Flags a node when its value is strictly below its community's fence.
/// Communities smaller than cfg.min_community_size are labelled normal.
inline ZombieReport detect_zombies(std::span<const CommunityScores> communities, const DetectConfig& cfg = {}) {
  ZombieReport report;
  report.method = cfg.method;
  report.min_community_size = cfg.min_community_size;
  report.communities = communities.size();
  for (const auto& c : communities) {
    if (c.nodes.size() != c.values.size()) throw ValidationError("community scores are misaligned");
    if (c.nodes.empty()) continue;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    if (c.nodes.size() >= cfg.min_community_size) {
      threshold = iqr_threshold(c.values, cfg.method);
      ++report.thresholded_communities;
    } else {
      ++report.small_communities;
    }
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
      const bool zombie = c.values[i] < threshold;
      report.rows.push_back({c.nodes[i], c.community, c.values[i], threshold, zombie});
      report.zombie_count += zombie ? 1 : 0;
    }
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ZombieRow& a, const ZombieRow& b) { return a.node < b.node; });
  return report;
}

} // namespace zombie

#endif // ZOMBIE_DETECT_HPP
