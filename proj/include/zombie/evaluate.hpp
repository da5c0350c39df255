#ifndef ZOMBIE_EVALUATE_HPP
#define ZOMBIE_EVALUATE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zombie/community.hpp"
#include "zombie/detect.hpp"
#include "zombie/errors.hpp"
#include "zombie/graph.hpp"
#include "zombie/rank.hpp"

namespace zombie {

/// Positive class is "zombie".
struct ConfusionMatrix {
  std::size_t tp = 0; ///< zombie flagged zombie
  std::size_t fn = 0; ///< zombie flagged normal
  std::size_t fp = 0; ///< normal flagged zombie
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fn + fp + tn; }
  /// Swaps the roles of truth and prediction.
  ConfusionMatrix transposed() const noexcept { return {tp, fp, fn, tn}; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// node -> is_zombie
using LabelMap = std::map<NodeId, bool>;

inline ConfusionMatrix confusion(const LabelMap& predicted, const LabelMap& truth) {
  std::vector<NodeId> missing_pred, missing_truth;
  for (const auto& [id, _] : truth)
    if (!predicted.count(id)) missing_pred.push_back(id);
  for (const auto& [id, _] : predicted)
    if (!truth.count(id)) missing_truth.push_back(id);
  if (!missing_pred.empty() || !missing_truth.empty()) {
    auto list = [](const std::vector<NodeId>& ids) {
      std::string s;
      for (std::size_t i = 0; i < ids.size() && i < 20; ++i) s += (i ? " " : "") + std::to_string(ids[i]);
      if (ids.size() > 20) s += " ...";
      return s;
    };
    std::string msg = "label sets differ;";
    if (!missing_pred.empty()) msg += " no prediction for: " + list(missing_pred) + ";";
    if (!missing_truth.empty()) msg += " no truth for: " + list(missing_truth) + ";";
    throw ValidationError(msg);
  }
  ConfusionMatrix cm;
  for (const auto& [id, is_zombie] : truth) {
    const bool flagged = predicted.at(id);
    if (is_zombie) (flagged ? cm.tp : cm.fn)++;
    else (flagged ? cm.fp : cm.tn)++;
  }
  return cm;
}

/// Each metric is empty when its denominator is zero.
struct MetricSet {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

inline MetricSet metrics(const ConfusionMatrix& cm) {
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  MetricSet m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

inline const std::string kUnknownRegion = "unknown";

/// Zombie count per region, most frequent first (ties by name).
inline std::vector<std::pair<std::string, std::size_t>> region_distribution(const ZombieReport& report,
                                                                           const ProfileIndex& profiles) {
  std::map<std::string, std::size_t> counts;
  for (const auto& row : report.rows) {
    if (!row.zombie) continue;
    const UserProfile* p = row.node < profiles.size() ? profiles[row.node] : nullptr;
    ++counts[p && !p->region.empty() ? p->region : kUnknownRegion];
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

struct HistogramBin {
  std::size_t lower = 0;
  std::size_t count = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

/// Histogram of in + out degree; only non-empty bins, ascending.
inline std::vector<HistogramBin> degree_histogram(const DirectedGraph& g, std::size_t bin_width) {
  if (bin_width < 1) throw ValidationError("bin width must be >= 1");
  std::map<std::size_t, std::size_t> bins;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    std::size_t deg = g.in_degree(u) + g.out_degree(u);
    ++bins[deg / bin_width * bin_width];
  }
  std::vector<HistogramBin> out;
  for (auto [lo, c] : bins) out.push_back({lo, c});
  return out;
}

namespace detail {

struct PairCounts {
  double agree_same = 0; // pairs together in both
  double same_a = 0;
  double same_b = 0;
  double pairs = 0;
};

inline PairCounts pair_counts(std::span<const CommunityId> a, std::span<const CommunityId> b) {
  if (a.size() != b.size()) throw ValidationError("partitions cover different node counts");
  auto choose2 = [](double x) { return x * (x - 1) / 2; };
  std::map<std::pair<CommunityId, CommunityId>, double> joint;
  std::map<CommunityId, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ca[a[i]] += 1;
    cb[b[i]] += 1;
  }
  PairCounts pc;
  for (const auto& [_, n] : joint) pc.agree_same += choose2(n);
  for (const auto& [_, n] : ca) pc.same_a += choose2(n);
  for (const auto& [_, n] : cb) pc.same_b += choose2(n);
  pc.pairs = choose2(static_cast<double>(a.size()));
  return pc;
}

} // namespace detail

/// Fraction of node pairs on which two partitions agree (Rand index).
inline double pairwise_agreement(std::span<const CommunityId> a, std::span<const CommunityId> b) {
  auto pc = detail::pair_counts(a, b);
  if (pc.pairs == 0) return 1.0;
  const double disagree = (pc.same_a - pc.agree_same) + (pc.same_b - pc.agree_same);
  return (pc.pairs - disagree) / pc.pairs;
}

/// Rand index corrected for chance (Hubert and Arabie).
inline double adjusted_agreement(std::span<const CommunityId> a, std::span<const CommunityId> b) {
  auto pc = detail::pair_counts(a, b);
  if (pc.pairs == 0) return 1.0;
  const double expected = pc.same_a * pc.same_b / pc.pairs;
  const double max_index = 0.5 * (pc.same_a + pc.same_b);
  if (max_index == expected) return 1.0;
  return (pc.agree_same - expected) / (max_index - expected);
}

} // namespace zombie

#endif // ZOMBIE_EVALUATE_HPP
