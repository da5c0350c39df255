#ifndef ZOMBIE_TABLES_HPP
#define ZOMBIE_TABLES_HPP

// CSV tables exchanged between pipeline stages.
//
//   partition   node_id,community_id
//   ranks       node_id,community_id,io,pagerank,converged
//   report      node_id,community_id,pagerank,threshold,label
//   truth       node_id,block_id,is_zombie,region
//   regions     region,count
//   histogram   degree_lower,count
//
// Writers may put a single "# run: <id>" line before the header; readers skip
// lines starting with '#'. Reals are written in shortest round-trip form, so
// a value read back is bit-identical to the one written.

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zombie/community.hpp"
#include "zombie/detect.hpp"
#include "zombie/errors.hpp"
#include "zombie/evaluate.hpp"
#include "zombie/ingest.hpp"
#include "zombie/rank.hpp"

namespace zombie::tables {

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline double parse_real(std::string_view s, std::size_t line) {
  s = detail::trim(s);
  if (s == "nan") return std::nan("");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("expected a real number, found '" + std::string(s) + "'", line);
  return v;
}

inline std::uint64_t parse_uint(std::string_view s, std::size_t line) {
  s = detail::trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("expected a non-negative integer, found '" + std::string(s) + "'", line);
  return v;
}

inline void write_run_line(std::ostream& out, const std::string& run_id) {
  if (!run_id.empty()) out << "# run: " << run_id << '\n';
}

/// Iterates data rows of a CSV with the expected header, splitting on ','.
class CsvReader {
public:
  CsvReader(std::istream& in, std::vector<std::string> header) : in_(in), header_(std::move(header)) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      strip_cr(line);
      if (line.empty() || line[0] == '#') continue;
      auto cols = detail::split(line, ',');
      bool ok = cols.size() == header_.size();
      for (std::size_t i = 0; ok && i < cols.size(); ++i) ok = detail::trim(cols[i]) == header_[i];
      if (!ok) throw ParseError("expected header '" + joined() + "'", line_);
      return;
    }
    throw ParseError("missing header '" + joined() + "'", line_);
  }

  /// Next row's columns; false at end of input.
  bool next(std::vector<std::string_view>& cols) {
    while (std::getline(in_, current_)) {
      ++line_;
      strip_cr(current_);
      if (current_.empty() || current_[0] == '#') continue;
      cols = detail::split(current_, ',');
      if (cols.size() != header_.size())
        throw ParseError("expected " + std::to_string(header_.size()) + " columns", line_);
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_; }

private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }
  std::string joined() const {
    std::string s;
    for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
    return s;
  }

  std::istream& in_;
  std::vector<std::string> header_;
  std::string current_;
  std::size_t line_ = 0;
};

// partition ------------------------------------------------------------------

inline void write_partition(std::ostream& out, const Partition& p, const std::vector<std::string>* uids = nullptr,
                            const std::string& run_id = {}) {
  write_run_line(out, run_id);
  out << "node_id,community_id\n";
  for (NodeId u = 0; u < p.node_count(); ++u)
    out << (uids ? (*uids)[u] : std::to_string(u)) << ',' << p.community_of(u) << '\n';
}

inline Partition read_partition(std::istream& in, std::size_t node_count,
                                const std::vector<std::string>* uids = nullptr) {
  std::unordered_map<std::string_view, NodeId> by_uid;
  if (uids)
    for (NodeId i = 0; i < uids->size(); ++i) by_uid.emplace((*uids)[i], i);
  CsvReader csv(in, {"node_id", "community_id"});
  std::vector<std::uint64_t> labels(node_count, 0);
  std::vector<std::uint8_t> seen(node_count, 0);
  std::vector<std::string_view> cols;
  while (csv.next(cols)) {
    NodeId u;
    if (uids) {
      auto it = by_uid.find(detail::trim(cols[0]));
      if (it == by_uid.end()) throw ParseError("unknown uid '" + std::string(cols[0]) + "'", csv.line());
      u = it->second;
    } else {
      auto v = parse_uint(cols[0], csv.line());
      if (v >= node_count) throw ParseError("node id " + std::to_string(v) + " out of range", csv.line());
      u = static_cast<NodeId>(v);
    }
    if (seen[u]) throw ParseError("node " + std::to_string(u) + " listed twice", csv.line());
    seen[u] = 1;
    labels[u] = parse_uint(cols[1], csv.line());
  }
  for (NodeId u = 0; u < node_count; ++u)
    if (!seen[u]) throw ValidationError("partition has no entry for node " + std::to_string(u));
  return Partition::from_labels(labels);
}

// ranks ----------------------------------------------------------------------

inline void write_ranks(std::ostream& out, const RankSummary& ranks, std::size_t node_count,
                        const std::string& run_id = {}) {
  struct Row {
    CommunityId c;
    double io, pr;
    bool converged;
  };
  std::vector<Row> rows(node_count);
  for (const auto& cr : ranks.communities)
    for (std::size_t i = 0; i < cr.members.size(); ++i)
      rows[cr.members[i]] = {cr.community, cr.io[i], cr.importance.values[i], cr.importance.converged};
  write_run_line(out, run_id);
  out << "node_id,community_id,io,pagerank,converged\n";
  for (NodeId u = 0; u < node_count; ++u)
    out << u << ',' << rows[u].c << ',' << format_real(rows[u].io) << ',' << format_real(rows[u].pr) << ','
        << (rows[u].converged ? 1 : 0) << '\n';
}

struct RankTable {
  std::vector<CommunityScores> communities; ///< ascending community id, nodes ascending
  std::size_t non_converged_nodes = 0;
};

inline RankTable read_ranks(std::istream& in) {
  CsvReader csv(in, {"node_id", "community_id", "io", "pagerank", "converged"});
  std::map<CommunityId, CommunityScores> groups;
  std::map<NodeId, bool> seen;
  RankTable table;
  std::vector<std::string_view> cols;
  while (csv.next(cols)) {
    auto u = parse_uint(cols[0], csv.line());
    auto c = parse_uint(cols[1], csv.line());
    if (u >= kNoNode || c >= kNoNode) throw ParseError("id out of range", csv.line());
    parse_real(cols[2], csv.line());
    double pr = parse_real(cols[3], csv.line());
    auto conv = parse_uint(cols[4], csv.line());
    if (conv > 1) throw ParseError("converged must be 0 or 1", csv.line());
    if (!seen.emplace(static_cast<NodeId>(u), true).second)
      throw ParseError("node " + std::to_string(u) + " listed twice", csv.line());
    auto& g = groups[static_cast<CommunityId>(c)];
    g.community = static_cast<CommunityId>(c);
    g.nodes.push_back(static_cast<NodeId>(u));
    g.values.push_back(pr);
    if (conv == 0) ++table.non_converged_nodes;
  }
  // Rows may come in any order; keep nodes ascending within each community.
  for (auto& [_, g] : groups) {
    std::vector<std::size_t> idx(g.nodes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return g.nodes[a] < g.nodes[b]; });
    CommunityScores sorted{g.community, {}, {}};
    for (auto i : idx) {
      sorted.nodes.push_back(g.nodes[i]);
      sorted.values.push_back(g.values[i]);
    }
    table.communities.push_back(std::move(sorted));
  }
  return table;
}

// report ---------------------------------------------------------------------

inline void write_report(std::ostream& out, const ZombieReport& report, const std::string& run_id = {}) {
  write_run_line(out, run_id);
  out << "node_id,community_id,pagerank,threshold,label\n";
  for (const auto& r : report.rows)
    out << r.node << ',' << r.community << ',' << format_real(r.pagerank) << ',' << format_real(r.threshold) << ','
        << (r.zombie ? "zombie" : "normal") << '\n';
}

inline ZombieReport read_report(std::istream& in) {
  CsvReader csv(in, {"node_id", "community_id", "pagerank", "threshold", "label"});
  ZombieReport report;
  std::vector<std::string_view> cols;
  std::map<CommunityId, bool> communities;
  while (csv.next(cols)) {
    ZombieRow r;
    auto u = parse_uint(cols[0], csv.line());
    auto c = parse_uint(cols[1], csv.line());
    if (u >= kNoNode || c >= kNoNode) throw ParseError("id out of range", csv.line());
    r.node = static_cast<NodeId>(u);
    r.community = static_cast<CommunityId>(c);
    r.pagerank = parse_real(cols[2], csv.line());
    r.threshold = parse_real(cols[3], csv.line());
    auto label = detail::trim(cols[4]);
    if (label == "zombie") r.zombie = true;
    else if (label != "normal") throw ParseError("label must be 'zombie' or 'normal'", csv.line());
    report.zombie_count += r.zombie ? 1 : 0;
    communities[r.community] = true;
    report.rows.push_back(r);
  }
  report.communities = communities.size();
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
  return report;
}

inline LabelMap report_labels(const ZombieReport& report) {
  LabelMap m;
  for (const auto& r : report.rows) m[r.node] = r.zombie;
  return m;
}

// truth ----------------------------------------------------------------------

struct TruthTable {
  LabelMap labels;
  std::map<NodeId, std::uint32_t> block;
  std::map<NodeId, std::string> region;
};

inline TruthTable read_truth(std::istream& in) {
  CsvReader csv(in, {"node_id", "block_id", "is_zombie", "region"});
  TruthTable t;
  std::vector<std::string_view> cols;
  while (csv.next(cols)) {
    auto u = parse_uint(cols[0], csv.line());
    if (u >= kNoNode) throw ParseError("id out of range", csv.line());
    auto z = parse_uint(cols[2], csv.line());
    if (z > 1) throw ParseError("is_zombie must be 0 or 1", csv.line());
    auto id = static_cast<NodeId>(u);
    if (t.labels.count(id)) throw ParseError("node " + std::to_string(u) + " listed twice", csv.line());
    t.labels[id] = z == 1;
    t.block[id] = static_cast<std::uint32_t>(parse_uint(cols[1], csv.line()));
    t.region[id] = std::string(detail::trim(cols[3]));
  }
  return t;
}

// small tables ---------------------------------------------------------------

inline void write_regions(std::ostream& out, std::span<const std::pair<std::string, std::size_t>> counts,
                          const std::string& run_id = {}) {
  write_run_line(out, run_id);
  out << "region,count\n";
  for (const auto& [r, c] : counts) out << r << ',' << c << '\n';
}

inline void write_histogram(std::ostream& out, std::span<const HistogramBin> bins, const std::string& run_id = {}) {
  write_run_line(out, run_id);
  out << "degree_lower,count\n";
  for (const auto& b : bins) out << b.lower << ',' << b.count << '\n';
}

} // namespace zombie::tables

#endif // ZOMBIE_TABLES_HPP
