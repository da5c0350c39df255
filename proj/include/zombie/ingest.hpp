#ifndef ZOMBIE_INGEST_HPP
#define ZOMBIE_INGEST_HPP

// Readers and writers for the follower-network dump.
//
// weibo_network layout (whitespace of any kind separates tokens):
//
//   N M
//   v1_id k  v2_id flag  v2_id flag  ...   (2k numbers)
//   ...                                    (N records in total)
//
// flag 1 marks a mutual follow, 0 a one-way follow of v2 by v1.
//
// Binary cache layout (all integers little-endian):
//
//   bytes 0..7    magic "ZMBGRAPH"
//   u32           format version (kCacheVersion)
//   u32           reserved, 0
//   u64           node count N
//   u64           arc count M
//   N records     varint out-degree d, then d varints ((t - prev) << 1 | flag)
//                 where t runs over sorted targets and prev starts at 0
//   bytes         trailer "ZMBGEND\n"
//
// Varints are LEB128 (7 bits per byte, low group first).

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zombie/errors.hpp"
#include "zombie/graph.hpp"

namespace zombie {

struct RawNetwork {
  std::size_t declared_nodes = 0;
  std::size_t declared_relationships = 0;
  std::size_t records = 0;
  std::vector<Arc> arcs;
  std::vector<std::string> warnings;
};

namespace detail {

/// Pulls unsigned decimal tokens off a stream, tracking the line of each token.
class TokenReader {
public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  /// Next token as an unsigned integer; nullopt at end of input.
  /// End-of-input errors are reported at token_line(), the last line holding data.
  std::optional<std::uint64_t> next() {
    int c = skip_space();
    if (c < 0) return std::nullopt;
    token_line_ = line_;
    std::uint64_t value = 0;
    while (c >= 0 && !is_space(c)) {
      if (c < '0' || c > '9') {
        std::string bad(1, static_cast<char>(c));
        while ((c = peek()) >= 0 && !is_space(c)) bad.push_back(static_cast<char>(take()));
        throw ParseError("expected a non-negative integer, found '" + bad + "'", token_line_);
      }
      std::uint64_t digit = static_cast<std::uint64_t>(c - '0');
      if (value > (UINT64_MAX - digit) / 10) throw ParseError("integer overflow", token_line_);
      value = value * 10 + digit;
      take();
      c = peek();
    }
    return value;
  }

  std::uint64_t require(const char* what) {
    auto v = next();
    if (!v) throw ParseError(std::string("unexpected end of input, expected ") + what, token_line_);
    return *v;
  }

  std::size_t token_line() const noexcept { return token_line_; }

private:
  static bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  int peek() {
    if (pos_ == len_) {
      len_ = static_cast<std::size_t>(in_.rdbuf()->sgetn(buf_.data(), static_cast<std::streamsize>(buf_.size())));
      pos_ = 0;
      if (len_ == 0) return -1;
    }
    return static_cast<unsigned char>(buf_[pos_]);
  }
  int take() {
    int c = peek();
    if (c >= 0) {
      ++pos_;
      if (c == '\n') ++line_;
    }
    return c;
  }
  int skip_space() {
    int c;
    while ((c = peek()) >= 0 && is_space(c)) take();
    return c;
  }

  std::istream& in_;
  std::array<char, 1 << 16> buf_{};
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  std::size_t line_ = 1;
  std::size_t token_line_ = 1;
};

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\v\f";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

} // namespace detail

inline RawNetwork parse_weibo_network(std::istream& in) {
  detail::TokenReader tok(in);
  RawNetwork net;
  auto n = tok.next();
  if (!n) throw ParseError("empty input, expected header 'N M'", 1);
  auto m = tok.next();
  if (!m) throw ParseError("malformed header, expected 'N M'", tok.token_line());
  if (tok.token_line() != 1) throw ParseError("malformed header, expected 'N M' on the first line", tok.token_line());
  if (*n >= kNoNode) throw ParseError("node count exceeds supported range", 1);
  net.declared_nodes = static_cast<std::size_t>(*n);
  net.declared_relationships = static_cast<std::size_t>(*m);

  const std::uint64_t node_count = *n;
  for (std::size_t r = 0; r < node_count; ++r) {
    auto v1 = tok.next();
    if (!v1) {
      throw ParseError("truncated input: " + std::to_string(r) + " of " + std::to_string(node_count) +
                           " adjacency records present",
                       tok.token_line());
    }
    const std::size_t record_line = tok.token_line();
    if (*v1 >= node_count) throw ParseError("user id " + std::to_string(*v1) + " out of range", record_line);
    std::uint64_t k = tok.require("follow count k");
    for (std::uint64_t i = 0; i < k; ++i) {
      auto v2 = tok.next();
      if (!v2) throw ParseError("truncated record: expected " + std::to_string(2 * k) + " numbers", record_line);
      if (*v2 >= node_count)
        throw ParseError("user id " + std::to_string(*v2) + " out of range", tok.token_line());
      auto flag = tok.next();
      if (!flag) throw ParseError("truncated record: missing relationship flag", record_line);
      if (*flag > 1) throw ParseError("relationship flag must be 0 or 1, found " + std::to_string(*flag), tok.token_line());
      net.arcs.push_back({static_cast<NodeId>(*v1), static_cast<NodeId>(*v2), *flag == 1});
    }
    ++net.records;
  }
  if (tok.next()) throw ParseError("unexpected data after " + std::to_string(node_count) + " records", tok.token_line());
  if (net.arcs.size() != net.declared_relationships) {
    net.warnings.push_back("header declares " + std::to_string(net.declared_relationships) +
                           " relationships, parsed " + std::to_string(net.arcs.size()));
  }
  return net;
}

inline RawNetwork parse_weibo_network_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_weibo_network(in);
}

/// Writes arcs grouped by source, one record per node in id order.
inline void emit_weibo_network(std::size_t node_count, std::span<const Arc> arcs, std::ostream& out) {
  std::vector<std::size_t> counts(node_count + 1, 0);
  for (const Arc& a : arcs) {
    if (a.source >= node_count || a.target >= node_count) throw ValidationError("arc endpoint out of range");
    ++counts[a.source + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<const Arc*> ordered(arcs.size());
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  for (const Arc& a : arcs) ordered[cursor[a.source]++] = &a;

  std::string line;
  out << node_count << ' ' << arcs.size() << '\n';
  for (std::size_t u = 0; u < node_count; ++u) {
    line.clear();
    line += std::to_string(u);
    line += ' ';
    line += std::to_string(counts[u + 1] - counts[u]);
    for (std::size_t i = counts[u]; i < counts[u + 1]; ++i) {
      line += ' ';
      line += std::to_string(ordered[i]->target);
      line += ordered[i]->reciprocal ? " 1" : " 0";
    }
    line += '\n';
    out << line;
  }
}

inline void emit_weibo_network(const RawNetwork& net, std::ostream& out) {
  emit_weibo_network(net.declared_nodes, net.arcs, out);
}

inline void emit_weibo_network(const DirectedGraph& g, std::ostream& out) {
  auto arcs = g.arcs();
  emit_weibo_network(g.node_count(), arcs, out);
}

/// uid of node i is element i.
inline std::vector<std::string> parse_uidlist(std::istream& in) {
  std::vector<std::string> uids;
  std::string line;
  std::size_t blank_at = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto uid = detail::trim(line);
    if (uid.empty()) {
      if (!blank_at) blank_at = line_no;
      continue;
    }
    if (blank_at) throw ParseError("blank line inside uid list", blank_at);
    uids.emplace_back(uid);
  }
  if (uids.empty()) throw ParseError("uid list is empty", 0);
  return uids;
}

inline void emit_uidlist(std::span<const std::string> uids, std::ostream& out) {
  for (const auto& uid : uids) out << uid << '\n';
}

struct UserProfile {
  NodeId id = 0;
  std::string uid;
  std::string name;
  std::string gender;
  std::string verified;
  std::string region;
  std::optional<std::int64_t> followers;
  std::optional<std::int64_t> followees;
  std::optional<std::int64_t> reciprocal;
  std::optional<std::int64_t> tweets;
  std::optional<std::int64_t> retweets;
};

/// Column layout of a profile file. Recognised field names are uid, name,
/// gender, verified, region, followers, followees, reciprocal, tweets and
/// retweets; any other name marks a column that is skipped.
struct ProfileSchema {
  std::vector<std::string> fields{"uid", "name", "gender", "verified", "region", "followers", "followees", "tweets"};
  char delimiter = ',';
  bool header = true;

  /// "uid,name,region" style description; the delimiter of the description is always ','.
  static ProfileSchema from_string(std::string_view list, char delimiter = ',', bool header = true) {
    ProfileSchema s;
    s.fields.clear();
    s.delimiter = delimiter;
    s.header = header;
    while (!list.empty()) {
      auto comma = list.find(',');
      s.fields.emplace_back(detail::trim(list.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      list.remove_prefix(comma + 1);
    }
    return s;
  }
};

struct ProfileSet {
  std::vector<UserProfile> profiles;
  std::size_t missing_numeric = 0;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> cols;
  while (true) {
    auto p = line.find(delim);
    cols.push_back(line.substr(0, p));
    if (p == std::string_view::npos) break;
    line.remove_prefix(p + 1);
  }
  return cols;
}

inline std::optional<std::int64_t> parse_count(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

} // namespace detail

/// Parses delimiter-separated profile records. With a uid list, records are
/// matched to node ids by uid (or by position if the schema has no uid
/// column) and the record count must equal the list length.
inline ProfileSet parse_profiles(std::istream& in, const ProfileSchema& schema,
                                 const std::vector<std::string>* uidlist = nullptr) {
  ProfileSet result;
  std::unordered_map<std::string, NodeId> by_uid;
  if (uidlist)
    for (NodeId i = 0; i < uidlist->size(); ++i) by_uid.emplace((*uidlist)[i], i);

  std::string line;
  std::size_t line_no = 0;
  bool skip_header = schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    if (skip_header) {
      skip_header = false;
      continue;
    }
    auto cols = detail::split(line, schema.delimiter);
    if (cols.size() != schema.fields.size()) {
      throw ParseError("expected " + std::to_string(schema.fields.size()) + " fields, found " +
                           std::to_string(cols.size()),
                       line_no);
    }
    UserProfile p;
    p.id = static_cast<NodeId>(result.profiles.size());
    bool has_uid = false;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string& f = schema.fields[c];
      std::string_view v = detail::trim(cols[c]);
      auto count = [&](std::optional<std::int64_t>& slot) {
        slot = detail::parse_count(v);
        if (!slot) ++result.missing_numeric;
      };
      if (f == "uid") {
        p.uid = v;
        has_uid = true;
      } else if (f == "name") p.name = v;
      else if (f == "gender") p.gender = v;
      else if (f == "verified") p.verified = v;
      else if (f == "region") p.region = v;
      else if (f == "followers") count(p.followers);
      else if (f == "followees") count(p.followees);
      else if (f == "reciprocal") count(p.reciprocal);
      else if (f == "tweets") count(p.tweets);
      else if (f == "retweets") count(p.retweets);
    }
    if (uidlist && has_uid) {
      auto it = by_uid.find(p.uid);
      if (it == by_uid.end()) throw ValidationError("profile uid '" + p.uid + "' is not in the uid list");
      p.id = it->second;
    }
    result.profiles.push_back(std::move(p));
  }
  if (uidlist && result.profiles.size() != uidlist->size()) {
    throw ValidationError("profile file has " + std::to_string(result.profiles.size()) + " records, uid list has " +
                          std::to_string(uidlist->size()));
  }
  std::sort(result.profiles.begin(), result.profiles.end(),
            [](const UserProfile& a, const UserProfile& b) { return a.id < b.id; });
  return result;
}

inline void emit_profiles(std::span<const UserProfile> profiles, const ProfileSchema& schema, std::ostream& out) {
  auto num = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); };
  if (schema.header) {
    for (std::size_t c = 0; c < schema.fields.size(); ++c) out << (c ? std::string(1, schema.delimiter) : "") << schema.fields[c];
    out << '\n';
  }
  for (const auto& p : profiles) {
    for (std::size_t c = 0; c < schema.fields.size(); ++c) {
      if (c) out << schema.delimiter;
      const std::string& f = schema.fields[c];
      if (f == "uid") out << p.uid;
      else if (f == "name") out << p.name;
      else if (f == "gender") out << p.gender;
      else if (f == "verified") out << p.verified;
      else if (f == "region") out << p.region;
      else if (f == "followers") out << num(p.followers);
      else if (f == "followees") out << num(p.followees);
      else if (f == "reciprocal") out << num(p.reciprocal);
      else if (f == "tweets") out << num(p.tweets);
      else if (f == "retweets") out << num(p.retweets);
    }
    out << '\n';
  }
}

inline constexpr std::uint32_t kCacheVersion = 1;

namespace detail {

inline constexpr char kCacheMagic[8] = {'Z', 'M', 'B', 'G', 'R', 'A', 'P', 'H'};
inline constexpr char kCacheTrailer[8] = {'Z', 'M', 'B', 'G', 'E', 'N', 'D', '\n'};

inline void put_le(std::string& buf, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_varint(std::string& buf, std::uint64_t v) {
  while (v >= 0x80) {
    buf.push_back(static_cast<char>((v & 0x7f) | 0x80));
    v >>= 7;
  }
  buf.push_back(static_cast<char>(v));
}

class ByteCursor {
public:
  ByteCursor(const unsigned char* p, std::size_t n) : p_(p), end_(p + n) {}

  std::uint64_t le(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p_[i]) << (8 * i);
    p_ += bytes;
    return v;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      need(1);
      unsigned char b = *p_++;
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return v;
    }
    throw CacheError("cache corrupt: varint too long");
  }
  bool match(const char (&bytes)[8]) {
    need(8);
    bool ok = std::memcmp(p_, bytes, 8) == 0;
    p_ += 8;
    return ok;
  }
  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }

private:
  void need(std::size_t n) const {
    if (remaining() < n) throw CacheError("cache truncated");
  }
  const unsigned char* p_;
  const unsigned char* end_;
};

} // namespace detail

inline void cache_save(const DirectedGraph& g, std::ostream& out) {
  std::string buf;
  buf.reserve(32 + g.node_count() + 2 * g.edge_count());
  buf.append(detail::kCacheMagic, 8);
  detail::put_le(buf, kCacheVersion, 4);
  detail::put_le(buf, 0, 4);
  detail::put_le(buf, g.node_count(), 8);
  detail::put_le(buf, g.edge_count(), 8);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    auto out_nb = g.out_neighbors(u);
    auto flags = g.out_flags(u);
    detail::put_varint(buf, out_nb.size());
    std::uint64_t prev = 0;
    for (std::size_t k = 0; k < out_nb.size(); ++k) {
      detail::put_varint(buf, ((out_nb[k] - prev) << 1) | flags[k]);
      prev = out_nb[k];
    }
    if (buf.size() > (1u << 22)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  buf.append(detail::kCacheTrailer, 8);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("cache write failed");
}

inline void cache_save(const DirectedGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  cache_save(g, out);
}

inline DirectedGraph cache_load_bytes(std::span<const unsigned char> bytes) {
  detail::ByteCursor cur(bytes.data(), bytes.size());
  if (!cur.match(detail::kCacheMagic)) throw CacheError("not a graph cache (bad magic)");
  auto version = cur.le(4);
  if (version != kCacheVersion)
    throw CacheError("cache version " + std::to_string(version) + " != " + std::to_string(kCacheVersion));
  cur.le(4);
  const std::uint64_t n = cur.le(8);
  const std::uint64_t m = cur.le(8);
  if (n >= kNoNode) throw CacheError("cache corrupt: node count out of range");
  // Each node costs at least one byte, each arc at least one.
  if (n + m > cur.remaining()) throw CacheError("cache truncated");

  std::vector<EdgeIndex> offsets(n + 1, 0);
  std::vector<NodeId> targets;
  std::vector<std::uint8_t> flags;
  targets.reserve(m);
  flags.reserve(m);
  for (std::uint64_t u = 0; u < n; ++u) {
    std::uint64_t d = cur.varint();
    if (targets.size() + d > m) throw CacheError("cache corrupt: arc count exceeds header");
    std::uint64_t prev = 0;
    for (std::uint64_t k = 0; k < d; ++k) {
      std::uint64_t word = cur.varint();
      std::uint64_t t = prev + (word >> 1);
      if (t >= n || (k > 0 && t <= prev) || t == u) throw CacheError("cache corrupt: bad adjacency");
      targets.push_back(static_cast<NodeId>(t));
      flags.push_back(static_cast<std::uint8_t>(word & 1));
      prev = t;
    }
    offsets[u + 1] = targets.size();
  }
  if (targets.size() != m) throw CacheError("cache corrupt: arc count differs from header");
  if (!cur.match(detail::kCacheTrailer)) throw CacheError("cache corrupt: missing trailer");
  return DirectedGraph::from_sorted_out(std::move(offsets), std::move(targets), std::move(flags));
}

inline DirectedGraph cache_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open " + path);
  auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<unsigned char> bytes(size);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
    throw IoError("read failed: " + path);
  return cache_load_bytes(bytes);
}

} // namespace zombie

#endif // ZOMBIE_INGEST_HPP
