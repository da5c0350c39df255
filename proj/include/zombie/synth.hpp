#ifndef ZOMBIE_SYNTH_HPP
#define ZOMBIE_SYNTH_HPP

// Planted-community follower graphs with injected zombie accounts.
//
// Draw order (all draws through zombie/random.hpp, one engine seeded with
// cfg.seed):
//   1. zombie selection: shuffle of 0..N-1, the first round(f N) are zombies
//   2. normal pairs u < v in lexicographic order: bernoulli(p) for u->v,
//      bernoulli(p) for v->u, and bernoulli(reciprocity) only when exactly
//      one direction was drawn, which then adds the other direction
//   3. zombies in id order: out-degree between(lo, hi), targets by partial
//      Fisher-Yates over the block's normals; then in-degree between(0, max)
//      and followers drawn the same way
//   4. per node in id order: region by weight, gender by bernoulli(0.5)

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "zombie/errors.hpp"
#include "zombie/graph.hpp"
#include "zombie/ingest.hpp"
#include "zombie/random.hpp"

namespace zombie {

struct SynthConfig {
  std::vector<std::size_t> block_sizes{50};
  double p_in = 0.1;
  double p_out = 0.01;
  double reciprocity = 0.0;
  double zombie_fraction = 0.0;
  std::size_t zombie_out_min = 1;
  std::size_t zombie_out_max = 1;
  std::size_t zombie_max_in = 0;
  std::vector<std::pair<std::string, double>> regions{{"unknown", 1.0}};
  std::uint64_t seed = 42;

  std::size_t node_count() const {
    std::size_t n = 0;
    for (auto s : block_sizes) n += s;
    return n;
  }

  static SynthConfig from_json(const nlohmann::json& j) {
    SynthConfig c;
    c.block_sizes = j.at("block_sizes").get<std::vector<std::size_t>>();
    c.p_in = j.value("p_in", c.p_in);
    c.p_out = j.value("p_out", c.p_out);
    c.reciprocity = j.value("reciprocity", c.reciprocity);
    c.zombie_fraction = j.value("zombie_fraction", c.zombie_fraction);
    if (j.contains("zombie_out_degree")) {
      auto r = j.at("zombie_out_degree").get<std::vector<std::size_t>>();
      if (r.size() != 2) throw ValidationError("zombie_out_degree must be [min, max]");
      c.zombie_out_min = r[0];
      c.zombie_out_max = r[1];
    }
    c.zombie_max_in = j.value("zombie_max_in_degree", c.zombie_max_in);
    if (j.contains("regions")) {
      c.regions.clear();
      for (const auto& r : j.at("regions")) c.regions.emplace_back(r.at(0).get<std::string>(), r.at(1).get<double>());
    }
    c.seed = j.value("seed", c.seed);
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json regions_json = nlohmann::json::array();
    for (const auto& [name, w] : regions) regions_json.push_back({name, w});
    return {{"block_sizes", block_sizes},
            {"p_in", p_in},
            {"p_out", p_out},
            {"reciprocity", reciprocity},
            {"zombie_fraction", zombie_fraction},
            {"zombie_out_degree", {zombie_out_min, zombie_out_max}},
            {"zombie_max_in_degree", zombie_max_in},
            {"regions", regions_json},
            {"seed", seed}};
  }
};

struct GroundTruth {
  std::vector<std::uint32_t> block;
  std::vector<std::uint8_t> is_zombie;
  std::vector<std::string> region;

  std::size_t zombie_count() const {
    std::size_t z = 0;
    for (auto f : is_zombie) z += f;
    return z;
  }
};

struct SynthCorpus {
  DirectedGraph graph;
  GroundTruth truth;
  std::vector<std::string> uids;
  std::vector<UserProfile> profiles;
  std::vector<std::string> warnings;
};

inline std::size_t planted_zombie_count(const SynthConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.zombie_fraction * static_cast<double>(cfg.node_count())));
}

inline SynthCorpus generate(const SynthConfig& cfg) {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(name) + " must be in [0, 1]");
  };
  prob(cfg.p_in, "p_in");
  prob(cfg.p_out, "p_out");
  prob(cfg.reciprocity, "reciprocity");
  if (!(cfg.zombie_fraction >= 0.0 && cfg.zombie_fraction < 1.0))
    throw ValidationError("zombie_fraction must be in [0, 1)");
  if (cfg.zombie_out_min > cfg.zombie_out_max) throw ValidationError("zombie out-degree range is empty");
  if (cfg.regions.empty()) throw ValidationError("at least one region is required");
  double weight_sum = 0.0;
  for (const auto& [_, w] : cfg.regions) {
    if (!(w >= 0.0)) throw ValidationError("region weights must be >= 0");
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) throw ValidationError("region weights sum to zero");
  const std::size_t n = cfg.node_count();
  if (n < 1) throw ValidationError("block sizes sum to zero");
  if (n >= kNoNode) throw ValidationError("too many nodes");

  SynthCorpus corpus;
  if (cfg.p_in <= cfg.p_out) corpus.warnings.push_back("p_in <= p_out: planted blocks carry no community structure");

  random::Engine rng(cfg.seed);
  GroundTruth& truth = corpus.truth;
  truth.block.resize(n);
  truth.is_zombie.assign(n, 0);
  truth.region.resize(n);
  std::vector<std::vector<NodeId>> block_members(cfg.block_sizes.size());
  {
    NodeId u = 0;
    for (std::uint32_t b = 0; b < cfg.block_sizes.size(); ++b)
      for (std::size_t i = 0; i < cfg.block_sizes[b]; ++i, ++u) {
        truth.block[u] = b;
        block_members[b].push_back(u);
      }
  }

  std::vector<NodeId> perm(n);
  for (NodeId u = 0; u < n; ++u) perm[u] = u;
  random::shuffle(std::span<NodeId>(perm), rng);
  const std::size_t zombies = planted_zombie_count(cfg);
  for (std::size_t i = 0; i < zombies; ++i) truth.is_zombie[perm[i]] = 1;

  std::vector<std::vector<NodeId>> block_normals(block_members.size());
  for (std::size_t b = 0; b < block_members.size(); ++b) {
    bool has_zombie = false;
    for (NodeId u : block_members[b]) {
      if (truth.is_zombie[u]) has_zombie = true;
      else block_normals[b].push_back(u);
    }
    if (has_zombie && block_normals[b].size() < cfg.zombie_out_max) {
      throw ValidationError("block " + std::to_string(b) + " has " + std::to_string(block_normals[b].size()) +
                            " normal accounts, fewer than the zombie out-degree maximum " +
                            std::to_string(cfg.zombie_out_max));
    }
    if (has_zombie && block_normals[b].size() < cfg.zombie_max_in) {
      throw ValidationError("block " + std::to_string(b) + " cannot supply " + std::to_string(cfg.zombie_max_in) +
                            " followers per zombie");
    }
  }

  std::vector<Arc> arcs;
  for (NodeId u = 0; u < n; ++u) {
    if (truth.is_zombie[u]) continue;
    for (NodeId v = u + 1; v < n; ++v) {
      if (truth.is_zombie[v]) continue;
      const double p = truth.block[u] == truth.block[v] ? cfg.p_in : cfg.p_out;
      bool forward = random::bernoulli(rng, p);
      bool backward = random::bernoulli(rng, p);
      if (forward != backward && random::bernoulli(rng, cfg.reciprocity)) forward = backward = true;
      if (forward) arcs.push_back({u, v, false});
      if (backward) arcs.push_back({v, u, false});
    }
  }

  auto sample = [&](const std::vector<NodeId>& pool, std::size_t k) {
    std::vector<NodeId> scratch = pool;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + random::below(rng, scratch.size() - i);
      std::swap(scratch[i], scratch[j]);
    }
    scratch.resize(k);
    return scratch;
  };
  for (NodeId z = 0; z < n; ++z) {
    if (!truth.is_zombie[z]) continue;
    const auto& pool = block_normals[truth.block[z]];
    auto out_deg = static_cast<std::size_t>(random::between(rng, cfg.zombie_out_min, cfg.zombie_out_max));
    for (NodeId t : sample(pool, out_deg)) arcs.push_back({z, t, false});
    auto in_deg = static_cast<std::size_t>(random::between(rng, 0, cfg.zombie_max_in));
    for (NodeId s : sample(pool, in_deg)) arcs.push_back({s, z, false});
  }

  // Mark mutual pairs.
  DirectedGraph plain = build_graph(arcs, n);
  for (Arc& a : arcs) a.reciprocal = plain.has_arc(a.target, a.source);
  corpus.graph = build_graph(arcs, n);

  corpus.uids.resize(n);
  corpus.profiles.resize(n);
  for (NodeId u = 0; u < n; ++u) {
    double r = random::unit(rng) * weight_sum;
    std::size_t idx = 0;
    while (idx + 1 < cfg.regions.size() && r >= cfg.regions[idx].second) {
      r -= cfg.regions[idx].second;
      ++idx;
    }
    truth.region[u] = cfg.regions[idx].first;
    corpus.uids[u] = std::to_string(1000000000ull + u);
    UserProfile& p = corpus.profiles[u];
    p.id = u;
    p.uid = corpus.uids[u];
    p.name = "user" + std::to_string(u);
    p.gender = random::bernoulli(rng, 0.5) ? "m" : "f";
    p.verified = "0";
    p.region = truth.region[u];
    p.followers = static_cast<std::int64_t>(corpus.graph.in_degree(u));
    p.followees = static_cast<std::int64_t>(corpus.graph.out_degree(u));
    p.tweets = 0;
  }
  return corpus;
}

inline void write_truth_csv(const GroundTruth& truth, std::ostream& out) {
  out << "node_id,block_id,is_zombie,region\n";
  for (std::size_t u = 0; u < truth.block.size(); ++u)
    out << u << ',' << truth.block[u] << ',' << int(truth.is_zombie[u]) << ',' << truth.region[u] << '\n';
}

struct CorpusFiles {
  static constexpr const char* network = "weibo_network";
  static constexpr const char* uidlist = "uidlist";
  static constexpr const char* profiles = "profiles.csv";
  static constexpr const char* truth = "truth.csv";
};

/// Writes the network, uid list, profile table and truth table into `dir`.
inline void emit_weibo_format(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open(CorpusFiles::network);
    emit_weibo_network(corpus.graph, f);
    if (!f) throw IoError("write failed: weibo_network");
  }
  {
    auto f = open(CorpusFiles::uidlist);
    emit_uidlist(corpus.uids, f);
  }
  {
    auto f = open(CorpusFiles::profiles);
    emit_profiles(corpus.profiles, ProfileSchema{}, f);
  }
  {
    auto f = open(CorpusFiles::truth);
    write_truth_csv(corpus.truth, f);
    if (!f) throw IoError("write failed: truth.csv");
  }
}

} // namespace zombie

#endif // ZOMBIE_SYNTH_HPP
