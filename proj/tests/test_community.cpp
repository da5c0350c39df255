#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "zombie/community.hpp"
#include "zombie/evaluate.hpp"
#include "zombie/synth.hpp"

using namespace zombie;

namespace {

using Edges = std::vector<std::pair<int, int>>;

UndirectedGraph undirected(std::size_t n, const Edges& edges) {
  return symmetrize(oracle::undirected_as_digraph(n, edges));
}

Edges clique(int first, int size) {
  Edges e;
  for (int u = first; u < first + size; ++u)
    for (int v = u + 1; v < first + size; ++v) e.emplace_back(u, v);
  return e;
}

Edges two_cliques(int size) {
  Edges e = clique(0, size);
  for (auto p : clique(size, size)) e.push_back(p);
  return e;
}

std::vector<std::uint32_t> labels_of(const Partition& p) {
  return {p.assignment().begin(), p.assignment().end()};
}

Partition random_partition(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::uniform_int_distribution<std::uint64_t> pick(0, k - 1);
  std::vector<std::uint64_t> labels(n);
  for (auto& l : labels) l = pick(rng);
  return Partition::from_labels(labels);
}

} // namespace

TEST(Partition, FromLabelsIsDense) {
  std::vector<std::uint64_t> labels{7, 3, 7, 100};
  auto p = Partition::from_labels(labels);
  EXPECT_EQ(p.community_count(), 3u);
  std::size_t total = 0;
  for (CommunityId c = 0; c < p.community_count(); ++c) {
    EXPECT_FALSE(p.members(c).empty());
    total += p.members(c).size();
  }
  EXPECT_EQ(total, 4u);
  EXPECT_EQ(p.community_of(0), p.community_of(2));
  EXPECT_NE(p.community_of(0), p.community_of(1));
}

TEST(Modularity, SingletonOffDiagonalIsZero) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = undirected(15, oracle::random_graph(rng, 15, 0.3));
    EXPECT_EQ(modularity(g, Partition::singletons(15), ModularityVariant::off_diagonal), 0.0);
  }
}

TEST(Modularity, TwoTriangles) {
  Edges e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  auto g = undirected(6, e);
  auto p = Partition::from_dense({0, 0, 0, 1, 1, 1});
  EXPECT_NEAR(modularity(g, p), 0.5, 1e-15);
  EXPECT_NEAR(modularity(g, p, ModularityVariant::off_diagonal), 2.0 / 3.0, 1e-15);

  auto a = oracle::adjacency(6, e);
  auto l = labels_of(p);
  EXPECT_NEAR(oracle::modularity(a, l, true), 0.5, 1e-15);
  EXPECT_NEAR(oracle::modularity(a, l, false), 2.0 / 3.0, 1e-15);
}

TEST(Modularity, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + trial % 20;
    auto e = oracle::random_graph(rng, n, 0.25);
    if (e.empty()) continue;
    auto g = undirected(n, e);
    auto p = random_partition(rng, n, 4);
    auto a = oracle::adjacency(n, e);
    EXPECT_NEAR(modularity(g, p), oracle::modularity(a, labels_of(p), true), 1e-12);
    EXPECT_NEAR(modularity(g, p, ModularityVariant::off_diagonal), oracle::modularity(a, labels_of(p), false), 1e-12);
    double q = modularity(g, p);
    EXPECT_GE(q, -0.5);
    EXPECT_LE(q, 1.0);
  }
}

TEST(Modularity, SizeMismatch) {
  auto g = undirected(3, {{0, 1}});
  EXPECT_THROW(modularity(g, Partition::singletons(4)), ValidationError);
}

TEST(ModularityGain, Examples) {
  auto triangles = undirected(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  LouvainState s(triangles, Partition::from_dense({0, 0, 0, 1, 1, 1}));
  EXPECT_LT(modularity_gain(s, 0, 1), 0.0);

  auto path = undirected(2, {{0, 1}});
  LouvainState p(path);
  EXPECT_GT(modularity_gain(p, 1, p.community(0)), 0.0);
}

TEST(ModularityGain, DeltaMatchesRecompute) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = trial < 20 ? 12 : 10 + trial;
    auto e = oracle::random_graph(rng, n, 0.3);
    if (e.empty()) continue;
    auto g = undirected(n, e);
    auto a = oracle::adjacency(n, e);
    auto p = random_partition(rng, n, 5);
    LouvainState state(g, p);
    const double before = oracle::modularity(a, labels_of(p), true);
    EXPECT_NEAR(state.modularity(), before, 1e-12);
    for (NodeId i = 0; i < static_cast<NodeId>(n); ++i) {
      std::set<CommunityId> candidates;
      for (NodeId v : g.neighbors(i)) candidates.insert(state.community(v));
      for (CommunityId c : candidates) {
        std::vector<std::uint32_t> moved = labels_of(p);
        moved[i] = c;
        const double after = oracle::modularity(a, moved, true);
        EXPECT_NEAR(state.move_delta(i, c), after - before, 1e-12) << "node " << i << " to " << c;
      }
    }
  }
}

TEST(ModularityGain, RunningSumsStayExactUnderMoves) {
  std::mt19937_64 rng(44);
  auto e = oracle::random_graph(rng, 30, 0.2);
  auto g = undirected(30, e);
  auto a = oracle::adjacency(30, e);
  LouvainState state(g);
  std::uniform_int_distribution<int> node(0, 29);
  for (int step = 0; step < 200; ++step) {
    NodeId i = static_cast<NodeId>(node(rng));
    CommunityId c = state.community(static_cast<NodeId>(node(rng)));
    std::vector<std::uint32_t> before(state.assignment().begin(), state.assignment().end());
    double delta = state.move_delta(i, c);
    state.move(i, c);
    std::vector<std::uint32_t> after(state.assignment().begin(), state.assignment().end());
    EXPECT_NEAR(delta, oracle::modularity(a, after, true) - oracle::modularity(a, before, true), 1e-12);
    EXPECT_NEAR(state.modularity(), oracle::modularity(a, after, true), 1e-12);
  }
}

TEST(ModularityGain, SweepOnlyAcceptsPositiveMoves) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto e = oracle::random_graph(rng, 40, 0.12);
    auto g = undirected(40, e);
    LouvainState state(g);
    std::vector<NodeId> order(40);
    for (NodeId i = 0; i < 40; ++i) order[i] = i;
    double q = state.modularity();
    for (int pass = 0; pass < 10; ++pass) {
      for (NodeId i : order) {
        std::vector<NodeId> one{i};
        CommunityId was = state.community(i);
        if (state.sweep(one) == 1) {
          EXPECT_GT(-state.move_delta(i, was), 0.0);
          EXPECT_GT(state.modularity(), q);
        }
        q = state.modularity();
      }
    }
  }
}

TEST(Louvain, TwoTenCliques) {
  auto g = undirected(20, two_cliques(10));
  auto d = louvain(g);
  ASSERT_EQ(d.partition.community_count(), 2u);
  for (NodeId u = 0; u < 20; ++u) EXPECT_EQ(d.partition.community_of(u), d.partition.community_of(u < 10 ? 0 : 10));
  EXPECT_NE(d.partition.community_of(0), d.partition.community_of(10));
  EXPECT_NEAR(d.modularity, 0.5, 1e-12);
  EXPECT_NEAR(oracle::modularity(oracle::adjacency(20, two_cliques(10)), labels_of(d.partition), true), 0.5, 1e-12);
}

TEST(Louvain, CompleteGraphIsOneCommunity) {
  auto g = undirected(5, clique(0, 5));
  auto d = louvain(g);
  EXPECT_EQ(d.partition.community_count(), 1u);
}

TEST(Louvain, PlantedPartitionRecovery) {
  SynthConfig cfg;
  cfg.block_sizes = {50, 50, 50, 50};
  cfg.p_in = 0.3;
  cfg.p_out = 0.01;
  cfg.seed = 2024;
  auto corpus = generate(cfg);
  auto g = symmetrize(corpus.graph);
  auto d = louvain(g);
  auto planted = Partition::from_dense(corpus.truth.block);
  EXPECT_GE(adjusted_agreement(d.partition.assignment(), planted.assignment()), 0.95);
  EXPECT_NEAR(d.modularity, modularity(g, planted), 0.02);
}

TEST(Louvain, LevelsAreMonotoneAndComposeToFlat) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    SynthConfig cfg;
    cfg.block_sizes = {30, 25, 40, 20, 35};
    cfg.p_in = 0.2;
    cfg.p_out = 0.03;
    cfg.seed = rng();
    auto g = symmetrize(generate(cfg).graph);
    LouvainConfig lc;
    lc.seed = rng();
    auto d = louvain(g, lc);

    double previous = modularity(g, Partition::singletons(g.node_count()));
    std::vector<CommunityId> composed(g.node_count());
    for (NodeId u = 0; u < composed.size(); ++u) composed[u] = u;
    for (const auto& level : d.levels) {
      for (auto& x : composed) x = level.partition.community_of(x);
      double q = modularity(g, Partition::from_dense(composed));
      EXPECT_NEAR(q, level.modularity, 1e-12);
      EXPECT_GE(q, previous - 1e-12);
      previous = q;
    }
    EXPECT_EQ(Partition::from_dense(composed), d.partition);
    EXPECT_GE(d.modularity, modularity(g, Partition::singletons(g.node_count())));
  }
}

TEST(Louvain, AggregationPreservesModularity) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    auto e = oracle::random_graph(rng, 25, 0.2);
    if (e.empty()) continue;
    auto g = undirected(25, e);
    auto p = random_partition(rng, 25, 4);
    auto agg = aggregate(g, p);
    EXPECT_NEAR(agg.total_weight(), g.total_weight(), 1e-12);
    EXPECT_NEAR(modularity(agg, Partition::singletons(agg.node_count())), modularity(g, p), 1e-12);
  }
}

TEST(Louvain, DeterministicForSeed) {
  SynthConfig cfg;
  cfg.block_sizes = {40, 40, 40};
  cfg.p_in = 0.15;
  cfg.p_out = 0.02;
  auto g = symmetrize(generate(cfg).graph);
  LouvainConfig lc;
  lc.seed = 77;
  EXPECT_EQ(louvain(g, lc).partition, louvain(g, lc).partition);
}

TEST(Louvain, ConfigValidation) {
  auto g = undirected(2, {{0, 1}});
  LouvainConfig bad;
  bad.max_levels = 0;
  EXPECT_THROW(louvain(g, bad), ValidationError);
  bad = {};
  bad.min_level_gain = -1;
  EXPECT_THROW(louvain(g, bad), ValidationError);
}

TEST(CommunityViews, Examples) {
  std::vector<Arc> arcs{{0, 1, false}, {1, 0, false}};
  auto g = build_graph(arcs, 2);
  auto one = community_views(g, Partition::from_dense({0, 0}));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].arc_count(), 2u);

  auto singles = community_views(g, Partition::singletons(2));
  ASSERT_EQ(singles.size(), 2u);
  for (const auto& v : singles) EXPECT_EQ(v.arc_count(), 0u);
}

TEST(CommunityViews, UnionIsIntraCommunityArcs) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = build_graph(oracle::to_arcs(oracle::random_digraph(rng, 30, 0.15)), 30);
    auto p = random_partition(rng, 30, 4);
    std::set<std::pair<NodeId, NodeId>> got;
    for (const auto& v : community_views(g, p))
      for (auto [a, b] : v.local_arcs()) got.emplace(v.to_parent(a), v.to_parent(b));
    std::set<std::pair<NodeId, NodeId>> expected;
    for (const auto& a : g.arcs())
      if (p.community_of(a.source) == p.community_of(a.target)) expected.emplace(a.source, a.target);
    EXPECT_EQ(got, expected);
  }
}
