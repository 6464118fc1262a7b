#include <cmath>
#include <map>

#include "doctest.h"
#include "ordermatch/error.hpp"
#include "ordermatch/sampling.hpp"
#include "test_support.hpp"

using namespace om;
using namespace om::testing;

namespace {

SamplerConfig sized(SamplerStrategy s, std::size_t lo, std::size_t hi, double p = 0.5) {
  SamplerConfig cfg;
  cfg.strategy = s;
  cfg.min_nodes = lo;
  cfg.max_nodes = hi;
  cfg.edge_keep_probability = p;
  return cfg;
}

const SamplerStrategy kAll[] = {SamplerStrategy::kRandomBfs, SamplerStrategy::kRandomWalk, SamplerStrategy::kMfinder};

}  // namespace

TEST_CASE("sampler config validation") {
  SamplerConfig cfg;
  cfg.edge_keep_probability = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = SamplerConfig{};
  cfg.min_nodes = 5;
  cfg.max_nodes = 4;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  CHECK(parse_sampler_strategy("mfinder") == SamplerStrategy::kMfinder);
  CHECK_THROWS_AS(parse_sampler_strategy("dfs"), InvalidArgument);
}

TEST_CASE("samplers on a path with every edge kept take the whole path") {
  const auto g = path_graph(3);
  for (auto s : kAll) {
    Rng rng(1);
    const auto n = sample_neighborhood(g, 0, sized(s, 3, 3, 1.0), rng);
    CHECK(n.graph.node_count() == 3);
    CHECK(n.graph.edge_count() == 2);
    CHECK(n.origin->node == 0);
  }
}

TEST_CASE("max_nodes=1 yields the anchor alone") {
  std::mt19937_64 gen(4);
  const auto g = random_connected_graph(10, 0.4, gen);
  for (auto s : kAll) {
    Rng rng(9);
    const auto n = sample_neighborhood(g, 3, sized(s, 1, 1), rng);
    CHECK(n.graph.node_count() == 1);
    CHECK(n.graph.edge_count() == 0);
  }
}

TEST_CASE("samplers are seed-deterministic") {
  std::mt19937_64 gen(8);
  const auto g = random_connected_graph(25, 0.15, gen, 3);
  for (auto s : kAll) {
    Rng a(77), b(77);
    for (int i = 0; i < 20; ++i) {
      CHECK(sample_neighborhood(g, 5, sized(s, 2, 12), a) == sample_neighborhood(g, 5, sized(s, 2, 12), b));
    }
  }
}

TEST_CASE("sampler outputs are connected, bounded, anchored subgraphs of g") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_graph(12, 0.25, gen, 2);
    const NodeId u = static_cast<NodeId>(gen() % 12);
    const auto whole = k_hop_neighborhood(g, u, 12);
    for (auto s : kAll) {
      Rng rng(trial);
      const auto n = sample_neighborhood(g, u, sized(s, 2, 7), rng);
      n.validate();
      CHECK(n.graph.node_count() <= 7);
      CHECK(n.graph.node_count() <= whole.graph.node_count());
      CHECK(n.graph.label(n.anchor) == g.label(u));
      CHECK(is_subgraph_anchored(n, whole, MatchBudget{}) == MatchResult::kTrue);
    }
  }
}

TEST_CASE("mfinder expands frontier nodes in proportion to degree") {
  // Center 0 with leaves 1, 2, 3 of degree 1, 2, 3 (extra pendants hang off
  // them). Leaf labels identify which one was expanded first.
  LabeledGraph g(7, 4);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(2, 4);
  g.add_edge(0, 3);
  g.add_edge(3, 5);
  g.add_edge(3, 6);
  for (NodeId leaf = 1; leaf <= 3; ++leaf) g.set_label(leaf, leaf);
  const auto cfg = sized(SamplerStrategy::kMfinder, 2, 2);
  Rng rng(123);
  std::map<Label, int> hits;
  const int draws = 100'000;
  for (int i = 0; i < draws; ++i) {
    const auto n = mfinder_sample(g, 0, cfg, rng);
    REQUIRE(n.graph.node_count() == 2);
    ++hits[n.graph.label(1)];
  }
  for (Label leaf = 1; leaf <= 3; ++leaf) {
    const double expected = static_cast<double>(leaf) / 6.0;
    CHECK(std::abs(hits[leaf] / static_cast<double>(draws) - expected) < 0.02);
  }
}

TEST_CASE("pick_anchor never picks isolated nodes") {
  LabeledGraph g(5);
  g.add_edge(1, 3);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const NodeId a = pick_anchor(g, rng);
    CHECK((a == 1 || a == 3));
  }
  LabeledGraph lonely(1);
  CHECK(pick_anchor(lonely, rng) == 0);
}

TEST_CASE("target sampling truncates nearest-first") {
  PairSamplerConfig cfg;
  cfg.target_max_nodes = 4;
  Rng rng(5);
  const auto t = sample_target(star_graph(6), 0, 2, cfg, rng);
  CHECK(t.graph.node_count() == 4);
  CHECK(t.graph.edge_count() == 3);
  t.validate();
}

namespace {

PairSamplerConfig pair_config() {
  PairSamplerConfig cfg;
  cfg.query = sized(SamplerStrategy::kRandomBfs, 2, 8);
  cfg.target_max_nodes = 14;
  return cfg;
}

}  // namespace

TEST_CASE("positive pairs pass the oracle") {
  std::mt19937_64 gen(99);
  std::vector<LabeledGraph> pool;
  for (int i = 0; i < 10; ++i) pool.push_back(random_connected_graph(14, 0.2, gen, 2));
  const auto cfg = pair_config();
  Rng rng(1);
  int emitted = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto pair = sample_positive_pair(pool[i % pool.size()], 1 + i % 4, cfg, rng);
    if (!pair) continue;
    ++emitted;
    CHECK(pair->positive);
    CHECK(pair->kind == PairKind::kPositive);
    CHECK(is_subgraph_anchored(pair->query, pair->target, MatchBudget::unlimited()) == MatchResult::kTrue);
  }
  CHECK(emitted >= 990);
}

TEST_CASE("query may equal the whole target and is still positive") {
  auto cfg = pair_config();
  cfg.query = sized(SamplerStrategy::kRandomBfs, 30, 30, 1.0);
  Rng rng(3);
  const auto pair = sample_positive_pair(complete_graph(4), 2, cfg, rng);
  REQUIRE(pair);
  CHECK(pair->query.graph == pair->target.graph);
  CHECK(pair->positive);
}

TEST_CASE("single-edge graph gives a small positive") {
  Rng rng(4);
  const auto pair = sample_positive_pair(path_graph(2), 1, pair_config(), rng);
  REQUIRE(pair);
  CHECK(pair->target.graph.node_count() <= 2);
  CHECK(pair->query.graph.node_count() <= 2);
  CHECK(pair->positive);
}

TEST_CASE("negative pairs fail the oracle") {
  std::mt19937_64 gen(100);
  std::vector<LabeledGraph> pool;
  for (int i = 0; i < 10; ++i) pool.push_back(random_connected_graph(14, 0.2, gen, 2));
  const auto cfg = pair_config();
  Rng rng(2);
  const PairKind kinds[] = {PairKind::kHardNegative, PairKind::kSameTargetNegative, PairKind::kCrossTargetNegative};
  std::map<PairKind, int> emitted;
  for (int i = 0; i < 1000; ++i) {
    const PairKind kind = kinds[i % 3];
    const auto& g = pool[i % pool.size()];
    const auto& other = pool[(i + 1) % pool.size()];
    const auto pair = sample_negative_pair(g, 1 + i % 4, kind, cfg, rng, &other, i % pool.size(), (i + 1) % pool.size());
    if (!pair) continue;
    ++emitted[kind];
    CHECK_FALSE(pair->positive);
    CHECK(pair->kind == kind);
    CHECK(is_subgraph_anchored(pair->query, pair->target, MatchBudget::unlimited()) == MatchResult::kFalse);
    pair->query.validate();
  }
  for (auto kind : kinds) CHECK(emitted[kind] > 250);
}

TEST_CASE("hard negative on a triangle falls back to a label swap") {
  LabeledGraph tri = complete_graph(3);
  tri.set_label_alphabet(2);
  auto cfg = pair_config();
  cfg.query = sized(SamplerStrategy::kRandomBfs, 3, 3, 1.0);
  Rng rng(6);
  const auto pair = sample_negative_pair(tri, 1, PairKind::kHardNegative, cfg, rng);
  REQUIRE(pair);
  CHECK(pair->query.graph.edge_count() == 3);
  CHECK(pair->kind == PairKind::kHardNegative);
  int relabeled = 0;
  for (NodeId v = 0; v < 3; ++v) relabeled += pair->query.graph.label(v) == 1;
  CHECK(relabeled >= 1);

  // With a single label nothing in the menu applies: the retry budget is reported as nullopt.
  Rng rng2(6);
  CHECK_FALSE(sample_negative_pair(complete_graph(3), 1, PairKind::kHardNegative, cfg, rng2).has_value());
}

TEST_CASE("cross-target negatives over disjoint label alphabets are always negative") {
  std::mt19937_64 gen(12);
  auto a = random_connected_graph(10, 0.3, gen);
  auto b = random_connected_graph(10, 0.3, gen);
  a.set_label_alphabet(2);
  b.set_label_alphabet(2);
  for (NodeId v = 0; v < 10; ++v) b.set_label(v, 1);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto pair = sample_negative_pair(a, 2, PairKind::kCrossTargetNegative, pair_config(), rng, &b);
    REQUIRE(pair);
    CHECK_FALSE(pair->positive);
  }
  CHECK_THROWS_AS(sample_negative_pair(a, 2, PairKind::kCrossTargetNegative, pair_config(), rng), InvalidArgument);
  CHECK_THROWS_AS(sample_negative_pair(LabeledGraph(1), 2, PairKind::kSameTargetNegative, pair_config(), rng),
                  InvalidArgument);
}

TEST_CASE("perturb_query keeps the query connected") {
  std::mt19937_64 gen(31);
  for (int i = 0; i < 100; ++i) {
    AnchoredNeighborhood n;
    n.graph = random_connected_graph(6, 0.4, gen, 2);
    n.anchor = 0;
    Rng rng(i);
    if (perturb_query(n, rng)) {
      CHECK(is_connected(n.graph));
      n.validate();
    }
  }
}
