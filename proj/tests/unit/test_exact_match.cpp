#include "doctest.h"
#include "ordermatch/error.hpp"
#include "ordermatch/exact_match.hpp"
#include "test_support.hpp"

using namespace om;
using namespace om::testing;

namespace {

AnchoredNeighborhood anchored(LabeledGraph g, NodeId anchor) {
  AnchoredNeighborhood n;
  n.graph = std::move(g);
  n.anchor = anchor;
  n.radius = static_cast<int>(n.graph.node_count());
  return n;
}

const MatchBudget kBudget{};

}  // namespace

TEST_CASE("anchored examples") {
  CHECK(is_subgraph_anchored(anchored(path_graph(2), 0), anchored(complete_graph(3), 1), kBudget) ==
        MatchResult::kTrue);
  CHECK(is_subgraph_anchored(anchored(complete_graph(3), 0), anchored(path_graph(5), 2), kBudget) ==
        MatchResult::kFalse);
  CHECK(is_subgraph_anchored(anchored(cycle_graph(4), 0), anchored(complete_graph(4), 3), kBudget) ==
        MatchResult::kTrue);
  // anchor maps onto anchor: a path end fits on a star leaf, the path middle does not
  CHECK(is_subgraph_anchored(anchored(path_graph(3), 0), anchored(star_graph(3), 1), kBudget) ==
        MatchResult::kTrue);
  CHECK(is_subgraph_anchored(anchored(path_graph(3), 1), anchored(star_graph(3), 1), kBudget) ==
        MatchResult::kFalse);
}

TEST_CASE("unanchored examples") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    auto t = random_graph(6, 0.5, rng);
    if (t.edge_count() == 0) continue;
    CHECK(is_subgraph(path_graph(2), t, kBudget) == MatchResult::kTrue);
  }
  CHECK(is_subgraph(path_graph(7), complete_graph(5), kBudget) == MatchResult::kFalse);
  LabeledGraph disconnected(3);
  disconnected.add_edge(0, 1);
  CHECK_THROWS_AS(is_subgraph(disconnected, complete_graph(4), kBudget), InvalidArgument);
}

TEST_CASE("count_anchored_matches examples") {
  for (std::size_t d = 1; d <= 6; ++d) {
    CHECK(count_anchored_matches(anchored(path_graph(2), 0), anchored(star_graph(d), 0), kBudget).count == d);
  }
  CHECK(count_anchored_matches(anchored(complete_graph(3), 0), anchored(complete_graph(3), 0), kBudget).count == 2);
}

TEST_CASE("matcher agrees with exhaustive enumeration on random ER(8, 0.3)") {
  std::mt19937_64 rng(11);
  int positives = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t nq = 2 + rng() % 4;
    const auto q = random_connected_graph(nq, 0.5, rng);
    const auto t = random_graph(8, 0.3, rng);
    const bool expected = BruteForceMatcher(q, t).exists();
    positives += expected;
    CHECK(is_subgraph(q, t, kBudget) == (expected ? MatchResult::kTrue : MatchResult::kFalse));
  }
  CHECK(positives > 10);
}

TEST_CASE("labeled counts agree with exhaustive enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto q = random_connected_graph(1 + rng() % 4, 0.6, rng, 2);
    const auto t = random_graph(6, 0.5, rng, 2);
    const NodeId qa = static_cast<NodeId>(rng() % q.node_count());
    const NodeId ta = static_cast<NodeId>(rng() % t.node_count());
    const auto expected = BruteForceMatcher(q, t, static_cast<int>(qa), static_cast<int>(ta)).count();
    const auto got = count_anchored_matches(anchored(q, qa), anchored(t, ta), kBudget);
    CHECK_FALSE(got.timed_out);
    CHECK(got.count == expected);
    CHECK((is_subgraph_anchored(q, qa, t, ta, kBudget) == MatchResult::kTrue) == (expected > 0));
  }
}

TEST_CASE("edge labels are compared only when both graphs carry them") {
  LabeledGraph q(2);
  q.add_edge(0, 1, 1);
  LabeledGraph t(3);
  t.add_edge(0, 1, 2);
  t.add_edge(1, 2, 1);
  CHECK(count_anchored_matches(anchored(q, 0), anchored(t, 1), kBudget).count == 1);
  CHECK(is_subgraph_anchored(q, 0, t, 0, kBudget) == MatchResult::kFalse);
  CHECK(is_subgraph_anchored(path_graph(2), 0, t, 0, kBudget) == MatchResult::kTrue);
}

TEST_CASE("anchored true implies unanchored true; label flip forces false") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    auto q = random_connected_graph(3 + rng() % 3, 0.5, rng);
    const auto t = random_graph(7, 0.5, rng);
    const NodeId qa = static_cast<NodeId>(rng() % q.node_count());
    const NodeId ta = static_cast<NodeId>(rng() % t.node_count());
    if (is_subgraph_anchored(q, qa, t, ta, kBudget) == MatchResult::kTrue) {
      CHECK(is_subgraph(q, t, kBudget) == MatchResult::kTrue);
    }
    q.set_label(static_cast<NodeId>(rng() % q.node_count()), 1);  // absent from t
    CHECK(is_subgraph(q, t, kBudget) == MatchResult::kFalse);
    CHECK(is_subgraph_anchored(q, qa, t, ta, kBudget) == MatchResult::kFalse);
  }
}

TEST_CASE("budget exhaustion is a timeout, never false") {
  // a 5-state budget trips long before a 12-cycle search settles
  std::mt19937_64 rng(2);
  const auto t = random_graph(40, 0.15, rng);
  const auto q = cycle_graph(12);
  const auto r = is_subgraph(q, t, MatchBudget{5, std::chrono::milliseconds(10'000)});
  CHECK(r == MatchResult::kTimeout);
  CHECK_THROWS_AS(is_subgraph(q, t, MatchBudget{0, std::chrono::milliseconds(1)}), InvalidArgument);
  CHECK(MatchBudget::unlimited().max_states > 0);
  CHECK(is_subgraph(path_graph(3), path_graph(4), MatchBudget::unlimited()) == MatchResult::kTrue);
}
