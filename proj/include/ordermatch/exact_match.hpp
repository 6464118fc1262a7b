#pragma once

#include <chrono>
#include <cstdint>
#include <string_view>

#include "ordermatch/graph.hpp"

namespace om {

enum class MatchResult { kFalse, kTrue, kTimeout };

std::string_view to_string(MatchResult r) noexcept;

struct MatchBudget {
  std::uint64_t max_states = 10'000'000;
  std::chrono::milliseconds wall_timeout{20'000};

  static MatchBudget unlimited();
  void validate() const;
};

// Edge-induced (monomorphism) matching: every query edge must map onto a
// target edge; extra target edges are allowed. Node labels must agree, and
// edge labels must agree when both graphs carry them. Budget exhaustion is
// reported as kTimeout, never as kFalse.
MatchResult is_subgraph_anchored(const LabeledGraph& query, NodeId query_anchor, const LabeledGraph& target,
                                 NodeId target_anchor, const MatchBudget& budget);
MatchResult is_subgraph_anchored(const AnchoredNeighborhood& query, const AnchoredNeighborhood& target,
                                 const MatchBudget& budget);

// Unanchored decision. A disconnected query is an InvalidArgument.
MatchResult is_subgraph(const LabeledGraph& query, const LabeledGraph& target, const MatchBudget& budget);

struct MatchCount {
  std::uint64_t count = 0;
  bool timed_out = false;
};

// Number of distinct injective label-preserving anchored maps.
MatchCount count_anchored_matches(const AnchoredNeighborhood& query, const AnchoredNeighborhood& target,
                                  const MatchBudget& budget);

}  // namespace om
