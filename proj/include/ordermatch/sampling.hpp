#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ordermatch/exact_match.hpp"
#include "ordermatch/graph.hpp"
#include "ordermatch/util.hpp"

namespace om {

enum class SamplerStrategy { kRandomBfs, kRandomWalk, kMfinder };

std::string_view to_string(SamplerStrategy s) noexcept;
SamplerStrategy parse_sampler_strategy(std::string_view name);

struct SamplerConfig {
  SamplerStrategy strategy = SamplerStrategy::kRandomBfs;
  double edge_keep_probability = 0.5;
  double restart_probability = 0.2;
  std::size_t min_nodes = 1;
  std::size_t max_nodes = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

// Every sampler returns a connected neighborhood anchored at u whose size is
// drawn uniformly from [min_nodes, max_nodes] (capped by what is reachable).
// The node set is edge-induced: all edges of g between chosen nodes are kept.
AnchoredNeighborhood random_bfs_sample(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng);
AnchoredNeighborhood random_walk_sample(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng);
AnchoredNeighborhood mfinder_sample(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng);
// Dispatches on cfg.strategy.
AnchoredNeighborhood sample_neighborhood(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng);

enum class PairKind { kPositive, kHardNegative, kSameTargetNegative, kCrossTargetNegative };

std::string_view to_string(PairKind k) noexcept;

struct TrainingPair {
  AnchoredNeighborhood query;
  AnchoredNeighborhood target;
  bool positive = false;
  PairKind kind = PairKind::kPositive;
};

struct PairSamplerConfig {
  SamplerConfig query;
  // Targets are k-hop neighborhoods, truncated to this many nodes by BFS.
  std::size_t target_max_nodes = 30;
  MatchBudget oracle_budget{200'000, std::chrono::milliseconds(2'000)};
  int max_retries = 16;

  void validate() const;
};

// Picks a uniformly random non-isolated anchor (any node when all are isolated).
NodeId pick_anchor(const LabeledGraph& g, Rng& rng);

AnchoredNeighborhood sample_target(const LabeledGraph& g, NodeId u, int radius, const PairSamplerConfig& cfg,
                                   Rng& rng, std::uint64_t graph_id = 0);

// Positive: the query is sampled inside the target from the target's anchor.
// Returns nullopt only when the oracle times out on the certification check.
std::optional<TrainingPair> sample_positive_pair(const LabeledGraph& g, int radius, const PairSamplerConfig& cfg,
                                                 Rng& rng, std::uint64_t graph_id = 0);

// Negative pairs are oracle-verified; nullopt once the retry budget is spent.
// kSameTargetNegative draws the query from another anchor of g,
// kCrossTargetNegative from query_source (which must differ from g), and
// kHardNegative perturbs a positive query until the oracle rejects it.
std::optional<TrainingPair> sample_negative_pair(const LabeledGraph& g, int radius, PairKind kind,
                                                 const PairSamplerConfig& cfg, Rng& rng,
                                                 const LabeledGraph* query_source = nullptr,
                                                 std::uint64_t graph_id = 0, std::uint64_t query_graph_id = 0);

// One hard-negative perturbation of the query graph (anchor is kept). Returns
// false when no perturbation from the menu applies.
bool perturb_query(AnchoredNeighborhood& query, Rng& rng);

}  // namespace om
