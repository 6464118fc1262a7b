#include "ordermatch/sampling.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>
#include <vector>

#include "ordermatch/error.hpp"

namespace om {

std::string_view to_string(SamplerStrategy s) noexcept {
  switch (s) {
    case SamplerStrategy::kRandomBfs: return "random_bfs";
    case SamplerStrategy::kRandomWalk: return "random_walk_restart";
    case SamplerStrategy::kMfinder: return "mfinder_degree_weighted";
  }
  return "?";
}

SamplerStrategy parse_sampler_strategy(std::string_view name) {
  if (name == "random_bfs" || name == "bfs") return SamplerStrategy::kRandomBfs;
  if (name == "random_walk_restart" || name == "random_walk" || name == "walk") return SamplerStrategy::kRandomWalk;
  if (name == "mfinder_degree_weighted" || name == "mfinder") return SamplerStrategy::kMfinder;
  throw InvalidArgument("unknown sampler strategy '" + std::string(name) + "'");
}

std::string_view to_string(PairKind k) noexcept {
  switch (k) {
    case PairKind::kPositive: return "positive";
    case PairKind::kHardNegative: return "hard";
    case PairKind::kSameTargetNegative: return "same_target";
    case PairKind::kCrossTargetNegative: return "cross_target";
  }
  return "?";
}

void SamplerConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in (0, 1]");
  };
  prob(edge_keep_probability, "edge_keep_probability");
  prob(restart_probability, "restart_probability");
  if (min_nodes < 1) throw InvalidArgument("min_nodes must be >= 1");
  if (max_nodes < min_nodes) throw InvalidArgument("max_nodes must be >= min_nodes");
}

void PairSamplerConfig::validate() const {
  query.validate();
  oracle_budget.validate();
  if (target_max_nodes < 1) throw InvalidArgument("target_max_nodes must be >= 1");
  if (max_retries < 1) throw InvalidArgument("max_retries must be >= 1");
}

namespace {

std::size_t reachable_count(const LabeledGraph& g, NodeId u) {
  const auto dist = bfs_distances(g, u);
  return static_cast<std::size_t>(std::count_if(dist.begin(), dist.end(), [](int d) { return d >= 0; }));
}

std::size_t draw_size(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  if (u >= g.node_count()) throw InvalidArgument("invalid node id " + std::to_string(u));
  std::uniform_int_distribution<std::size_t> pick(cfg.min_nodes, cfg.max_nodes);
  return std::min(pick(rng), reachable_count(g, u));
}

AnchoredNeighborhood finish(const LabeledGraph& g, NodeId u, const std::vector<NodeId>& nodes) {
  return neighborhood_from_nodes(g, u, nodes);
}

}  // namespace

AnchoredNeighborhood random_bfs_sample(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng) {
  const std::size_t size = draw_size(g, u, cfg, rng);
  std::vector<NodeId> chosen{u};
  std::unordered_set<NodeId> in{u};
  std::bernoulli_distribution keep(cfg.edge_keep_probability);
  std::deque<NodeId> queue{u};
  std::vector<NodeId> nbrs;
  while (chosen.size() < size) {
    if (queue.empty()) {
      // Another sweep from every chosen node over edges not yet taken.
      queue.assign(chosen.begin(), chosen.end());
    }
    const NodeId x = queue.front();
    queue.pop_front();
    nbrs.assign(g.neighbors(x).begin(), g.neighbors(x).end());
    std::shuffle(nbrs.begin(), nbrs.end(), rng);
    for (NodeId y : nbrs) {
      if (in.count(y) || !keep(rng)) continue;
      in.insert(y);
      chosen.push_back(y);
      queue.push_back(y);
      if (chosen.size() == size) break;
    }
  }
  return finish(g, u, chosen);
}

AnchoredNeighborhood random_walk_sample(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng) {
  const std::size_t size = draw_size(g, u, cfg, rng);
  std::vector<NodeId> chosen{u};
  std::unordered_set<NodeId> in{u};
  std::bernoulli_distribution restart(cfg.restart_probability);
  const std::size_t step_cap = 200 * size + 200;
  NodeId cur = u;
  for (std::size_t step = 0; step < step_cap && chosen.size() < size; ++step) {
    if (restart(rng) || g.degree(cur) == 0) {
      cur = u;
      continue;
    }
    const auto nbrs = g.neighbors(cur);
    std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
    cur = nbrs[pick(rng)];
    if (in.insert(cur).second) chosen.push_back(cur);
  }
  return finish(g, u, chosen);
}

AnchoredNeighborhood mfinder_sample(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng) {
  const std::size_t size = draw_size(g, u, cfg, rng);
  std::vector<NodeId> chosen{u};
  std::unordered_set<NodeId> in{u};
  std::vector<NodeId> frontier;
  std::unordered_set<NodeId> on_frontier;
  auto expand = [&](NodeId x) {
    for (NodeId y : g.neighbors(x)) {
      if (!in.count(y) && on_frontier.insert(y).second) frontier.push_back(y);
    }
  };
  expand(u);
  std::vector<double> weights;
  while (chosen.size() < size && !frontier.empty()) {
    weights.resize(frontier.size());
    for (std::size_t i = 0; i < frontier.size(); ++i) weights[i] = static_cast<double>(g.degree(frontier[i]));
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    const std::size_t i = pick(rng);
    const NodeId y = frontier[i];
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(i));
    on_frontier.erase(y);
    in.insert(y);
    chosen.push_back(y);
    expand(y);
  }
  return finish(g, u, chosen);
}

AnchoredNeighborhood sample_neighborhood(const LabeledGraph& g, NodeId u, const SamplerConfig& cfg, Rng& rng) {
  switch (cfg.strategy) {
    case SamplerStrategy::kRandomBfs: return random_bfs_sample(g, u, cfg, rng);
    case SamplerStrategy::kRandomWalk: return random_walk_sample(g, u, cfg, rng);
    case SamplerStrategy::kMfinder: return mfinder_sample(g, u, cfg, rng);
  }
  throw InvalidArgument("unknown sampler strategy");
}

NodeId pick_anchor(const LabeledGraph& g, Rng& rng) {
  if (g.node_count() == 0) throw InvalidArgument("cannot pick an anchor in an empty graph");
  std::vector<NodeId> candidates;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) > 0) candidates.push_back(v);
  }
  if (candidates.empty()) {
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(g.node_count() - 1));
    return pick(rng);
  }
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

AnchoredNeighborhood sample_target(const LabeledGraph& g, NodeId u, int radius, const PairSamplerConfig& cfg,
                                   Rng& rng, std::uint64_t graph_id) {
  const auto dist = bfs_distances(g, u, radius);
  std::vector<NodeId> ball;
  for (NodeId v = 0; v < dist.size(); ++v) {
    if (dist[v] >= 0) ball.push_back(v);
  }
  if (ball.size() <= cfg.target_max_nodes) return k_hop_neighborhood(g, u, radius, graph_id);
  // Truncate nearest-first with random tie-breaking; every kept node keeps a
  // shortest-path predecessor, so hop distances are unchanged.
  std::shuffle(ball.begin(), ball.end(), rng);
  std::stable_sort(ball.begin(), ball.end(), [&](NodeId a, NodeId b) { return dist[a] < dist[b]; });
  ball.resize(cfg.target_max_nodes);
  auto n = neighborhood_from_nodes(g, u, ball, graph_id);
  n.radius = radius;
  return n;
}

std::optional<TrainingPair> sample_positive_pair(const LabeledGraph& g, int radius, const PairSamplerConfig& cfg,
                                                 Rng& rng, std::uint64_t graph_id) {
  cfg.validate();
  if (g.node_count() == 0) throw InvalidArgument("positive pairs need a nonempty graph");
  const NodeId u = pick_anchor(g, rng);
  TrainingPair pair;
  pair.target = sample_target(g, u, radius, cfg, rng, graph_id);
  pair.query = sample_neighborhood(pair.target.graph, pair.target.anchor, cfg.query, rng);
  pair.query.origin = pair.target.origin;
  pair.positive = true;
  pair.kind = PairKind::kPositive;
  switch (is_subgraph_anchored(pair.query, pair.target, cfg.oracle_budget)) {
    case MatchResult::kTrue: return pair;
    case MatchResult::kTimeout: return std::nullopt;
    case MatchResult::kFalse: break;
  }
  throw RuntimeFailure("sampled positive pair failed oracle verification");
}

namespace {

bool is_bridge(const LabeledGraph& g, NodeId a, NodeId b) {
  LabeledGraph h = g;
  h.remove_edge(a, b);
  return bfs_distances(h, a)[b] < 0;
}

void refresh_radius(AnchoredNeighborhood& n) {
  const auto dist = bfs_distances(n.graph, n.anchor);
  n.radius = *std::max_element(dist.begin(), dist.end());
}

}  // namespace

bool perturb_query(AnchoredNeighborhood& query, Rng& rng) {
  LabeledGraph& g = query.graph;
  const std::size_t n = g.node_count();
  std::vector<std::pair<NodeId, NodeId>> non_edges;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (!g.has_edge(a, b)) non_edges.emplace_back(a, b);
  std::vector<Edge> removable;
  if (!non_edges.empty()) {
    for (const Edge& e : g.edges()) {
      if (!is_bridge(g, e.u, e.v)) removable.push_back(e);
    }
  }
  enum Move { kAddEdge, kRewire, kSwapLabel };
  std::vector<Move> menu;
  if (!non_edges.empty()) menu.push_back(kAddEdge);
  if (!removable.empty() && !non_edges.empty()) menu.push_back(kRewire);
  if (g.label_alphabet() >= 2 && n > 0) menu.push_back(kSwapLabel);
  if (menu.empty()) return false;

  std::uniform_int_distribution<std::size_t> pick_move(0, menu.size() - 1);
  switch (menu[pick_move(rng)]) {
    case kAddEdge: {
      std::uniform_int_distribution<std::size_t> pick(0, non_edges.size() - 1);
      const auto [a, b] = non_edges[pick(rng)];
      g.add_edge(a, b, g.has_edge_labels() ? std::optional<Label>(0) : std::nullopt);
      break;
    }
    case kRewire: {
      std::uniform_int_distribution<std::size_t> pick_e(0, removable.size() - 1);
      std::uniform_int_distribution<std::size_t> pick_n(0, non_edges.size() - 1);
      const Edge e = removable[pick_e(rng)];
      const auto [a, b] = non_edges[pick_n(rng)];
      g.remove_edge(e.u, e.v);
      g.add_edge(a, b, e.label);
      break;
    }
    case kSwapLabel: {
      std::uniform_int_distribution<NodeId> pick_node(0, static_cast<NodeId>(n - 1));
      std::uniform_int_distribution<Label> pick_label(0, static_cast<Label>(g.label_alphabet() - 2));
      const NodeId v = pick_node(rng);
      Label l = pick_label(rng);
      if (l >= g.label(v)) ++l;  // uniform over the other labels
      g.set_label(v, l);
      break;
    }
  }
  refresh_radius(query);
  return true;
}

std::optional<TrainingPair> sample_negative_pair(const LabeledGraph& g, int radius, PairKind kind,
                                                 const PairSamplerConfig& cfg, Rng& rng,
                                                 const LabeledGraph* query_source, std::uint64_t graph_id,
                                                 std::uint64_t query_graph_id) {
  cfg.validate();
  if (g.node_count() < 2) throw InvalidArgument("negative pairs need at least 2 nodes");
  if (kind == PairKind::kPositive) throw InvalidArgument("sample_negative_pair needs a negative kind");

  if (kind == PairKind::kHardNegative) {
    auto base = sample_positive_pair(g, radius, cfg, rng, graph_id);
    if (!base) return std::nullopt;
    TrainingPair pair = std::move(*base);
    pair.positive = false;
    pair.kind = PairKind::kHardNegative;
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
      if (!perturb_query(pair.query, rng)) return std::nullopt;
      if (is_subgraph_anchored(pair.query, pair.target, cfg.oracle_budget) == MatchResult::kFalse) return pair;
    }
    return std::nullopt;
  }

  const LabeledGraph* source = &g;
  std::uint64_t source_id = graph_id;
  if (kind == PairKind::kCrossTargetNegative) {
    if (query_source == nullptr) throw InvalidArgument("cross-target negatives need a query source graph");
    source = query_source;
    source_id = query_graph_id;
  }
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    const NodeId u = pick_anchor(g, rng);
    NodeId q = pick_anchor(*source, rng);
    if (source == &g && source->node_count() > 1) {
      for (int spin = 0; spin < 8 && q == u; ++spin) q = pick_anchor(*source, rng);
    }
    TrainingPair pair;
    pair.target = sample_target(g, u, radius, cfg, rng, graph_id);
    const auto query_ball = sample_target(*source, q, radius, cfg, rng, source_id);
    pair.query = sample_neighborhood(query_ball.graph, query_ball.anchor, cfg.query, rng);
    pair.query.origin = query_ball.origin;
    pair.positive = false;
    pair.kind = kind;
    if (is_subgraph_anchored(pair.query, pair.target, cfg.oracle_budget) == MatchResult::kFalse) return pair;
  }
  return std::nullopt;
}

}  // namespace om
