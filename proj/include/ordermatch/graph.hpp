#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace om {

using NodeId = std::uint32_t;
using Label = std::uint32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  std::optional<Label> label;
};

/// Undirected simple graph with categorical node labels and optional
/// categorical edge labels. Adjacency lists are kept sorted.
///
/// A graph is either edge-labeled (every edge carries a label, default 0) or
/// not; the matcher compares edge labels only when both graphs carry them.
class LabeledGraph {
 public:
  LabeledGraph() = default;
  explicit LabeledGraph(std::size_t node_count, std::size_t label_alphabet = 1);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t label_alphabet() const noexcept { return label_alphabet_; }
  bool has_edge_labels() const noexcept { return edge_labeled_; }

  NodeId add_node(Label label = 0);
  void set_label(NodeId u, Label label);
  // Grows the alphabet; shrinking below a label in use throws.
  void set_label_alphabet(std::size_t size);

  // Returns false when the edge already exists. Self-loops throw.
  bool add_edge(NodeId u, NodeId v, std::optional<Label> edge_label = std::nullopt);
  bool remove_edge(NodeId u, NodeId v);

  Label label(NodeId u) const { return labels_[check(u)]; }
  std::span<const Label> labels() const noexcept { return labels_; }
  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_[check(u)]; }
  std::size_t degree(NodeId u) const { return adjacency_[check(u)].size(); }
  bool has_edge(NodeId u, NodeId v) const;
  // Label of edge (u, v); nullopt when the edge is absent or the graph is unlabeled.
  std::optional<Label> edge_label(NodeId u, NodeId v) const;
  // Edge labels parallel to neighbors(u); empty when the graph is unlabeled.
  std::span<const Label> neighbor_edge_labels(NodeId u) const;

  std::vector<Edge> edges() const;

  // Throws InvalidArgument describing the first broken invariant.
  void validate() const;

  friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;

 private:
  NodeId check(NodeId u) const;

  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::vector<Label>> edge_labels_;
  std::vector<Label> labels_;
  std::size_t edge_count_ = 0;
  std::size_t label_alphabet_ = 1;
  bool edge_labeled_ = false;
};

struct NeighborhoodOrigin {
  std::uint64_t graph_id = 0;
  NodeId node = 0;
  friend bool operator==(const NeighborhoodOrigin&, const NeighborhoodOrigin&) = default;
};

/// Connected subgraph with a distinguished anchor node.
struct AnchoredNeighborhood {
  LabeledGraph graph;
  NodeId anchor = 0;
  int radius = 0;
  std::optional<NeighborhoodOrigin> origin;

  void validate() const;
  friend bool operator==(const AnchoredNeighborhood&, const AnchoredNeighborhood&) = default;
};

struct StructuralFeatures {
  std::size_t degree = 0;
  double clustering = 0.0;
};

// Hop distances from u; unreachable nodes get -1. max_hops < 0 means unbounded.
std::vector<int> bfs_distances(const LabeledGraph& g, NodeId u, int max_hops = -1);

bool is_connected(const LabeledGraph& g);

// Subgraph on `nodes` keeping every edge of g between them. Nodes are renumbered
// in BFS order from nodes[0] (ties by original id); unreachable ones trail in
// original-id order. mapping, when given, receives new id -> original id.
LabeledGraph induced_subgraph(const LabeledGraph& g, std::span<const NodeId> nodes,
                              std::vector<NodeId>* mapping = nullptr);

// Edge-induced k-hop neighborhood of u, anchor renumbered to 0.
AnchoredNeighborhood k_hop_neighborhood(const LabeledGraph& g, NodeId u, int k,
                                        std::uint64_t graph_id = 0);

// Neighborhood on an arbitrary connected node set containing anchor (anchor -> id 0).
AnchoredNeighborhood neighborhood_from_nodes(const LabeledGraph& g, NodeId anchor,
                                             std::span<const NodeId> nodes,
                                             std::uint64_t graph_id = 0);

StructuralFeatures structural_features(const LabeledGraph& g, NodeId u);

// Applies perm (old id -> new id) to every node.
LabeledGraph permute(const LabeledGraph& g, std::span<const NodeId> perm);

std::uint64_t fingerprint(const LabeledGraph& g);

}  // namespace om
