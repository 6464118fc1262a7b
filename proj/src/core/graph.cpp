#include "ordermatch/graph.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "ordermatch/error.hpp"
#include "ordermatch/util.hpp"

namespace om {

LabeledGraph::LabeledGraph(std::size_t node_count, std::size_t label_alphabet)
    : adjacency_(node_count), labels_(node_count, 0), label_alphabet_(std::max<std::size_t>(1, label_alphabet)) {}

NodeId LabeledGraph::check(NodeId u) const {
  if (u >= adjacency_.size()) {
    throw InvalidArgument("invalid node id " + std::to_string(u) + " (graph has " +
                          std::to_string(adjacency_.size()) + " nodes)");
  }
  return u;
}

NodeId LabeledGraph::add_node(Label label) {
  if (label >= label_alphabet_) label_alphabet_ = label + 1;
  adjacency_.emplace_back();
  if (edge_labeled_) edge_labels_.emplace_back();
  labels_.push_back(label);
  return static_cast<NodeId>(adjacency_.size() - 1);
}

void LabeledGraph::set_label(NodeId u, Label label) {
  check(u);
  if (label >= label_alphabet_) label_alphabet_ = label + 1;
  labels_[u] = label;
}

void LabeledGraph::set_label_alphabet(std::size_t size) {
  for (Label l : labels_) {
    if (l >= size) throw InvalidArgument("label " + std::to_string(l) + " outside alphabet of size " + std::to_string(size));
  }
  label_alphabet_ = std::max<std::size_t>(1, size);
}

bool LabeledGraph::add_edge(NodeId u, NodeId v, std::optional<Label> edge_label) {
  check(u);
  check(v);
  if (u == v) throw InvalidArgument("self-loop on node " + std::to_string(u));
  auto& au = adjacency_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it != au.end() && *it == v) return false;
  if (edge_label && !edge_labeled_) {
    edge_labeled_ = true;
    edge_labels_.assign(adjacency_.size(), {});
    for (std::size_t x = 0; x < adjacency_.size(); ++x) edge_labels_[x].assign(adjacency_[x].size(), 0);
  }
  const Label el = edge_label.value_or(0);
  auto insert = [&](NodeId a, NodeId b) {
    auto& adj = adjacency_[a];
    auto pos = std::lower_bound(adj.begin(), adj.end(), b);
    const auto offset = pos - adj.begin();
    adj.insert(pos, b);
    if (edge_labeled_) edge_labels_[a].insert(edge_labels_[a].begin() + offset, el);
  };
  insert(u, v);
  insert(v, u);
  ++edge_count_;
  return true;
}

bool LabeledGraph::remove_edge(NodeId u, NodeId v) {
  check(u);
  check(v);
  auto erase = [&](NodeId a, NodeId b) {
    auto& adj = adjacency_[a];
    auto pos = std::lower_bound(adj.begin(), adj.end(), b);
    if (pos == adj.end() || *pos != b) return false;
    const auto offset = pos - adj.begin();
    adj.erase(pos);
    if (edge_labeled_) edge_labels_[a].erase(edge_labels_[a].begin() + offset);
    return true;
  };
  if (!erase(u, v)) return false;
  erase(v, u);
  --edge_count_;
  return true;
}

bool LabeledGraph::has_edge(NodeId u, NodeId v) const {
  const auto& au = adjacency_[check(u)];
  check(v);
  return std::binary_search(au.begin(), au.end(), v);
}

std::optional<Label> LabeledGraph::edge_label(NodeId u, NodeId v) const {
  if (!edge_labeled_) return std::nullopt;
  const auto& au = adjacency_[check(u)];
  auto pos = std::lower_bound(au.begin(), au.end(), v);
  if (pos == au.end() || *pos != v) return std::nullopt;
  return edge_labels_[u][static_cast<std::size_t>(pos - au.begin())];
}

std::span<const Label> LabeledGraph::neighbor_edge_labels(NodeId u) const {
  check(u);
  if (!edge_labeled_) return {};
  return edge_labels_[u];
}

std::vector<Edge> LabeledGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (std::size_t i = 0; i < adjacency_[u].size(); ++i) {
      const NodeId v = adjacency_[u][i];
      if (u < v) {
        Edge e{u, v, std::nullopt};
        if (edge_labeled_) e.label = edge_labels_[u][i];
        out.push_back(e);
      }
    }
  }
  return out;
}

void LabeledGraph::validate() const {
  std::size_t half_edges = 0;
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    const auto& au = adjacency_[u];
    if (labels_[u] >= label_alphabet_) {
      throw InvalidArgument("node " + std::to_string(u) + " label " + std::to_string(labels_[u]) +
                            " outside alphabet of size " + std::to_string(label_alphabet_));
    }
    for (std::size_t i = 0; i < au.size(); ++i) {
      const NodeId v = au[i];
      if (v >= adjacency_.size()) throw InvalidArgument("dangling neighbor id " + std::to_string(v));
      if (v == u) throw InvalidArgument("self-loop on node " + std::to_string(u));
      if (i > 0 && au[i - 1] >= v) throw InvalidArgument("adjacency of node " + std::to_string(u) + " unsorted or duplicated");
      if (!std::binary_search(adjacency_[v].begin(), adjacency_[v].end(), u)) {
        throw InvalidArgument("asymmetric edge " + std::to_string(u) + "-" + std::to_string(v));
      }
      if (edge_labeled_ && edge_label(u, v) != edge_label(v, u)) {
        throw InvalidArgument("edge label mismatch on " + std::to_string(u) + "-" + std::to_string(v));
      }
    }
    half_edges += au.size();
  }
  if (half_edges != 2 * edge_count_) throw InvalidArgument("edge count out of sync");
}

void AnchoredNeighborhood::validate() const {
  graph.validate();
  if (anchor >= graph.node_count()) throw InvalidArgument("anchor " + std::to_string(anchor) + " is not a node");
  const auto dist = bfs_distances(graph, anchor);
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] < 0) throw InvalidArgument("neighborhood is disconnected at node " + std::to_string(v));
    if (dist[v] > radius) throw InvalidArgument("node " + std::to_string(v) + " lies beyond radius " + std::to_string(radius));
  }
}

std::vector<int> bfs_distances(const LabeledGraph& g, NodeId u, int max_hops) {
  std::vector<int> dist(g.node_count(), -1);
  if (u >= g.node_count()) throw InvalidArgument("invalid node id " + std::to_string(u));
  std::deque<NodeId> queue{u};
  dist[u] = 0;
  while (!queue.empty()) {
    const NodeId x = queue.front();
    queue.pop_front();
    if (max_hops >= 0 && dist[x] >= max_hops) continue;
    for (NodeId y : g.neighbors(x)) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

bool is_connected(const LabeledGraph& g) {
  if (g.node_count() == 0) return true;
  const auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

LabeledGraph induced_subgraph(const LabeledGraph& g, std::span<const NodeId> nodes, std::vector<NodeId>* mapping) {
  std::unordered_map<NodeId, NodeId> inside;  // original -> placeholder
  inside.reserve(nodes.size() * 2);
  for (NodeId v : nodes) {
    if (v >= g.node_count()) throw InvalidArgument("invalid node id " + std::to_string(v));
    inside.emplace(v, 0);
  }
  std::vector<NodeId> order;
  order.reserve(inside.size());
  if (!nodes.empty()) {
    std::unordered_map<NodeId, bool> seen;
    std::deque<NodeId> queue{nodes[0]};
    seen[nodes[0]] = true;
    while (!queue.empty()) {
      const NodeId x = queue.front();
      queue.pop_front();
      order.push_back(x);
      for (NodeId y : g.neighbors(x)) {  // sorted: ties broken by original id
        if (inside.count(y) && !seen[y]) {
          seen[y] = true;
          queue.push_back(y);
        }
      }
    }
    if (order.size() < inside.size()) {
      std::vector<NodeId> rest;
      for (const auto& [v, _] : inside) {
        if (!seen[v]) rest.push_back(v);
      }
      std::sort(rest.begin(), rest.end());
      order.insert(order.end(), rest.begin(), rest.end());
    }
  }
  for (std::size_t i = 0; i < order.size(); ++i) inside[order[i]] = static_cast<NodeId>(i);

  LabeledGraph sub(order.size(), g.label_alphabet());
  for (std::size_t i = 0; i < order.size(); ++i) sub.set_label(static_cast<NodeId>(i), g.label(order[i]));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NodeId x = order[i];
    const auto nbrs = g.neighbors(x);
    const auto elabels = g.neighbor_edge_labels(x);
    for (std::size_t j = 0; j < nbrs.size(); ++j) {
      auto it = inside.find(nbrs[j]);
      if (it == inside.end() || it->second <= i) continue;
      std::optional<Label> el;
      if (g.has_edge_labels()) el = elabels[j];
      sub.add_edge(static_cast<NodeId>(i), it->second, el);
    }
  }
  if (mapping) *mapping = std::move(order);
  return sub;
}

AnchoredNeighborhood k_hop_neighborhood(const LabeledGraph& g, NodeId u, int k, std::uint64_t graph_id) {
  if (u >= g.node_count()) throw InvalidArgument("invalid node id " + std::to_string(u));
  if (k < 0) throw InvalidArgument("hop count must be >= 0");
  const auto dist = bfs_distances(g, u, k);
  std::vector<NodeId> nodes{u};
  for (NodeId v = 0; v < dist.size(); ++v) {
    if (v != u && dist[v] >= 0) nodes.push_back(v);
  }
  AnchoredNeighborhood n;
  n.graph = induced_subgraph(g, nodes);
  n.anchor = 0;
  n.radius = k;
  n.origin = NeighborhoodOrigin{graph_id, u};
  return n;
}

AnchoredNeighborhood neighborhood_from_nodes(const LabeledGraph& g, NodeId anchor, std::span<const NodeId> nodes,
                                             std::uint64_t graph_id) {
  std::vector<NodeId> ordered{anchor};
  for (NodeId v : nodes) {
    if (v != anchor) ordered.push_back(v);
  }
  AnchoredNeighborhood n;
  n.graph = induced_subgraph(g, ordered);
  n.anchor = 0;
  const auto dist = bfs_distances(n.graph, 0);
  n.radius = dist.empty() ? 0 : *std::max_element(dist.begin(), dist.end());
  n.origin = NeighborhoodOrigin{graph_id, anchor};
  return n;
}

StructuralFeatures structural_features(const LabeledGraph& g, NodeId u) {
  const auto nbrs = g.neighbors(u);
  StructuralFeatures f;
  f.degree = nbrs.size();
  if (f.degree < 2) return f;
  std::size_t links = 0;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
      if (g.has_edge(nbrs[i], nbrs[j])) ++links;
    }
  }
  f.clustering = 2.0 * static_cast<double>(links) / (static_cast<double>(f.degree) * static_cast<double>(f.degree - 1));
  return f;
}

LabeledGraph permute(const LabeledGraph& g, std::span<const NodeId> perm) {
  if (perm.size() != g.node_count()) throw InvalidArgument("permutation size mismatch");
  LabeledGraph out(g.node_count(), g.label_alphabet());
  for (NodeId u = 0; u < g.node_count(); ++u) out.set_label(perm[u], g.label(u));
  for (const Edge& e : g.edges()) out.add_edge(perm[e.u], perm[e.v], e.label);
  return out;
}

std::uint64_t fingerprint(const LabeledGraph& g) {
  Fingerprint fp;
  fp.update_value(static_cast<std::uint64_t>(g.node_count()));
  fp.update_value(static_cast<std::uint64_t>(g.label_alphabet()));
  for (Label l : g.labels()) fp.update_value(l);
  for (const Edge& e : g.edges()) {
    fp.update_value(e.u);
    fp.update_value(e.v);
    fp.update_value(e.label.value_or(0xffffffffu));
  }
  return fp.digest();
}

}  // namespace om
