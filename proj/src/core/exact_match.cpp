#include "ordermatch/exact_match.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <vector>

#include "ordermatch/error.hpp"

namespace om {

std::string_view to_string(MatchResult r) noexcept {
  switch (r) {
    case MatchResult::kFalse: return "false";
    case MatchResult::kTrue: return "true";
    case MatchResult::kTimeout: return "timeout";
  }
  return "?";
}

MatchBudget MatchBudget::unlimited() {
  return MatchBudget{std::numeric_limits<std::uint64_t>::max(), std::chrono::milliseconds::max()};
}

void MatchBudget::validate() const {
  if (max_states == 0) throw InvalidArgument("match budget max_states must be positive");
  if (wall_timeout.count() <= 0) throw InvalidArgument("match budget wall_timeout must be positive");
}

namespace {

constexpr std::size_t kDenseLimit = 4096;

// Adjacency test against the target, dense bit matrix for small graphs.
class TargetAdjacency {
 public:
  explicit TargetAdjacency(const LabeledGraph& t) : t_(t), n_(t.node_count()) {
    if (n_ <= kDenseLimit) {
      words_ = (n_ + 63) / 64;
      bits_.assign(n_ * words_, 0);
      for (NodeId u = 0; u < n_; ++u) {
        for (NodeId v : t.neighbors(u)) bits_[u * words_ + v / 64] |= (1ULL << (v % 64));
      }
    }
  }
  bool has(NodeId u, NodeId v) const {
    if (!bits_.empty()) return (bits_[u * words_ + v / 64] >> (v % 64)) & 1ULL;
    return t_.has_edge(u, v);
  }

 private:
  const LabeledGraph& t_;
  std::size_t n_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct BackEdge {
  std::size_t position;  // index into the match order
  std::optional<Label> label;
};

class Search {
 public:
  Search(const LabeledGraph& q, const LabeledGraph& t, const MatchBudget& budget, bool count_all)
      : q_(q), t_(t), adj_(t), budget_(budget), count_all_(count_all),
        compare_edge_labels_(q.has_edge_labels() && t.has_edge_labels()),
        start_(std::chrono::steady_clock::now()) {
    budget.validate();
  }

  // root_candidates empty means every target node may host the root.
  MatchCount run(NodeId root, const std::vector<NodeId>& root_candidates) {
    MatchCount out;
    if (q_.node_count() == 0) {
      out.count = 1;
      return out;
    }
    if (!feasible()) return out;
    build_order(root);
    image_.assign(order_.size(), 0);
    used_.assign(t_.node_count(), 0);

    auto try_root = [&](NodeId u) {
      if (!compatible(0, u) || !push(0, u)) return;
      extend(1);
      pop(0, u);
    };
    if (root_candidates.empty()) {
      for (NodeId u = 0; u < t_.node_count() && !done_; ++u) try_root(u);
    } else {
      for (NodeId u : root_candidates) {
        if (done_) break;
        try_root(u);
      }
    }
    out.count = found_;
    out.timed_out = timed_out_;
    return out;
  }

 private:
  bool feasible() const {
    if (q_.node_count() > t_.node_count() || q_.edge_count() > t_.edge_count()) return false;
    const std::size_t alphabet = std::max(q_.label_alphabet(), t_.label_alphabet());
    std::vector<std::int64_t> counts(alphabet, 0);
    for (Label l : t_.labels()) ++counts[l];
    for (Label l : q_.labels()) {
      if (--counts[l] < 0) return false;
    }
    return true;
  }

  // BFS from root, enqueueing neighbors by decreasing degree; other
  // components follow, each rooted at its highest-degree node.
  void build_order(NodeId root) {
    const std::size_t n = q_.node_count();
    std::vector<std::int64_t> position(n, -1);
    order_.clear();
    parent_.clear();
    back_.clear();
    std::vector<NodeId> scratch;
    auto bfs = [&](NodeId start) {
      std::deque<NodeId> queue{start};
      position[start] = static_cast<std::int64_t>(order_.size());
      order_.push_back(start);
      while (!queue.empty()) {
        const NodeId x = queue.front();
        queue.pop_front();
        scratch.assign(q_.neighbors(x).begin(), q_.neighbors(x).end());
        std::stable_sort(scratch.begin(), scratch.end(),
                         [&](NodeId a, NodeId b) { return q_.degree(a) > q_.degree(b); });
        for (NodeId y : scratch) {
          if (position[y] >= 0) continue;
          position[y] = static_cast<std::int64_t>(order_.size());
          order_.push_back(y);
          queue.push_back(y);
        }
      }
    };
    bfs(root);
    while (order_.size() < n) {
      NodeId best = 0;
      std::size_t best_degree = 0;
      bool any = false;
      for (NodeId v = 0; v < n; ++v) {
        if (position[v] < 0 && (!any || q_.degree(v) > best_degree)) {
          best = v;
          best_degree = q_.degree(v);
          any = true;
        }
      }
      bfs(best);
    }
    parent_.assign(n, -1);
    back_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      const NodeId x = order_[i];
      const auto nbrs = q_.neighbors(x);
      for (NodeId y : nbrs) {
        const auto py = static_cast<std::size_t>(position[y]);
        if (py < i) {
          back_[i].push_back({py, compare_edge_labels_ ? q_.edge_label(x, y) : std::nullopt});
          if (parent_[i] < 0) parent_[i] = static_cast<std::int64_t>(py);
        }
      }
    }
  }

  bool compatible(std::size_t i, NodeId u) const {
    const NodeId x = order_[i];
    if (used_[u] || q_.label(x) != t_.label(u) || q_.degree(x) > t_.degree(u)) return false;
    for (const BackEdge& b : back_[i]) {
      const NodeId w = image_[b.position];
      if (!adj_.has(u, w)) return false;
      if (compare_edge_labels_ && t_.edge_label(u, w) != b.label) return false;
    }
    return true;
  }

  bool push(std::size_t i, NodeId u) {
    if (++states_ > budget_.max_states) {
      timed_out_ = done_ = true;
      return false;
    }
    if ((states_ & 0xfff) == 0 && elapsed() > budget_.wall_timeout) {
      timed_out_ = done_ = true;
      return false;
    }
    image_[i] = u;
    used_[u] = 1;
    return true;
  }

  void pop(std::size_t, NodeId u) { used_[u] = 0; }

  std::chrono::milliseconds elapsed() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
  }

  void extend(std::size_t i) {
    if (done_) return;
    if (i == order_.size()) {
      ++found_;
      if (!count_all_) done_ = true;
      return;
    }
    auto visit = [&](NodeId u) {
      if (!compatible(i, u)) return;
      if (!push(i, u)) return;
      extend(i + 1);
      pop(i, u);
    };
    if (parent_[i] >= 0) {
      for (NodeId u : t_.neighbors(image_[static_cast<std::size_t>(parent_[i])])) {
        if (done_) return;
        visit(u);
      }
    } else {
      for (NodeId u = 0; u < t_.node_count(); ++u) {
        if (done_) return;
        visit(u);
      }
    }
  }

  const LabeledGraph& q_;
  const LabeledGraph& t_;
  TargetAdjacency adj_;
  MatchBudget budget_;
  bool count_all_;
  bool compare_edge_labels_;
  std::chrono::steady_clock::time_point start_;

  std::vector<NodeId> order_;
  std::vector<std::int64_t> parent_;
  std::vector<std::vector<BackEdge>> back_;
  std::vector<NodeId> image_;
  std::vector<char> used_;
  std::uint64_t states_ = 0;
  std::uint64_t found_ = 0;
  bool timed_out_ = false;
  bool done_ = false;
};

MatchResult to_result(const MatchCount& c) {
  if (c.count > 0) return MatchResult::kTrue;
  return c.timed_out ? MatchResult::kTimeout : MatchResult::kFalse;
}

}  // namespace

MatchResult is_subgraph_anchored(const LabeledGraph& query, NodeId query_anchor, const LabeledGraph& target,
                                 NodeId target_anchor, const MatchBudget& budget) {
  if (query_anchor >= query.node_count()) throw InvalidArgument("query anchor is not a node");
  if (target_anchor >= target.node_count()) throw InvalidArgument("target anchor is not a node");
  Search search(query, target, budget, false);
  return to_result(search.run(query_anchor, {target_anchor}));
}

MatchResult is_subgraph_anchored(const AnchoredNeighborhood& query, const AnchoredNeighborhood& target,
                                 const MatchBudget& budget) {
  return is_subgraph_anchored(query.graph, query.anchor, target.graph, target.anchor, budget);
}

MatchResult is_subgraph(const LabeledGraph& query, const LabeledGraph& target, const MatchBudget& budget) {
  if (!is_connected(query)) throw InvalidArgument("query graph must be connected");
  if (query.node_count() == 0) return MatchResult::kTrue;
  NodeId root = 0;
  for (NodeId v = 1; v < query.node_count(); ++v) {
    if (query.degree(v) > query.degree(root)) root = v;
  }
  Search search(query, target, budget, false);
  return to_result(search.run(root, {}));
}

MatchCount count_anchored_matches(const AnchoredNeighborhood& query, const AnchoredNeighborhood& target,
                                  const MatchBudget& budget) {
  if (query.anchor >= query.graph.node_count()) throw InvalidArgument("query anchor is not a node");
  if (target.anchor >= target.graph.node_count()) throw InvalidArgument("target anchor is not a node");
  Search search(query.graph, target.graph, budget, true);
  return search.run(query.anchor, {target.anchor});
}

}  // namespace om
