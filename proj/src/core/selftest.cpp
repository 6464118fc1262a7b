#include "ordermatch/selftest.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <numeric>
#include <set>

#include "ordermatch/autodiff.hpp"
#include "ordermatch/encoder.hpp"
#include "ordermatch/exact_match.hpp"
#include "ordermatch/order_embed.hpp"
#include "ordermatch/util.hpp"

namespace om {

namespace {

// One representative per isomorphism class of graphs on n nodes. The class key
// is the smallest edge mask over all relabellings.
std::vector<LabeledGraph> all_graphs(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> slots;
  std::vector<std::vector<std::size_t>> slot_of(n, std::vector<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      slot_of[i][j] = slot_of[j][i] = slots.size();
      slots.emplace_back(i, j);
    }
  }
  std::vector<std::vector<NodeId>> perms;
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));

  std::set<std::uint64_t> seen;
  std::vector<LabeledGraph> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << slots.size()); ++mask) {
    std::uint64_t key = mask;
    for (const auto& perm : perms) {
      std::uint64_t m = 0;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (mask >> s & 1) m |= std::uint64_t{1} << slot_of[perm[slots[s].first]][perm[slots[s].second]];
      }
      key = std::min(key, m);
    }
    if (!seen.insert(key).second) continue;
    LabeledGraph g(n);
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (mask >> s & 1) g.add_edge(slots[s].first, slots[s].second);
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Tries every injective map of query nodes into target nodes.
bool brute_force_subgraph(const LabeledGraph& q, const LabeledGraph& t) {
  const std::size_t k = q.node_count(), n = t.node_count();
  if (k > n) return false;
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  const auto edges = q.edges();
  // ordered k-subsets: reversing the unused tail makes next_permutation skip
  // every rearrangement of it
  do {
    bool ok = true;
    for (const auto& e : edges) {
      if (!t.has_edge(pool[e.u], pool[e.v])) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
    std::reverse(pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end());
  } while (std::next_permutation(pool.begin(), pool.end()));
  return false;
}

std::vector<double> grid_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = static_cast<double>(rng() % 3);
  return v;
}

}  // namespace

OracleAgreement check_oracle(std::size_t max_query, std::size_t max_target) {
  std::vector<LabeledGraph> queries, targets;
  for (std::size_t n = 1; n <= max_query; ++n) {
    for (auto& g : all_graphs(n)) {
      if (is_connected(g)) queries.push_back(std::move(g));
    }
  }
  for (std::size_t n = 1; n <= max_target; ++n) {
    for (auto& g : all_graphs(n)) targets.push_back(std::move(g));
  }
  OracleAgreement out;
  for (const auto& q : queries) {
    for (const auto& t : targets) {
      const auto fast = is_subgraph(q, t, MatchBudget::unlimited());
      const bool slow = brute_force_subgraph(q, t);
      ++out.pairs;
      if (fast == MatchResult::kTimeout || (fast == MatchResult::kTrue) != slow) ++out.disagreements;
    }
  }
  return out;
}

GeometryViolations check_geometry(std::size_t triples, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  GeometryViolations out;
  for (std::size_t i = 0; i < triples; ++i) {
    const auto a = grid_vector(rng, 3), b = grid_vector(rng, 3), c = grid_vector(rng, 3);
    if (violation(a, b) == 0.0 && violation(b, c) == 0.0 && violation(a, c) != 0.0) ++out.transitivity;
    if (violation(a, b) == 0.0 && violation(b, a) == 0.0 && a != b) ++out.antisymmetry;
    const auto m = intersection(a, b);
    const bool lower = violation(m, a) == 0.0 && violation(m, b) == 0.0;
    const bool greatest = !(violation(c, a) == 0.0 && violation(c, b) == 0.0) || violation(c, m) == 0.0;
    if (!lower || !greatest) ++out.intersection;
  }
  return out;
}

GradientAgreement check_gradients(std::size_t batches, std::uint64_t seed) {
  EncoderConfig cfg;
  cfg.layers = 2;
  cfg.hidden_dim = 4;
  cfg.output_dim = 3;
  cfg.label_alphabet_size = 2;
  const MarginConfig margin{1.0, 0.5};
  GradientAgreement out;
  for (std::uint64_t draw = 0; out.batches < batches && draw < 50 * batches; ++draw) {
    Rng rng = make_rng(derive_seed(seed, draw));
    EncoderParams params = EncoderParams::init(cfg, rng);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    for (auto& t : params.tensors) {
      for (double& v : t.values()) v += jitter(rng);
    }
    std::vector<AnchoredNeighborhood> hoods;
    std::unique_ptr<bool[]> labels(new bool[4]);
    for (int i = 0; i < 8; ++i) {
      LabeledGraph g(3 + rng() % 3, 2);
      for (NodeId v = 0; v < g.node_count(); ++v) g.set_label(v, static_cast<Label>(rng() % 2));
      for (NodeId v = 1; v < g.node_count(); ++v) g.add_edge(static_cast<NodeId>(rng() % v), v);
      hoods.push_back(k_hop_neighborhood(g, 0, 2));
    }
    for (int i = 0; i < 4; ++i) labels[i] = rng() % 2 == 0;
    std::vector<const AnchoredNeighborhood*> qs, us;
    for (int i = 0; i < 4; ++i) {
      qs.push_back(&hoods[2 * i]);
      us.push_back(&hoods[2 * i + 1]);
    }
    const LossFunction f = [&](Tape& tape, std::span<const Var> p) {
      const Var zq = encode_batch(tape, p, qs, cfg);
      const Var zu = encode_batch(tape, p, us, cfg);
      return margin_loss(tape, zq, zu, std::span<const bool>(labels.get(), 4), margin);
    };
    std::vector<Tensor*> ptrs;
    for (auto& t : params.tensors) ptrs.push_back(&t);
    const auto report = grad_check(f, ptrs, 1e-5, 1e-4);
    if (report.min_kink_distance < 1e-3) {
      ++out.resampled;
      continue;
    }
    out.max_relative_error = std::max(out.max_relative_error, report.max_relative_error);
    ++out.batches;
  }
  return out;
}

std::vector<SelftestCheck> run_selftest(std::uint64_t seed) {
  std::vector<SelftestCheck> out;
  char buf[160];

  const auto oracle = check_oracle(5, 6);
  std::snprintf(buf, sizeof buf, "%zu pairs, %zu disagreements", oracle.pairs, oracle.disagreements);
  out.push_back({"exact matcher vs exhaustive search", oracle.disagreements == 0, buf});

  const auto geo = check_geometry(10'000, seed);
  std::snprintf(buf, sizeof buf, "transitivity %zu, antisymmetry %zu, intersection %zu", geo.transitivity,
                geo.antisymmetry, geo.intersection);
  out.push_back({"order-embedding axioms", geo.transitivity + geo.antisymmetry + geo.intersection == 0, buf});

  const auto grad = check_gradients(5, seed);
  std::snprintf(buf, sizeof buf, "%zu batches, max relative error %.3g", grad.batches, grad.max_relative_error);
  out.push_back({"encoder gradients vs finite differences", grad.batches == 5 && grad.max_relative_error < 1e-4, buf});
  return out;
}

}  // namespace om
