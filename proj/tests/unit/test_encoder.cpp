#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "ordermatch/encoder.hpp"
#include "ordermatch/error.hpp"
#include "ordermatch/model.hpp"
#include "ordermatch/sampling.hpp"
#include "test_support.hpp"

using namespace om;
using namespace om::testing;

namespace {

EncoderConfig small_config(std::size_t layers = 3, std::size_t alphabet = 1) {
  EncoderConfig cfg;
  cfg.layers = layers;
  cfg.hidden_dim = 8;
  cfg.output_dim = 6;
  cfg.label_alphabet_size = alphabet;
  return cfg;
}

AnchoredNeighborhood hood(LabeledGraph g, NodeId anchor) {
  AnchoredNeighborhood n;
  n.graph = std::move(g);
  n.anchor = anchor;
  n.radius = static_cast<int>(n.graph.node_count());
  return n;
}

std::vector<NodeId> random_perm(std::size_t n, std::mt19937_64& rng) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("input features") {
  LabeledGraph g(2, 2);
  g.set_label(1, 1);
  g.add_edge(0, 1);
  const auto x = build_input_features(hood(g, 0), small_config(3, 2));
  CHECK(x == Tensor(2, 3, {1, 1, 0, 0, 0, 1}));

  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto n = hood(random_connected_graph(7, 0.3, rng, 3), static_cast<NodeId>(rng() % 7));
    const auto f = build_input_features(n, small_config(3, 3));
    double anchor_sum = 0;
    for (std::size_t r = 0; r < f.rows(); ++r) anchor_sum += f(r, 0);
    CHECK(anchor_sum == 1.0);

    // permuting node order permutes the rows
    const auto p = random_perm(7, rng);
    auto moved = n;
    moved.graph = permute(n.graph, p);
    moved.anchor = p[n.anchor];
    const auto fp = build_input_features(moved, small_config(3, 3));
    for (NodeId v = 0; v < 7; ++v) {
      for (std::size_t c = 0; c < f.cols(); ++c) CHECK(fp(p[v], c) == f(v, c));
    }
  }

  LabeledGraph bad(1, 4);
  bad.set_label(0, 3);
  CHECK_THROWS_WITH_AS(build_input_features(hood(bad, 0), small_config(3, 2)),
                       "node label 3 is outside the model's label alphabet of size 2", InvalidArgument);
}

TEST_CASE("structural features extend each row") {
  auto cfg = small_config();
  cfg.use_structural_features = true;
  const auto x = build_input_features(hood(complete_graph(3), 0), cfg);
  CHECK(x.cols() == 4);
  CHECK(x(1, 2) == 2.0);
  CHECK(x(1, 3) == 1.0);
}

TEST_CASE("config validation and parameter manifest") {
  EncoderConfig cfg;
  cfg.layers = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EncoderConfig{};
  cfg.leaky_slope = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EncoderConfig{};
  cfg.nonneg_output = false;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EncoderConfig{};
  cfg.aggregation_scale = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  const auto m = parameter_manifest(small_config(2));
  CHECK(m.size() == 2 + 2 * 4 + 4);
  CHECK(m.front().name == "input.weight");
  CHECK(m[6].rows == 16);  // layer 2 consumes the concatenation of two layer outputs
  Rng rng(3);
  const auto params = EncoderParams::init(small_config(2), rng);
  CHECK(params.tensors.back() == Tensor(1, 6, 0.1));
  CHECK_NOTHROW(params.check(small_config(2)));
  CHECK_THROWS_AS(params.check(small_config(3)), InvalidArgument);
}

TEST_CASE("embeddings are D-dimensional and nonnegative") {
  std::mt19937_64 gen(5);
  Rng rng(6);
  const auto cfg = small_config(3, 2);
  const auto params = EncoderParams::init(cfg, rng);
  for (int i = 0; i < 50; ++i) {
    const auto n = k_hop_neighborhood(random_connected_graph(10, 0.25, gen, 2), static_cast<NodeId>(gen() % 10), 2);
    const auto z = encode(n, params, cfg);
    CHECK(z.size() == 6);
    CHECK(*std::min_element(z.begin(), z.end()) >= 0.0);
  }
}

TEST_CASE("anchor-preserving isomorphisms give bit-identical embeddings") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 30; ++trial) {
    Rng rng(trial);
    const auto cfg = small_config(4, 3);
    const auto params = EncoderParams::init(cfg, rng);
    const auto g = random_connected_graph(9, 0.3, gen, 3);
    const auto n = hood(g, static_cast<NodeId>(gen() % 9));
    const auto p = random_perm(9, gen);
    const auto moved = hood(permute(g, p), p[n.anchor]);
    CHECK(encode(n, params, cfg) == encode(moved, params, cfg));
  }
}

TEST_CASE("batched encoding equals single encodes") {
  std::mt19937_64 gen(9);
  Rng rng(10);
  const auto cfg = small_config(3, 2);
  const auto params = EncoderParams::init(cfg, rng);
  std::vector<AnchoredNeighborhood> hoods;
  for (int i = 0; i < 12; ++i) hoods.push_back(hood(random_connected_graph(3 + gen() % 6, 0.4, gen, 2), 0));
  std::vector<const AnchoredNeighborhood*> ptrs;
  for (const auto& h : hoods) ptrs.push_back(&h);
  const Tensor z = encode_batch(params, ptrs, cfg);
  for (std::size_t i = 0; i < hoods.size(); ++i) {
    const auto single = encode(hoods[i], params, cfg);
    CHECK(std::equal(single.begin(), single.end(), z.row(i).begin()));
  }
}

TEST_CASE("the anchor flag separates anchored 3-cycles from 4-cycles") {
  const auto tri = hood(cycle_graph(3), 0);
  const auto sq = hood(cycle_graph(4), 0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto cfg = small_config(3);
    const auto params = EncoderParams::init(cfg, rng);
    CHECK(encode(tri, params, cfg) != encode(sq, params, cfg));
  }
}

TEST_CASE("moving the anchor to a non-symmetric node changes the embedding") {
  // path 0-1-2-3 with a pendant 4 on node 1: nodes 0 and 2 are not automorphic
  auto g = path_graph(4);
  g.add_node();
  g.add_edge(1, 4);
  Rng rng(4);
  const auto cfg = small_config(3);
  const auto params = EncoderParams::init(cfg, rng);
  const auto z0 = encode(hood(g, 0), params, cfg);
  CHECK(z0 != encode(hood(g, 2), params, cfg));
  CHECK(z0 != encode(hood(g, 3), params, cfg));
  CHECK(z0 == encode(hood(g, 4), params, cfg));  // 0 and 4 are swapped by an automorphism
}

TEST_CASE("sum aggregation preserves dominance along a subgraph embedding") {
  // Q keeps a subset of T's edges on the same node ids, so the identity map is
  // an embedding of Q into T. Starting from nonnegative features with Q's
  // dominated by T's, every round of sum aggregation (with identity MLPs)
  // keeps Q's rows dominated.
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + gen() % 8;
    const auto t = random_graph(n, 0.4, gen);
    LabeledGraph q(n);
    for (const auto& e : t.edges()) {
      if (unit(gen) < 0.6) q.add_edge(e.u, e.v);
    }
    Tensor hq(n, 3), ht(n, 3);
    for (std::size_t i = 0; i < hq.size(); ++i) {
      ht[i] = unit(gen);
      hq[i] = ht[i] * unit(gen);
    }
    for (int round = 0; round < 4; ++round) {
      hq = gin_sum_aggregate(q, hq);
      ht = gin_sum_aggregate(t, ht);
      for (std::size_t i = 0; i < hq.size(); ++i) CHECK(hq[i] <= ht[i]);
    }
  }
}

TEST_CASE("encode_all matches individual encodes") {
  std::mt19937_64 gen(15);
  const auto g = random_graph(40, 0.1, gen, 2);
  Rng rng(16);
  const auto cfg = small_config(2, 2);
  const auto params = EncoderParams::init(cfg, rng);
  const Tensor all = encode_all(g, 2, params, cfg, 4);
  CHECK(all.rows() == 40);
  for (NodeId u = 0; u < 40; ++u) {
    const auto z = encode(k_hop_neighborhood(g, u, 2), params, cfg);
    CHECK(std::equal(z.begin(), z.end(), all.row(u).begin()));
  }
  CHECK(encode_all(g, 2, params, cfg, 1) == all);
}

TEST_CASE("encode_all time grows linearly with edge count at fixed mean degree") {
  Rng rng(17);
  EncoderConfig cfg = small_config(2);
  cfg.hidden_dim = 16;
  const auto params = EncoderParams::init(cfg, rng);
  std::vector<double> edges, seconds;
  std::mt19937_64 gen(18);
  for (std::size_t n : {100, 200, 400}) {
    const auto g = random_graph(n, 4.0 / static_cast<double>(n - 1), gen);
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      (void)encode_all(g, 2, params, cfg, 1);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    edges.push_back(static_cast<double>(g.edge_count()));
    seconds.push_back(best);
  }
  const auto fit = fit_line(edges, seconds);
  INFO("slope " << fit.slope << " r2 " << fit.r_squared);
  CHECK(fit.slope > 0.0);
  CHECK(fit.r_squared > 0.9);
}

TEST_CASE("model checkpoint round-trips exactly") {
  auto cfg = small_config(2, 3);
  cfg.edge_label_messages = true;
  cfg.edge_label_alphabet_size = 2;
  Model m = init_model(cfg, MarginConfig{}, 3, 99);
  m.decision_cutoff = 0.37;
  const auto path = (std::filesystem::temp_directory_path() / "om_model_roundtrip.json").string();
  save_model(m, path);
  const Model back = load_model(path);
  std::filesystem::remove(path);
  CHECK(back.encoder == m.encoder);
  CHECK(back.radius == 3);
  CHECK(back.decision_cutoff == 0.37);
  for (std::size_t i = 0; i < m.params.tensors.size(); ++i) CHECK(back.params.tensors[i] == m.params.tensors[i]);
  CHECK(back.fingerprint() == m.fingerprint());
  CHECK(init_model(cfg, MarginConfig{}, 3, 100).fingerprint() != m.fingerprint());

  // edge-labelled messages run and respond to edge labels
  LabeledGraph a(2, 3), b(2, 3);
  a.add_edge(0, 1, 0);
  b.add_edge(0, 1, 1);
  CHECK(encode(hood(a, 0), m.params, cfg) != encode(hood(b, 0), m.params, cfg));

  auto text = model_to_json(m);
  text.replace(text.find("\"radius\":3"), 10, "\"radius\":0");
  CHECK_THROWS_AS(model_from_json(text), ParseError);
  CHECK_THROWS_AS(model_from_json("{\"format\":\"other\"}"), ParseError);
  CHECK_THROWS_AS(model_from_json("not json"), ParseError);
}
