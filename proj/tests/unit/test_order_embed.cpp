#include <random>

#include "doctest.h"
#include "ordermatch/error.hpp"
#include "ordermatch/order_embed.hpp"

using namespace om;

namespace {

// Coordinates from a small integer grid make dominance (E = 0) common enough
// for the implications below to be exercised, not just vacuously true.
Embedding grid_vector(std::mt19937_64& rng, std::size_t dim = 3) {
  Embedding v(dim);
  for (double& x : v) x = static_cast<double>(rng() % 4);
  return v;
}

Embedding real_vector(std::mt19937_64& rng, std::size_t dim = 8) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Embedding v(dim);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("violation examples") {
  const Embedding z = {0.3, 1.7, 0.0};
  CHECK(violation(z, z) == 0.0);
  CHECK(violation(Embedding{1, 2}, Embedding{2, 3}) == 0.0);
  CHECK(violation(Embedding{3, 1}, Embedding{2, 3}) == 1.0);
  CHECK_THROWS_AS(violation(Embedding{1}, Embedding{1, 2}), InvalidArgument);
}

TEST_CASE("margin_loss examples") {
  MarginConfig cfg;
  cfg.margin = 1.0;
  const Embedding a = {1, 0}, b = {0.5, 1}, big = {5, 5}, zero = {0, 0};
  const EmbeddingPair satisfied_pos[] = {{zero, a, true}};
  CHECK(margin_loss(satisfied_pos, cfg) == 0.0);
  const EmbeddingPair satisfied_neg[] = {{big, zero, false}};
  CHECK(margin_loss(satisfied_neg, cfg) == 0.0);
  const EmbeddingPair neg[] = {{a, b, false}};
  CHECK(violation(a, b) == 0.25);
  CHECK(margin_loss(neg, cfg) == 0.75);
  CHECK_THROWS_AS(margin_loss(std::span<const EmbeddingPair>{}, cfg), InvalidArgument);
}

TEST_CASE("predict_subgraph examples") {
  MarginConfig cfg;
  cfg.threshold = 0.1;
  CHECK(predict_subgraph(Embedding{1, 2}, Embedding{2, 3}, cfg));
  CHECK_FALSE(predict_subgraph(Embedding{3, 1}, Embedding{2, 3}, cfg));
  cfg.threshold = 0.25;
  CHECK_FALSE(predict_subgraph(Embedding{1, 0}, Embedding{0.5, 1}, cfg));  // E == t exactly
  MarginConfig tiny;
  tiny.threshold = 1e-12;
  CHECK(predict_subgraph(Embedding{0, 0}, Embedding{0, 0}, tiny));
}

TEST_CASE("margin config validation") {
  MarginConfig cfg;
  cfg.threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = MarginConfig{};
  cfg.margin = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_NOTHROW(MarginConfig{}.validate());
}

TEST_CASE("intersection examples") {
  const Embedding z = {0.5, 2.0};
  CHECK(intersection(z, z) == z);
  CHECK(intersection(Embedding{1, 3}, Embedding{2, 2}) == Embedding{1, 2});
  CHECK_THROWS_AS(intersection(Embedding{-1}, Embedding{1}), InvalidArgument);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = real_vector(rng), b = real_vector(rng);
    const auto m = intersection(a, b);
    CHECK(violation(m, a) == 0.0);
    CHECK(violation(m, b) == 0.0);
  }
}

TEST_CASE("order axioms on 10^4 triples") {
  std::mt19937_64 rng(42);
  int transitive_cases = 0, antisymmetric_cases = 0, glb_cases = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const auto a = grid_vector(rng), b = grid_vector(rng), c = grid_vector(rng);
    if (violation(a, b) == 0.0 && violation(b, c) == 0.0) {
      ++transitive_cases;
      CHECK(violation(a, c) == 0.0);
    }
    if (violation(a, b) == 0.0 && violation(b, a) == 0.0) {
      ++antisymmetric_cases;
      CHECK(a == b);
    }
    if (violation(c, a) == 0.0 && violation(c, b) == 0.0) {
      ++glb_cases;
      CHECK(violation(c, intersection(a, b)) == 0.0);
    }
  }
  CHECK(transitive_cases > 100);
  CHECK(antisymmetric_cases > 50);
  CHECK(glb_cases > 100);
}

TEST_CASE("margin_loss is nonnegative and zero exactly when every pair is satisfied") {
  std::mt19937_64 rng(8);
  MarginConfig cfg;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Embedding> store;
    std::vector<EmbeddingPair> batch;
    const int n = 1 + static_cast<int>(rng() % 4);
    store.reserve(2 * n);
    bool all_satisfied = true;
    for (int i = 0; i < n; ++i) {
      store.push_back(grid_vector(rng));
      store.push_back(grid_vector(rng));
      const bool pos = rng() % 2;
      batch.push_back({store[store.size() - 2], store.back(), pos});
      const double e = violation(batch.back().zq, batch.back().zu);
      all_satisfied &= pos ? e == 0.0 : e >= cfg.margin;
    }
    const double loss = margin_loss(batch, cfg);
    CHECK(loss >= 0.0);
    CHECK((loss == 0.0) == all_satisfied);
  }
}

TEST_CASE("tape loss matches the numeric loss and has zero gradient on satisfied pairs") {
  MarginConfig cfg;
  // rows: satisfied positive, satisfied negative (E = 4 >= 1), violated positive, violated negative
  Tensor q(4, 2, {0, 1, 3, 3, 2, 0, 1, 0});
  Tensor u(4, 2, {1, 1, 1, 3, 1, 1, 0.5, 1});
  const bool labels[] = {true, false, true, false};
  Tape tape;
  const Var vq = tape.parameter(q), vu = tape.parameter(u);
  const Var loss = margin_loss(tape, vq, vu, labels, cfg);
  std::vector<EmbeddingPair> batch;
  for (std::size_t r = 0; r < 4; ++r) batch.push_back({q.row(r), u.row(r), labels[r]});
  CHECK(tape.value(loss).item() == margin_loss(batch, cfg));
  CHECK(tape.value(loss).item() == 1.0 + 0.75);
  tape.backward(loss);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(tape.grad(vq)(0, c) == 0.0);
    CHECK(tape.grad(vq)(1, c) == 0.0);
    CHECK(tape.grad(vu)(0, c) == 0.0);
    CHECK(tape.grad(vu)(1, c) == 0.0);
  }
  CHECK(tape.grad(vq)(2, 0) == 2.0);
  CHECK(tape.grad(vq)(3, 0) == -1.0);
}

TEST_CASE("threshold calibration picks a separating threshold") {
  const double v[] = {0.0, 0.05, 0.1, 0.6, 0.9, 2.0};
  const bool pos[] = {true, true, true, false, false, false};
  const auto choice = calibrate_threshold(v, pos, 1.0);
  CHECK(choice.balanced_accuracy == 1.0);
  CHECK(choice.threshold > 0.1);
  CHECK(choice.threshold <= 0.6);
  const bool one_class[] = {true, true, true, true, true, true};
  CHECK_THROWS_AS(calibrate_threshold(v, one_class, 1.0), InvalidArgument);
}
