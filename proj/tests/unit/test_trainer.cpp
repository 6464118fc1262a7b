#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ordermatch/error.hpp"
#include "ordermatch/exact_match.hpp"
#include "ordermatch/trainer.hpp"

using namespace om;

namespace {

EncoderConfig tiny_encoder() {
  EncoderConfig cfg;
  cfg.layers = 2;
  cfg.hidden_dim = 8;
  cfg.output_dim = 8;
  return cfg;
}

SyntheticConfig tiny_graphs() {
  SyntheticConfig s;
  s.min_nodes = 6;
  s.max_nodes = 10;
  return s;
}

TrainConfig tiny_train() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.min_iterations = 2;
  cfg.validation_pairs = 32;
  cfg.curriculum.patience = 1;
  cfg.curriculum.max_radius = 2;
  cfg.curriculum.max_target_count = 4;
  cfg.pairs.target_max_nodes = 12;
  cfg.pairs.query.max_nodes = 6;
  cfg.seed = 11;
  cfg.workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters") {
    std::vector<Tensor> p{Tensor(2, 2, {1, 2, 3, 4})};
    const std::vector<Tensor> g{Tensor(2, 2, 0.0)};
    AdamState st;
    for (int i = 0; i < 5; ++i) adam_step(p, g, st, 0.1);
    CHECK(p[0] == Tensor(2, 2, {1, 2, 3, 4}));
  }
  SUBCASE("first step moves each coordinate by about lr") {
    std::vector<Tensor> p{Tensor(1, 3, {0, 0, 0})};
    const std::vector<Tensor> g{Tensor(1, 3, {5.0, -0.01, 200.0})};
    AdamState st;
    adam_step(p, g, st, 0.01);
    CHECK(p[0][0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(p[0][1] == doctest::Approx(0.01).epsilon(1e-5));
    CHECK(p[0][2] == doctest::Approx(-0.01).epsilon(1e-6));
  }
  SUBCASE("minimises x^2") {
    std::vector<Tensor> p{Tensor::scalar(3.0)};
    AdamState st;
    for (int i = 0; i < 500; ++i) {
      const std::vector<Tensor> g{Tensor::scalar(2.0 * p[0].item())};
      adam_step(p, g, st, 0.05);
    }
    CHECK(std::abs(p[0].item()) < 1e-2);
  }
  std::vector<Tensor> p{Tensor(1, 2)};
  const std::vector<Tensor> g{Tensor(1, 3)};
  AdamState st;
  CHECK_THROWS_AS(adam_step(p, g, st, 0.1), InvalidArgument);
}

TEST_CASE("cosine schedule with restarts") {
  CHECK(cosine_lr(0, 1e-3, 100) == 1e-3);
  CHECK(cosine_lr(50, 1e-3, 100) == doctest::Approx(5e-4));
  CHECK(cosine_lr(100, 1e-3, 100) == 1e-3);
  CHECK(cosine_lr(99, 1e-3, 100) < 1e-6);
  CHECK(cosine_lr(175, 1e-3, 100) == doctest::Approx(cosine_lr(75, 1e-3, 100)));
}

TEST_CASE("curriculum advances radius first, then target count") {
  CurriculumConfig cfg;
  CurriculumState s;
  s = curriculum_update(s, 50.0, cfg);
  for (int i = 0; i < 19; ++i) s = curriculum_update(s, 50.05, cfg);  // gains under 0.1 points are stale
  CHECK(s.radius == 1);
  s = curriculum_update(s, 50.0, cfg);
  CHECK(s.radius == 2);
  CHECK(s.target_count == 1);
  CHECK(s.epochs_since_improvement == 0);

  CurriculumState full{4, 64, 19, 80.0};
  full = curriculum_update(full, 80.0, cfg);
  CHECK(full.radius == 4);
  CHECK(full.target_count == 128);

  CurriculumState top{4, 256, 19, 80.0};
  const auto after = curriculum_update(top, 70.0, cfg);
  CHECK(after.radius == 4);
  CHECK(after.target_count == 256);

  CurriculumState improving;
  for (int i = 0; i < 100; ++i) improving = curriculum_update(improving, 50.0 + i, cfg);
  CHECK(improving.radius == 1);
}

TEST_CASE("batch composition") {
  TrainConfig cfg;
  CHECK(batch_size_for(CurriculumState{}, cfg) == 16);
  CHECK(batch_size_for(CurriculumState{4, 2, 0, 0}, cfg) == 32);
  CHECK(batch_size_for(CurriculumState{4, 256, 0, 0}, cfg) == 64);

  const auto mix = negative_mix(12, 5, cfg);
  CHECK(mix.hard + mix.same_target + mix.cross_target == 12);
  CHECK(mix.hard >= 1);
  CHECK(mix.hard <= 2);
  CHECK(mix.same_target == doctest::Approx(mix.cross_target).epsilon(0.25));
  const auto single = negative_mix(12, 1, cfg);
  CHECK(single.cross_target == 0);
  CHECK(single.same_target + single.hard == 12);

  const std::vector<LabeledGraph> graphs{gen_extended_barabasi(30, 2, 0.2, 0.2, 1, 3)};
  auto small = cfg;
  small.min_iterations = 3;
  const auto batches = build_epoch_batches(graphs, CurriculumState{2, 1, 0, 0}, small, 5);
  REQUIRE(batches.size() == 3);
  for (const auto& b : batches) {
    CHECK(b.size() == 16);
    CHECK(std::count_if(b.begin(), b.end(), [](const auto& p) { return p.positive; }) == 4);
    CHECK(std::none_of(b.begin(), b.end(), [](const auto& p) { return p.kind == PairKind::kCrossTargetNegative; }));
  }
}

TEST_CASE("every emitted label agrees with the exact oracle") {
  auto cfg = tiny_train();
  const auto graphs = gen_synthetic(tiny_graphs(), 4, 21);
  const auto batches = build_epoch_batches(graphs, CurriculumState{2, 4, 0, 0}, cfg, 8);
  std::size_t audited = 0, hard = 0, cross = 0;
  for (const auto& b : batches) {
    for (const auto& p : b) {
      const auto r = is_subgraph_anchored(p.query, p.target, MatchBudget::unlimited());
      CHECK(r == (p.positive ? MatchResult::kTrue : MatchResult::kFalse));
      hard += p.kind == PairKind::kHardNegative;
      cross += p.kind == PairKind::kCrossTargetNegative;
      ++audited;
    }
  }
  CHECK(audited >= 100);
  CHECK(hard > 0);
  CHECK(cross > 0);
}

TEST_CASE("batch sampling is deterministic and worker-count independent") {
  auto cfg = tiny_train();
  const auto graphs = gen_synthetic(tiny_graphs(), 3, 2);
  cfg.workers = 1;
  const auto a = build_epoch_batches(graphs, CurriculumState{}, cfg, 4);
  cfg.workers = 4;
  const auto b = build_epoch_batches(graphs, CurriculumState{}, cfg, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].size() == b[i].size());
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      CHECK(a[i][j].query.graph == b[i][j].query.graph);
      CHECK(a[i][j].target.graph == b[i][j].target.graph);
      CHECK(a[i][j].positive == b[i][j].positive);
    }
  }
}

TEST_CASE("loss decreases on a frozen batch") {
  auto cfg = tiny_train();
  const auto graphs = gen_synthetic(tiny_graphs(), 4, 31);
  cfg.min_iterations = 1;
  const auto batches = build_epoch_batches(graphs, CurriculumState{2, 1, 0, 0}, cfg, 9);
  REQUIRE(!batches.empty());
  Model model = init_model(tiny_encoder(), MarginConfig{}, 2, 5);
  AdamState adam;
  std::vector<Tensor> grads;
  double previous = batch_loss_and_grad(model, batches[0], grads, 1);
  int not_decreasing = 0;
  const double first = previous;
  for (int step = 0; step < 50; ++step) {
    adam_step(model.params.tensors, grads, adam, 1e-3);
    const double loss = batch_loss_and_grad(model, batches[0], grads, 1);
    not_decreasing += !(loss < previous);
    previous = loss;
  }
  INFO("first " << first << " last " << previous);
  CHECK(not_decreasing <= 5);
  CHECK(previous < first);

  std::vector<Tensor> g4;
  CHECK(batch_loss_and_grad(model, batches[0], g4, 4) == batch_loss_and_grad(model, batches[0], grads, 1));
  for (std::size_t i = 0; i < grads.size(); ++i) CHECK(g4[i] == grads[i]);
}

TEST_CASE("training runs, is deterministic and keeps the best checkpoint") {
  const auto cfg = tiny_train();
  const auto validation = gen_synthetic(tiny_graphs(), 4, 1000);
  const Model start = init_model(tiny_encoder(), MarginConfig{}, 2, 1);
  int callbacks = 0;
  const auto a = train(start, cfg, synthetic_source(tiny_graphs()), validation,
                       [&](const EpochRecord&) { ++callbacks; });
  const auto b = train(start, cfg, synthetic_source(tiny_graphs()), validation);
  CHECK(callbacks == cfg.epochs);
  REQUIRE(a.history.size() == static_cast<std::size_t>(cfg.epochs));
  CHECK(history_csv(a.history) == history_csv(b.history));
  CHECK(a.model.fingerprint() == b.model.fingerprint());
  CHECK(history_csv(a.history).rfind("epoch,loss,val_auroc,radius,n_targets,lr\n", 0) == 0);

  double best = 0;
  for (const auto& r : a.history) {
    CHECK(std::isfinite(r.loss));
    CHECK(r.val_auroc >= 0.0);
    CHECK(r.val_auroc <= 1.0);
    best = std::max(best, r.val_auroc);
  }
  CHECK(a.best_val_auroc == best);
  CHECK(a.history[static_cast<std::size_t>(a.best_epoch)].val_auroc == best);
  CHECK(a.model.radius == 2);
  CHECK(a.model.margin.threshold > 0.0);
  CHECK(a.model.margin.threshold < a.model.margin.margin);
}

TEST_CASE("curriculum state never moves backwards during training") {
  auto cfg = tiny_train();
  cfg.epochs = 8;
  cfg.regeneration_period = 3;
  const auto validation = gen_synthetic(tiny_graphs(), 3, 77);
  const auto result = train(init_model(tiny_encoder(), MarginConfig{}, 2, 2), cfg,
                            pool_source(gen_synthetic(tiny_graphs(), 6, 78)), validation);
  for (std::size_t i = 1; i < result.history.size(); ++i) {
    const auto& p = result.history[i - 1];
    const auto& c = result.history[i];
    CHECK(c.radius >= p.radius);
    CHECK((c.radius > p.radius || c.target_count >= p.target_count));
  }
  CHECK(result.history.back().radius == 2);  // patience 1 forces advances
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_min = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.hard_negative_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
