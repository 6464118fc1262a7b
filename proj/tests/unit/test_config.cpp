#include <string>

#include "doctest.h"
#include "ordermatch/config.hpp"
#include "ordermatch/error.hpp"

using namespace om;

namespace {

std::string message_of(std::string_view text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool mentions(const std::string& msg, const std::string& key) { return msg.find("\n  " + key + ":") != std::string::npos; }

}  // namespace

TEST_CASE("defaults are valid and round-trip through text") {
  const RunConfig def;
  CHECK_NOTHROW(def.validate());
  const std::string text = run_config_to_text(def);
  const RunConfig back = parse_run_config(text);
  CHECK(run_config_to_text(back) == text);
  CHECK(run_config_keys().size() >= 60);
}

TEST_CASE("values, comments and precedence") {
  const auto cfg = parse_run_config(R"(
# a comment
seed = 42
train.epochs = 7   # trailing comment
train.epochs = 9
encoder.use_structural_features = false
bench.methods = exact, neural_vote
bench.sizes = 5,10
bench.timeout_s = 1.5
data.family = er
sampler.strategy = random_walk
)");
  CHECK(cfg.seed == 42);
  CHECK(cfg.train.epochs == 9);
  CHECK_FALSE(cfg.encoder.use_structural_features);
  REQUIRE(cfg.bench_methods.size() == 2);
  CHECK(cfg.bench_methods[1] == BenchMethod::kNeuralVote);
  CHECK(cfg.bench_queries.sizes == std::vector<std::size_t>{5, 10});
  CHECK(cfg.bench.budget.wall_timeout.count() == 1500);
  CHECK(cfg.data.family == GraphFamily::kErdosRenyi);
  CHECK(cfg.train.pairs.query.strategy == SamplerStrategy::kRandomWalk);
}

TEST_CASE("every offending key is listed") {
  const auto msg = message_of(R"(
nonsense = 3
encoder.layers = many
train.epochs = 0
margin.threshold = 4
train.learning_rate = -1
no equals sign here
bench.methods = exact, magic
)");
  REQUIRE_FALSE(msg.empty());
  CHECK(mentions(msg, "nonsense"));
  CHECK(mentions(msg, "encoder.layers"));
  CHECK(mentions(msg, "train.epochs"));
  CHECK(mentions(msg, "margin.threshold"));
  CHECK(mentions(msg, "train.learning_rate"));
  CHECK(mentions(msg, "line 7"));
  CHECK(mentions(msg, "bench.methods"));
  CHECK_FALSE(mentions(msg, "seed"));
}

TEST_CASE("cross-key rules") {
  CHECK(mentions(message_of("data.min_nodes = 10\ndata.max_nodes = 5"), "data.max_nodes"));
  CHECK(mentions(message_of("data.label_alphabet_size = 4"), "encoder.label_alphabet_size"));
  CHECK(message_of("data.label_alphabet_size = 4\nencoder.label_alphabet_size = 4").empty());
  CHECK(mentions(message_of("bench.target_nodes = 20\nbench.sizes = 10,30"), "bench.sizes"));
  CHECK(mentions(message_of("train.batch_min = 3"), "train.batch_min"));
}
