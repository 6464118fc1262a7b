#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ordermatch/bench.hpp"
#include "ordermatch/datasets.hpp"
#include "ordermatch/encoder.hpp"
#include "ordermatch/order_embed.hpp"
#include "ordermatch/trainer.hpp"

namespace om {

// Everything a pipeline run can be configured with. Text form is one
// `key = value` per line, `#` starts a comment, later lines win.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  SyntheticConfig data;
  std::size_t data_count = 256;         // graphs written by gen
  std::size_t validation_graphs = 64;   // held-out synthetic graphs for train

  EncoderConfig encoder;
  MarginConfig margin;
  TrainConfig train;

  std::vector<BenchMethod> bench_methods{BenchMethod::kExact, BenchMethod::kNeural, BenchMethod::kNeuralVote};
  BenchQueryConfig bench_queries;
  BenchConfig bench;
  std::size_t bench_targets = 2;
  std::size_t bench_target_nodes = 200;

  int vote_hops = -1;  // < 0: model radius

  // Collects every problem and throws one ConfigError naming all offending keys.
  void validate() const;
};

// Applies `text` on top of `base`. Unknown keys and malformed values are all
// reported together in a single ConfigError.
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
std::string run_config_to_text(const RunConfig& cfg);
std::vector<std::string> run_config_keys();

}  // namespace om
