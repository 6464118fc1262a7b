#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ordermatch/exact_match.hpp"
#include "ordermatch/graph.hpp"
#include "ordermatch/model.hpp"

namespace om {

enum class BenchMethod { kExact, kNeural, kNeuralVote };

std::string_view to_string(BenchMethod m) noexcept;
BenchMethod parse_bench_method(std::string_view name);

struct BenchInstance {
  std::string id;
  std::size_t target = 0;  // index into the target list
  LabeledGraph query;
  std::optional<bool> label;
};

struct BenchResult {
  std::string method;
  std::string instance_id;
  std::size_t n_query = 0;
  std::size_t n_target = 0;
  double time_s = 0.0;
  bool success = false;  // finished within budget
  bool decision = false;
  std::optional<bool> label;
  double score = 0.0;  // higher means more likely a subgraph
};

struct BenchConfig {
  MatchBudget budget;  // exact method only
  int vote_hops = -1;  // < 0: model radius
  std::size_t workers = 1;
};

struct BenchReport {
  std::vector<BenchResult> results;
  std::vector<double> index_build_s;  // per target, neural methods only
};

// Exact: time of one unanchored is_subgraph call. Neural: embedding the query,
// filling the alignment matrix and deciding; target indexes are built first and
// timed separately. Results are ordered by method, then instance.
BenchReport bench(std::span<const BenchMethod> methods, std::span<const LabeledGraph> targets,
                  std::span<const BenchInstance> instances, const Model* model, const BenchConfig& cfg);

struct BenchQueryConfig {
  std::vector<std::size_t> sizes{10, 20, 30, 40};
  std::size_t per_size = 5;
  double positive_fraction = 1.0;
  MatchBudget label_budget{2'000'000, std::chrono::milliseconds(5'000)};
  std::uint64_t seed = 0;
};

// Positives are connected random-BFS samples of exactly the requested size.
// Negatives take such a sample and add edges between non-adjacent sample nodes;
// their label comes from the exact matcher (unset when it times out).
std::vector<BenchInstance> make_bench_instances(std::span<const LabeledGraph> targets, const BenchQueryConfig& cfg);

// Columns: method,instance_id,n_query,n_target,time_s,success,decision,label
std::string bench_csv(std::span<const BenchResult> results);
// Per method: success rate, mean time, AUROC of score when both labels occur,
// and the same broken down by query size.
std::string bench_summary_json(const BenchReport& report);

}  // namespace om
