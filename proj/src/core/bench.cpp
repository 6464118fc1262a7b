#include "ordermatch/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <memory>

#include "json.hpp"
#include "ordermatch/error.hpp"
#include "ordermatch/metrics.hpp"
#include "ordermatch/query.hpp"
#include "ordermatch/sampling.hpp"
#include "ordermatch/util.hpp"

namespace om {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::optional<LabeledGraph> sample_exact_size(const LabeledGraph& g, std::size_t size, Rng& rng) {
  SamplerConfig sc;
  sc.min_nodes = size;
  sc.max_nodes = size;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const NodeId u = pick_anchor(g, rng);
    auto n = random_bfs_sample(g, u, sc, rng);
    if (n.graph.node_count() == size) return std::move(n.graph);
  }
  return std::nullopt;
}

bool densify(LabeledGraph& q, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> missing;
  for (NodeId a = 0; a < q.node_count(); ++a) {
    for (NodeId b = a + 1; b < q.node_count(); ++b) {
      if (!q.has_edge(a, b)) missing.emplace_back(a, b);
    }
  }
  if (missing.empty()) return false;
  std::shuffle(missing.begin(), missing.end(), rng);
  const std::size_t extra = std::max<std::size_t>(2, q.edge_count() / 4);
  const bool labelled = q.has_edge_labels();
  for (std::size_t i = 0; i < std::min(extra, missing.size()); ++i) {
    if (labelled) {
      q.add_edge(missing[i].first, missing[i].second, 0);
    } else {
      q.add_edge(missing[i].first, missing[i].second);
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(BenchMethod m) noexcept {
  switch (m) {
    case BenchMethod::kExact: return "exact";
    case BenchMethod::kNeural: return "neural";
    case BenchMethod::kNeuralVote: return "neural_vote";
  }
  return "?";
}

BenchMethod parse_bench_method(std::string_view name) {
  if (name == "exact") return BenchMethod::kExact;
  if (name == "neural") return BenchMethod::kNeural;
  if (name == "neural_vote") return BenchMethod::kNeuralVote;
  throw ConfigError("unknown bench method '" + std::string(name) + "' (expected exact, neural or neural_vote)");
}

BenchReport bench(std::span<const BenchMethod> methods, std::span<const LabeledGraph> targets,
                  std::span<const BenchInstance> instances, const Model* model, const BenchConfig& cfg) {
  cfg.budget.validate();
  for (const auto& inst : instances) {
    if (inst.target >= targets.size()) throw InvalidArgument("bench: instance " + inst.id + " names a missing target");
  }
  const bool neural = std::any_of(methods.begin(), methods.end(), [](BenchMethod m) { return m != BenchMethod::kExact; });
  if (neural && model == nullptr) throw InvalidArgument("bench: neural methods need a model");

  BenchReport report;
  std::vector<EmbeddingIndex> indexes;
  if (neural) {
    for (const auto& t : targets) {
      const auto start = Clock::now();
      indexes.push_back(build_index(t, *model, cfg.workers));
      report.index_build_s.push_back(seconds_since(start));
    }
  }
  const int hops = cfg.vote_hops < 0 && model ? model->radius : std::max(cfg.vote_hops, 0);

  for (BenchMethod method : methods) {
    std::vector<BenchResult> rows(instances.size());
    parallel_for(instances.size(), cfg.workers, [&](std::size_t i) {
      const auto& inst = instances[i];
      const auto& target = targets[inst.target];
      BenchResult& r = rows[i];
      r.method = std::string(to_string(method));
      r.instance_id = inst.id;
      r.n_query = inst.query.node_count();
      r.n_target = target.node_count();
      r.label = inst.label;
      const auto start = Clock::now();
      if (method == BenchMethod::kExact) {
        const auto res = is_subgraph(inst.query, target, cfg.budget);
        r.time_s = seconds_since(start);
        r.success = res != MatchResult::kTimeout;
        r.decision = res == MatchResult::kTrue;
        r.score = res == MatchResult::kTrue ? 1.0 : res == MatchResult::kFalse ? 0.0 : 0.5;
        return;
      }
      const auto qidx = build_index(inst.query, *model, 1);
      const auto m = alignment(qidx, indexes[inst.target], 1);
      QueryDecision d;
      if (method == BenchMethod::kNeural) {
        d = decide(m, model->margin.threshold, model->decision_cutoff);
        r.score = -d.mean_violation;
      } else {
        const auto votes = vote_matrix(inst.query, qidx, target, indexes[inst.target], hops, model->margin.threshold, 1);
        d = decide(m, votes, model->decision_cutoff);
        r.score = d.score;
      }
      r.time_s = seconds_since(start);
      r.success = true;
      r.decision = d.subgraph;
    });
    report.results.insert(report.results.end(), rows.begin(), rows.end());
  }
  return report;
}

std::vector<BenchInstance> make_bench_instances(std::span<const LabeledGraph> targets, const BenchQueryConfig& cfg) {
  if (targets.empty()) throw InvalidArgument("make_bench_instances: no targets");
  if (!(cfg.positive_fraction >= 0.0 && cfg.positive_fraction <= 1.0)) {
    throw ConfigError("positive_fraction must lie in [0, 1]");
  }
  std::vector<BenchInstance> out;
  for (std::size_t size : cfg.sizes) {
    const auto positives = static_cast<std::size_t>(std::llround(cfg.positive_fraction * static_cast<double>(cfg.per_size)));
    for (std::size_t i = 0; i < cfg.per_size; ++i) {
      Rng rng = make_rng(derive_seed(cfg.seed, size, i));
      BenchInstance inst;
      inst.target = static_cast<std::size_t>(rng() % targets.size());
      auto q = sample_exact_size(targets[inst.target], size, rng);
      if (!q) throw InvalidArgument("make_bench_instances: target " + std::to_string(inst.target) +
                                    " has no connected sample of " + std::to_string(size) + " nodes");
      inst.query = std::move(*q);
      if (i < positives) {
        inst.label = true;
      } else if (densify(inst.query, rng)) {
        const auto r = is_subgraph(inst.query, targets[inst.target], cfg.label_budget);
        if (r != MatchResult::kTimeout) inst.label = r == MatchResult::kTrue;
      } else {
        inst.label = true;  // complete graph sample, nothing to add
      }
      inst.id = "q" + std::to_string(size) + "_" + std::to_string(i);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::string bench_csv(std::span<const BenchResult> results) {
  std::string out = "method,instance_id,n_query,n_target,time_s,success,decision,label\n";
  char line[64];
  for (const auto& r : results) {
    out += r.method + "," + r.instance_id + ",";
    std::snprintf(line, sizeof line, "%zu,%zu,%.9f,", r.n_query, r.n_target, r.time_s);
    out += line;
    out += r.success ? "1," : "0,";
    out += r.decision ? "1," : "0,";
    out += r.label ? (*r.label ? "1" : "0") : "";
    out += "\n";
  }
  return out;
}

namespace {

nlohmann::ordered_json summarize(const std::vector<const BenchResult*>& rows) {
  double time = 0.0;
  std::size_t ok = 0;
  std::vector<double> scores;
  std::vector<char> labels;
  for (const auto* r : rows) {
    time += r->time_s;
    ok += r->success;
    if (r->label) {
      scores.push_back(r->score);
      labels.push_back(*r->label ? 1 : 0);
    }
  }
  nlohmann::ordered_json j;
  const auto n = static_cast<double>(rows.size());
  j["instances"] = rows.size();
  j["success_rate"] = rows.empty() ? 0.0 : static_cast<double>(ok) / n;
  j["mean_time_s"] = rows.empty() ? 0.0 : time / n;
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos > 0 && pos < static_cast<std::ptrdiff_t>(labels.size())) {
    std::unique_ptr<bool[]> l(new bool[labels.size()]);
    for (std::size_t i = 0; i < labels.size(); ++i) l[i] = labels[i] != 0;
    j["auroc"] = auroc(scores, std::span<const bool>(l.get(), labels.size()));
  } else {
    j["auroc"] = nullptr;
  }
  return j;
}

}  // namespace

std::string bench_summary_json(const BenchReport& report) {
  std::map<std::string, std::vector<const BenchResult*>> by_method;
  std::vector<std::string> order;
  for (const auto& r : report.results) {
    if (!by_method.count(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(&r);
  }
  nlohmann::ordered_json out;
  out["index_build_s"] = report.index_build_s;
  auto& methods = out["methods"];
  methods = nlohmann::ordered_json::object();
  for (const auto& name : order) {
    const auto& rows = by_method[name];
    auto j = summarize(rows);
    std::map<std::size_t, std::vector<const BenchResult*>> bins;
    for (const auto* r : rows) bins[r->n_query].push_back(r);
    auto& sizes = j["by_query_size"];
    sizes = nlohmann::ordered_json::array();
    for (const auto& [size, bin] : bins) {
      auto b = summarize(bin);
      nlohmann::ordered_json entry;
      entry["n_query"] = size;
      for (auto it = b.begin(); it != b.end(); ++it) entry[it.key()] = it.value();
      sizes.push_back(entry);
    }
    methods[name] = j;
  }
  return out.dump(2) + "\n";
}

}  // namespace om
