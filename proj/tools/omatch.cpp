// omatch: command-line front end over the ordermatch C API.

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ordermatch.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Carries a status out of a command so main can pick the exit code.
struct Failure {
  om_status status;
  std::string message;
};

void check(om_status s, const std::string& context) {
  if (s != OM_OK) throw Failure{s, context + ": " + om_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<om_config, Deleter<om_config, om_config_free>>;
using Graphs = std::unique_ptr<om_graphs, Deleter<om_graphs, om_graphs_free>>;
using ModelPtr = std::unique_ptr<om_model, Deleter<om_model, om_model_free>>;
using Index = std::unique_ptr<om_index, Deleter<om_index, om_index_free>>;

struct CString {
  char* p = nullptr;
  ~CString() { om_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{OM_CONFIG_ERROR, "cannot read config file " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& contents) {
  check(om_write_file_atomic(path.c_str(), contents.c_str()), "writing " + path);
}

// Options shared by the commands that read a run configuration. Explicit flags
// are appended after the file and --set lines so they take precedence.
struct ConfigOptions {
  std::string file;
  std::vector<std::string> sets;
  std::vector<std::string> flags;
  long long seed = -1;
  long long workers = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "Config file of key = value lines")->check(CLI::ExistingFile);
    cmd->add_option("-s,--set", sets, "Override one key (key=value), repeatable");
    cmd->add_option("--seed", seed, "Global seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("-j,--workers", workers, "Worker threads (default: available parallelism)")
        ->check(CLI::PositiveNumber);
  }

  Config load() const {
    std::string text;
    if (!file.empty()) text = read_text(file) + "\n";
    // default worker count comes first so the file and flags can override it
    const unsigned hw = std::thread::hardware_concurrency();
    text = "workers = " + std::to_string(hw == 0 ? 1 : hw) + "\n" + text;
    for (const auto& s : sets) text += s + "\n";
    for (const auto& s : flags) text += s + "\n";
    if (seed >= 0) text += "seed = " + std::to_string(seed) + "\n";
    if (workers > 0) text += "workers = " + std::to_string(workers) + "\n";
    om_config* cfg = nullptr;
    check(om_config_parse(text.c_str(), &cfg), "configuration");
    return Config(cfg);
  }
};

std::size_t default_workers(long long flag) {
  if (flag > 0) return static_cast<std::size_t>(flag);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

Graphs load_graphs(const std::string& path) {
  om_graphs* g = nullptr;
  check(om_graphs_load(path.c_str(), &g), "loading " + path);
  return Graphs(g);
}

ModelPtr load_model(const std::string& path) {
  om_model* m = nullptr;
  check(om_model_load(path.c_str(), &m), "loading " + path);
  return ModelPtr(m);
}

// ---- gen

struct GenCmd {
  ConfigOptions config;
  std::string out;
  long long count = -1;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen", "Generate a synthetic graph dataset (JSON)");
    config.attach(cmd);
    cmd->add_option("-o,--out", out, "Output JSON file")->required();
    cmd->add_option("-n,--count", count, "Number of graphs (data.count)")->check(CLI::PositiveNumber);
    cmd->final_callback([this] { run(); });
  }

  void run() {
    if (count > 0) config.flags.push_back("data.count = " + std::to_string(count));
    const Config cfg = config.load();
    om_graphs* g = nullptr;
    check(om_graphs_generate(cfg.get(), &g), "generating graphs");
    const Graphs graphs(g);
    check(om_graphs_save(graphs.get(), out.c_str()), "writing " + out);
    std::size_t nodes = 0, edges = 0;
    const std::size_t n = om_graphs_count(graphs.get());
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t a = 0, b = 0;
      check(om_graphs_shape(graphs.get(), i, &a, &b), "graph shape");
      nodes += a;
      edges += b;
    }
    std::printf("wrote %zu graphs (%zu nodes, %zu edges) to %s\n", n, nodes, edges, out.c_str());
  }
};

// ---- train

struct TrainCmd {
  ConfigOptions config;
  std::string data, tu, out, history;
  long long epochs = -1;
  bool quiet = false;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
    config.attach(cmd);
    auto* d = cmd->add_option("-d,--data", data, "JSON graph pool to draw targets from (default: generate)")
                  ->check(CLI::ExistingFile);
    cmd->add_option("--tu", tu, "TU-format dataset directory to draw targets from")
        ->check(CLI::ExistingDirectory)
        ->excludes(d);
    cmd->add_option("-o,--out", out, "Checkpoint file")->required();
    cmd->add_option("--history", history, "Metric history CSV (default: <out>.history.csv)");
    cmd->add_option("-e,--epochs", epochs, "Epoch count (train.epochs)")->check(CLI::PositiveNumber);
    cmd->add_flag("-q,--quiet", quiet, "No per-epoch lines");
    cmd->final_callback([this] { run(); });
  }

  static void on_epoch(const om_epoch_info* e, void*) {
    std::printf("epoch %4d  loss %.5f  val_auroc %.4f  radius %d  targets %zu  lr %.2e\n", e->epoch, e->loss,
                e->val_auroc, e->radius, e->target_count, e->lr);
    std::fflush(stdout);
  }

  void run() {
    if (epochs > 0) config.flags.push_back("train.epochs = " + std::to_string(epochs));
    const Config cfg = config.load();
    Graphs pool;
    if (!data.empty()) pool = load_graphs(data);
    if (!tu.empty()) {
      om_graphs* g = nullptr;
      check(om_graphs_load_tu(tu.c_str(), &g), "loading " + tu);
      pool.reset(g);
    }
    om_model* m = nullptr;
    CString csv;
    check(om_train(cfg.get(), pool.get(), quiet ? nullptr : &on_epoch, nullptr, &m, &csv.p), "training");
    const ModelPtr model(m);
    check(om_model_save(model.get(), out.c_str()), "writing " + out);
    const std::string hist = history.empty() ? out + ".history.csv" : history;
    write_output(hist, csv.str());
    std::printf("model %016llx written to %s, history to %s\n",
                static_cast<unsigned long long>(om_model_fingerprint(model.get())), out.c_str(), hist.c_str());
  }
};

// ---- embed

struct EmbedCmd {
  std::string graph, model_path, out;
  std::size_t graph_index = 0;
  int radius = -1;
  long long workers = -1;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("embed", "Precompute the neighbourhood embeddings of a target graph");
    cmd->add_option("-g,--graph", graph, "Target graph JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("-i,--graph-index", graph_index, "Which graph of the file");
    cmd->add_option("-m,--model", model_path, "Checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("-k,--radius", radius, "Neighbourhood radius (default: the checkpoint's)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("-o,--out", out, "Index file")->required();
    cmd->add_option("-j,--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->final_callback([this] { run(); });
  }

  void run() {
    const Graphs graphs = load_graphs(graph);
    const ModelPtr model = load_model(model_path);
    om_index* idx = nullptr;
    check(om_index_build(model.get(), graphs.get(), graph_index, radius, default_workers(workers), &idx),
          "building index");
    const Index index(idx);
    check(om_index_save(index.get(), out.c_str()), "writing " + out);
    std::printf("embedded %zu nodes at radius %d into %s\n", om_index_size(index.get()), om_index_radius(index.get()),
                out.c_str());
  }
};

// ---- query

struct QueryCmd {
  std::string query, target, index_path, model_path, alignment, per_node;
  std::size_t query_index = 0, target_index = 0;
  bool vote = false;
  int vote_hops = -1;
  long long workers = -1;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("query", "Decide whether a query graph is a subgraph of a target graph");
    cmd->add_option("-q,--query", query, "Query graph JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--query-index", query_index, "Which graph of the query file");
    cmd->add_option("-t,--target", target, "Target graph JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--target-index", target_index, "Which graph of the target file");
    cmd->add_option("-x,--index", index_path, "Prebuilt index of the target (default: embed on the fly)")
        ->check(CLI::ExistingFile);
    cmd->add_option("-m,--model", model_path, "Checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_flag("--vote", vote, "Also decide with neighbour voting");
    cmd->add_option("--vote-hops", vote_hops, "Voting depth (default: the radius)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--per-node", per_node, "Write per-query-node decisions to this CSV");
    cmd->add_option("--alignment", alignment, "Write the alignment matrix to this CSV");
    cmd->add_option("-j,--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->final_callback([this] { run(); });
  }

  void run() {
    const Graphs queries = load_graphs(query);
    const Graphs targets = load_graphs(target);
    const ModelPtr model = load_model(model_path);
    Index index;
    if (!index_path.empty()) {
      om_index* idx = nullptr;
      check(om_index_load(index_path.c_str(), targets.get(), target_index, model.get(), &idx),
            "loading " + index_path);
      index.reset(idx);
    }
    const om_query_options opts{vote ? 1 : 0, vote_hops, per_node.empty() ? 0 : 1, default_workers(workers)};
    om_query_result r{};
    CString align_csv, node_csv;
    check(om_query(model.get(), targets.get(), target_index, index.get(), queries.get(), query_index, &opts, &r,
                   alignment.empty() ? nullptr : &align_csv.p, per_node.empty() ? nullptr : &node_csv.p),
          "query");
    if (!alignment.empty()) write_output(alignment, align_csv.str());
    if (!per_node.empty()) write_output(per_node, node_csv.str());
    std::printf("subgraph: %s\n", r.subgraph ? "yes" : "no");
    std::printf("score: %.6f\n", r.score);
    std::printf("mean_violation: %.6g\n", r.mean_violation);
    if (vote) {
      std::printf("vote_subgraph: %s\n", r.vote_subgraph ? "yes" : "no");
      std::printf("vote_score: %.6f\n", r.vote_score);
    }
    std::printf("alignment: %zu x %zu (%llu scores)\n", r.target_nodes, r.query_nodes,
                static_cast<unsigned long long>(r.score_evaluations));
  }
};

// ---- bench

struct BenchCmd {
  ConfigOptions config;
  std::string model_path, targets, out, summary;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench", "Compare exact and neural matching on generated queries");
    config.attach(cmd);
    cmd->add_option("-m,--model", model_path, "Checkpoint (needed for the neural methods)")
        ->check(CLI::ExistingFile);
    cmd->add_option("-t,--targets", targets, "Target graphs JSON (default: generate)")->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", out, "Per-instance results CSV")->required();
    cmd->add_option("--summary", summary, "Summary JSON (default: <out>.summary.json)");
    cmd->final_callback([this] { run(); });
  }

  void run() {
    const Config cfg = config.load();
    ModelPtr model;
    if (!model_path.empty()) model = load_model(model_path);
    Graphs ts;
    if (!targets.empty()) ts = load_graphs(targets);
    CString csv, json;
    check(om_bench(cfg.get(), model.get(), ts.get(), &csv.p, &json.p), "bench");
    const std::string sum = summary.empty() ? out + ".summary.json" : summary;
    write_output(out, csv.str());
    write_output(sum, json.str());
    const auto summary_json = nlohmann::json::parse(json.str());
    for (const auto& [method, s] : summary_json.at("methods").items()) {
      std::printf("%-12s %3d instances  success %5.1f%%  mean %.4g s  auroc %s\n", method.c_str(),
                  s.at("instances").get<int>(), 100.0 * s.at("success_rate").get<double>(),
                  s.at("mean_time_s").get<double>(), s.at("auroc").is_null() ? "n/a" : s.at("auroc").dump().c_str());
    }
    std::printf("results in %s, summary in %s\n", out.c_str(), sum.c_str());
  }
};

// ---- selftest

struct SelftestCmd {
  unsigned long long seed = 0;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("selftest", "Run the oracle, geometry and gradient checks");
    cmd->add_option("--seed", seed, "Seed for the random checks");
    cmd->final_callback([this] { run(); });
  }

  void run() {
    int failed = 0;
    CString report;
    check(om_selftest(seed, &failed, &report.p), "selftest");
    std::printf("%s", report.str().c_str());
    if (failed > 0) throw Failure{OM_RUNTIME_ERROR, std::to_string(failed) + " check(s) failed"};
  }
};

// ---- config

struct ConfigCmd {
  ConfigOptions config;
  bool keys = false;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("config", "Print the effective configuration");
    config.attach(cmd);
    cmd->add_flag("--keys", keys, "List every accepted key instead");
    cmd->final_callback([this] { run(); });
  }

  void run() {
    CString text;
    if (keys) {
      check(om_config_keys(&text.p), "config keys");
    } else {
      const Config cfg = config.load();
      check(om_config_to_text(cfg.get(), &text.p), "config");
    }
    std::printf("%s", text.str().c_str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgraph matching with order embeddings", "omatch"};
  app.set_version_flag("--version", std::string(om_version()));
  app.require_subcommand(1);

  GenCmd gen;
  TrainCmd train;
  EmbedCmd embed;
  QueryCmd query;
  BenchCmd bench;
  SelftestCmd selftest;
  ConfigCmd config;
  gen.attach(app);
  train.attach(app);
  embed.attach(app);
  query.attach(app);
  bench.attach(app);
  selftest.attach(app);
  config.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const Failure& f) {
    std::fprintf(stderr, "omatch: %s\n", f.message.c_str());
    const bool usage = f.status == OM_CONFIG_ERROR || f.status == OM_INVALID_ARGUMENT;
    return usage ? kExitUsage : kExitRuntime;
  }
  return 0;
}
