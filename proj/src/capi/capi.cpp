#include "ordermatch.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "ordermatch/bench.hpp"
#include "ordermatch/config.hpp"
#include "ordermatch/datasets.hpp"
#include "ordermatch/error.hpp"
#include "ordermatch/graph_io.hpp"
#include "ordermatch/model.hpp"
#include "ordermatch/query.hpp"
#include "ordermatch/selftest.hpp"
#include "ordermatch/trainer.hpp"
#include "ordermatch/util.hpp"

struct om_config {
  om::RunConfig cfg;
};
struct om_graphs {
  std::vector<om::LabeledGraph> graphs;
};
struct om_model {
  om::Model model;
};
struct om_index {
  om::EmbeddingIndex index;
};

namespace {

enum : std::uint64_t { kStreamGen = 0x11, kStreamValidation = 0x12, kStreamBench = 0x13 };

thread_local std::string last_error;

template <typename F>
om_status guarded(F&& fn) {
  try {
    fn();
    last_error.clear();
    return OM_OK;
  } catch (const om::Error& e) {
    last_error = e.what();
    return static_cast<om_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return OM_RUNTIME_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return OM_INTERNAL_ERROR;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw om::InvalidArgument(std::string(what) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const om::LabeledGraph& graph_at(const om_graphs* g, std::size_t i, const char* what) {
  require(g, what);
  if (i >= g->graphs.size()) {
    throw om::InvalidArgument(std::string(what) + " index " + std::to_string(i) + " is out of range (" +
                              std::to_string(g->graphs.size()) + " graphs)");
  }
  return g->graphs[i];
}

om::Model fresh_model(const om::RunConfig& rc) {
  return om::init_model(rc.encoder, rc.margin, rc.train.curriculum.max_radius, om::derive_seed(rc.seed, 0x3a));
}

}  // namespace

extern "C" {

const char* om_last_error(void) { return last_error.c_str(); }

const char* om_status_name(om_status status) {
  switch (status) {
    case OM_OK: return "ok";
    case OM_INVALID_ARGUMENT: return "invalid argument";
    case OM_CONFIG_ERROR: return "configuration error";
    case OM_IO_ERROR: return "i/o error";
    case OM_PARSE_ERROR: return "parse error";
    case OM_FINGERPRINT_MISMATCH: return "fingerprint mismatch";
    case OM_RUNTIME_ERROR: return "runtime failure";
    case OM_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* om_version(void) { return "0.1.0"; }

void om_string_free(char* s) { delete[] s; }

om_status om_config_parse(const char* text, om_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    auto cfg = std::make_unique<om_config>();
    cfg->cfg = om::parse_run_config(text);
    cfg->cfg.validate();
    *out = cfg.release();
  });
}

om_status om_config_to_text(const om_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup(om::run_config_to_text(cfg->cfg));
  });
}

om_status om_config_keys(char** out) {
  return guarded([&] {
    require(out, "out");
    std::string s;
    for (const auto& k : om::run_config_keys()) s += k + "\n";
    *out = dup(s);
  });
}

uint64_t om_config_seed(const om_config* cfg) { return cfg ? cfg->cfg.seed : 0; }

void om_config_free(om_config* cfg) { delete cfg; }

om_status om_graphs_load(const char* path, om_graphs** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto g = std::make_unique<om_graphs>();
    g->graphs = om::load_graphs(path);
    *out = g.release();
  });
}

om_status om_graphs_load_tu(const char* dir, om_graphs** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    auto g = std::make_unique<om_graphs>();
    g->graphs = om::load_tu_dataset(dir);
    *out = g.release();
  });
}

om_status om_graphs_generate(const om_config* cfg, om_graphs** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    auto g = std::make_unique<om_graphs>();
    g->graphs = om::gen_synthetic(cfg->cfg.data, cfg->cfg.data_count, om::derive_seed(cfg->cfg.seed, kStreamGen));
    *out = g.release();
  });
}

om_status om_graphs_save(const om_graphs* graphs, const char* path) {
  return guarded([&] {
    require(graphs, "graphs");
    require(path, "path");
    om::save_graphs(graphs->graphs, path);
  });
}

size_t om_graphs_count(const om_graphs* graphs) { return graphs ? graphs->graphs.size() : 0; }

om_status om_graphs_shape(const om_graphs* graphs, size_t i, size_t* nodes, size_t* edges) {
  return guarded([&] {
    const auto& g = graph_at(graphs, i, "graph");
    if (nodes) *nodes = g.node_count();
    if (edges) *edges = g.edge_count();
  });
}

void om_graphs_free(om_graphs* graphs) { delete graphs; }

om_status om_train(const om_config* cfg, const om_graphs* pool, om_epoch_callback on_epoch, void* user,
                   om_model** model_out, char** history_csv_out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(model_out, "model_out");
    const om::RunConfig& rc = cfg->cfg;
    om::TrainConfig tc = rc.train;
    tc.seed = rc.seed;
    tc.workers = rc.workers;

    om::GraphSource source;
    std::vector<om::LabeledGraph> validation;
    if (pool == nullptr) {
      source = om::synthetic_source(rc.data);
      validation = om::gen_synthetic(rc.data, rc.validation_graphs, om::derive_seed(rc.seed, kStreamValidation));
    } else {
      if (pool->graphs.size() < 2) throw om::InvalidArgument("training pool needs at least two graphs");
      const std::size_t held = std::max<std::size_t>(1, pool->graphs.size() / 10);
      std::vector<om::LabeledGraph> train_part(pool->graphs.begin(), pool->graphs.end() - static_cast<std::ptrdiff_t>(held));
      validation.assign(pool->graphs.end() - static_cast<std::ptrdiff_t>(held), pool->graphs.end());
      source = om::pool_source(std::move(train_part));
    }
    om::EpochCallback cb;
    if (on_epoch) {
      cb = [&](const om::EpochRecord& r) {
        const om_epoch_info info{r.epoch, r.loss, r.val_auroc, r.radius, r.target_count, r.lr};
        on_epoch(&info, user);
      };
    }
    auto result = om::train(fresh_model(rc), tc, source, validation, cb);
    auto m = std::make_unique<om_model>();
    m->model = std::move(result.model);
    if (history_csv_out) *history_csv_out = dup(om::history_csv(result.history));
    *model_out = m.release();
  });
}

om_status om_model_load(const char* path, om_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto m = std::make_unique<om_model>();
    m->model = om::load_model(path);
    *out = m.release();
  });
}

om_status om_model_save(const om_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    om::save_model(model->model, path);
  });
}

uint64_t om_model_fingerprint(const om_model* model) { return model ? model->model.fingerprint() : 0; }

int om_model_radius(const om_model* model) { return model ? model->model.radius : 0; }

void om_model_free(om_model* model) { delete model; }

om_status om_index_build(const om_model* model, const om_graphs* graphs, size_t graph, int radius, size_t workers,
                         om_index** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto& g = graph_at(graphs, graph, "graph");
    om::Model m = model->model;
    if (radius >= 0) m.radius = radius;
    auto idx = std::make_unique<om_index>();
    idx->index = om::build_index(g, m, std::max<std::size_t>(1, workers));
    *out = idx.release();
  });
}

om_status om_index_save(const om_index* index, const char* path) {
  return guarded([&] {
    require(index, "index");
    require(path, "path");
    om::save_index(index->index, path);
  });
}

om_status om_index_load(const char* path, const om_graphs* graphs, size_t graph, const om_model* model,
                        om_index** out) {
  return guarded([&] {
    require(path, "path");
    require(model, "model");
    require(out, "out");
    const auto& g = graph_at(graphs, graph, "graph");
    auto idx = std::make_unique<om_index>();
    idx->index = om::load_index(path);
    om::Model m = model->model;
    m.radius = idx->index.radius;
    om::check_index(idx->index, g, m);
    *out = idx.release();
  });
}

size_t om_index_size(const om_index* index) { return index ? index->index.size() : 0; }

int om_index_radius(const om_index* index) { return index ? index->index.radius : 0; }

void om_index_free(om_index* index) { delete index; }

om_status om_query(const om_model* model, const om_graphs* targets, size_t target, const om_index* index,
                   const om_graphs* queries, size_t query, const om_query_options* options, om_query_result* result,
                   char** alignment_csv_out, char** per_node_csv_out) {
  return guarded([&] {
    require(model, "model");
    require(result, "result");
    // an index built at another radius carries that radius into the query
    om::Model m = model->model;
    if (index) m.radius = index->index.radius;
    const auto& tg = graph_at(targets, target, "target");
    const auto& qg = graph_at(queries, query, "query");
    const om_query_options opts = options ? *options : om_query_options{0, -1, 0, 1};
    const std::size_t workers = std::max<std::size_t>(1, opts.workers);

    om::EmbeddingIndex built;
    if (index) {
      om::check_index(index->index, tg, m);
    } else {
      built = om::build_index(tg, m, workers);
    }
    const om::EmbeddingIndex& tidx = index ? index->index : built;
    if (qg.node_count() == 0 || !om::is_connected(qg)) throw om::InvalidArgument("query graph must be connected");
    const auto qidx = om::build_index(qg, m, workers);
    const auto a = om::alignment(qidx, tidx, workers);
    const auto d = om::decide(a, m.margin.threshold, m.decision_cutoff);

    om_query_result r{};
    r.subgraph = d.subgraph ? 1 : 0;
    r.score = d.score;
    r.mean_violation = d.mean_violation;
    r.target_nodes = a.target_nodes();
    r.query_nodes = a.query_nodes();
    r.score_evaluations = a.score_evaluations;

    std::vector<std::uint8_t> votes;
    const int hops = opts.vote_hops < 0 ? m.radius : opts.vote_hops;
    if (opts.vote) {
      votes = om::vote_matrix(qg, qidx, tg, tidx, hops, m.margin.threshold, workers);
      const auto vd = om::decide(a, votes, m.decision_cutoff);
      r.vote_subgraph = vd.subgraph ? 1 : 0;
      r.vote_score = vd.score;
    }
    if (alignment_csv_out) *alignment_csv_out = dup(om::alignment_csv(a));
    if (per_node_csv_out && opts.per_node) {
      std::string csv = opts.vote ? "query_node,best_target_node,violation,match,vote\n"
                                  : "query_node,best_target_node,violation,match\n";
      char line[128];
      for (std::size_t q = 0; q < a.query_nodes(); ++q) {
        std::size_t best = 0;
        for (std::size_t u = 1; u < a.target_nodes(); ++u) {
          if (a.violations(u, q) < a.violations(best, q)) best = u;
        }
        const double e = a.violations(best, q);
        std::snprintf(line, sizeof line, "%zu,%zu,%.17g,%d", q, best, e, e < m.margin.threshold ? 1 : 0);
        csv += line;
        if (opts.vote) {
          bool any = false;
          for (std::size_t u = 0; u < a.target_nodes() && !any; ++u) any = votes[u * a.query_nodes() + q] != 0;
          csv += any ? ",1" : ",0";
        }
        csv += "\n";
      }
      *per_node_csv_out = dup(csv);
    }
    *result = r;
  });
}

om_status om_bench(const om_config* cfg, const om_model* model, const om_graphs* targets, char** csv_out,
                   char** summary_json_out) {
  return guarded([&] {
    require(cfg, "cfg");
    const om::RunConfig& rc = cfg->cfg;
    std::vector<om::LabeledGraph> generated;
    if (targets == nullptr) {
      for (std::size_t i = 0; i < rc.bench_targets; ++i) {
        generated.push_back(om::gen_extended_barabasi(rc.bench_target_nodes, rc.data.m, rc.data.p_add, rc.data.p_rewire,
                                                      rc.data.label_alphabet_size,
                                                      om::derive_seed(rc.seed, kStreamBench, i)));
      }
    }
    const std::vector<om::LabeledGraph>& ts = targets ? targets->graphs : generated;
    om::BenchQueryConfig qc = rc.bench_queries;
    qc.seed = om::derive_seed(rc.seed, kStreamBench, 0xffff);
    const auto instances = om::make_bench_instances(ts, qc);
    om::BenchConfig bc = rc.bench;
    bc.workers = rc.workers;
    bc.vote_hops = rc.vote_hops;
    const auto report = om::bench(rc.bench_methods, ts, instances, model ? &model->model : nullptr, bc);
    if (csv_out) *csv_out = dup(om::bench_csv(report.results));
    if (summary_json_out) *summary_json_out = dup(om::bench_summary_json(report));
  });
}

om_status om_selftest(uint64_t seed, int* failed, char** report_out) {
  return guarded([&] {
    require(failed, "failed");
    const auto checks = om::run_selftest(seed);
    std::string report;
    int bad = 0;
    for (const auto& c : checks) {
      bad += !c.passed;
      report += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
    }
    *failed = bad;
    if (report_out) *report_out = dup(report);
  });
}

om_status om_write_file_atomic(const char* path, const char* contents) {
  return guarded([&] {
    require(path, "path");
    require(contents, "contents");
    om::write_file_atomic(path, contents);
  });
}

}  // extern "C"
