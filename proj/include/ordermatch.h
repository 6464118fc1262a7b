#ifndef ORDERMATCH_H
#define ORDERMATCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OM_API __declspec(dllexport)
#else
#define OM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum om_status {
  OM_OK = 0,
  OM_INVALID_ARGUMENT = 1,
  OM_CONFIG_ERROR = 2,
  OM_IO_ERROR = 3,
  OM_PARSE_ERROR = 4,
  OM_FINGERPRINT_MISMATCH = 5,
  OM_RUNTIME_ERROR = 6,
  OM_INTERNAL_ERROR = 7
} om_status;

typedef struct om_config om_config;
typedef struct om_graphs om_graphs;
typedef struct om_model om_model;
typedef struct om_index om_index;

/* Message for the last failing call on this thread ("" when none). */
OM_API const char* om_last_error(void);
OM_API const char* om_status_name(om_status status);
OM_API const char* om_version(void);
/* Frees strings returned through char** out-parameters. */
OM_API void om_string_free(char* s);

/* Configuration: `key = value` lines. Parsing validates the whole record and
   reports every offending key in one message. */
OM_API om_status om_config_parse(const char* text, om_config** out);
OM_API om_status om_config_to_text(const om_config* cfg, char** out);
OM_API om_status om_config_keys(char** out); /* newline separated */
OM_API uint64_t om_config_seed(const om_config* cfg);
OM_API void om_config_free(om_config* cfg);

/* Graph collections. */
OM_API om_status om_graphs_load(const char* path, om_graphs** out);
OM_API om_status om_graphs_load_tu(const char* dir, om_graphs** out);
OM_API om_status om_graphs_generate(const om_config* cfg, om_graphs** out);
OM_API om_status om_graphs_save(const om_graphs* graphs, const char* path);
OM_API size_t om_graphs_count(const om_graphs* graphs);
OM_API om_status om_graphs_shape(const om_graphs* graphs, size_t i, size_t* nodes, size_t* edges);
OM_API void om_graphs_free(om_graphs* graphs);

typedef struct om_epoch_info {
  int epoch;
  double loss;
  double val_auroc;
  int radius;
  size_t target_count;
  double lr;
} om_epoch_info;

typedef void (*om_epoch_callback)(const om_epoch_info* info, void* user);

/* Trains a fresh model. With pool == NULL targets are generated from the data.*
   keys; otherwise they are drawn from the pool. Validation graphs are always
   held out (generated with a separate seed, or the pool's last tenth). */
OM_API om_status om_train(const om_config* cfg, const om_graphs* pool, om_epoch_callback on_epoch, void* user,
                          om_model** model_out, char** history_csv_out);

OM_API om_status om_model_load(const char* path, om_model** out);
OM_API om_status om_model_save(const om_model* model, const char* path);
OM_API uint64_t om_model_fingerprint(const om_model* model);
OM_API int om_model_radius(const om_model* model);
OM_API void om_model_free(om_model* model);

/* radius < 0 uses the model's radius. Queries against the index use the
   index's radius for their own neighbourhoods too. */
OM_API om_status om_index_build(const om_model* model, const om_graphs* graphs, size_t graph, int radius,
                                size_t workers, om_index** out);
OM_API om_status om_index_save(const om_index* index, const char* path);
/* Fails with OM_FINGERPRINT_MISMATCH unless the file belongs to (graph, model). */
OM_API om_status om_index_load(const char* path, const om_graphs* graphs, size_t graph, const om_model* model,
                               om_index** out);
OM_API size_t om_index_size(const om_index* index);
OM_API int om_index_radius(const om_index* index);
OM_API void om_index_free(om_index* index);

typedef struct om_query_options {
  int vote;      /* also compute the voting decision */
  int vote_hops; /* < 0: model radius */
  int per_node;  /* also return per-query-node decisions */
  size_t workers;
} om_query_options;

typedef struct om_query_result {
  int subgraph;
  double score;
  double mean_violation;
  int vote_subgraph;
  double vote_score;
  size_t target_nodes;
  size_t query_nodes;
  uint64_t score_evaluations;
} om_query_result;

/* Decides whether query graph `query` is a subgraph of target graph `target`.
   index may be NULL, in which case the target is embedded on the fly. Optional
   outputs: alignment matrix CSV and per-node CSV
   (query_node,best_target_node,violation,match[,vote]). */
OM_API om_status om_query(const om_model* model, const om_graphs* targets, size_t target, const om_index* index,
                          const om_graphs* queries, size_t query, const om_query_options* options,
                          om_query_result* result, char** alignment_csv_out, char** per_node_csv_out);

/* Runs the bench.* configuration. targets may be NULL (extended Barabasi-Albert
   graphs of bench.target_nodes nodes are generated); model may be NULL when
   only the exact method is requested. */
OM_API om_status om_bench(const om_config* cfg, const om_model* model, const om_graphs* targets, char** csv_out,
                          char** summary_json_out);

/* Runs the built-in oracle, geometry and gradient checks. *failed receives the
   number of failing checks; the report has one line per check. */
OM_API om_status om_selftest(uint64_t seed, int* failed, char** report_out);

/* Writes `contents` to path via a temporary file and rename. */
OM_API om_status om_write_file_atomic(const char* path, const char* contents);

#ifdef __cplusplus
}
#endif

#endif
