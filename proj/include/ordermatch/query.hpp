#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ordermatch/autodiff.hpp"
#include "ordermatch/graph.hpp"
#include "ordermatch/model.hpp"

namespace om {

// Precomputed embeddings of every node's k-hop neighbourhood in one graph.
struct EmbeddingIndex {
  std::uint64_t graph_fingerprint = 0;
  std::uint64_t model_fingerprint = 0;  // Model::embedding_fingerprint()
  int radius = 0;
  Tensor embeddings;  // node_count x D

  std::size_t size() const noexcept { return embeddings.rows(); }
  std::span<const double> at(NodeId v) const { return embeddings.row(v); }
};

EmbeddingIndex build_index(const LabeledGraph& g, const Model& model, std::size_t workers = 1);

// Binary layout: magic "OMINDEX1", u32 version, u64 graph fp, u64 model fp,
// i32 radius, u64 rows, u64 cols, rows*cols little-endian doubles.
std::string index_to_bytes(const EmbeddingIndex& index);
EmbeddingIndex index_from_bytes(std::string_view bytes);
void save_index(const EmbeddingIndex& index, const std::string& path);
EmbeddingIndex load_index(const std::string& path);
// Loads and checks that the index was built from `g` with `model`'s encoder.
EmbeddingIndex load_index(const std::string& path, const LabeledGraph& g, const Model& model);
// Throws FingerprintMismatch when the index does not belong to (g, model).
void check_index(const EmbeddingIndex& index, const LabeledGraph& g, const Model& model);

struct PairDecision {
  bool subgraph = false;
  double violation = 0.0;
};

PairDecision match_neighborhoods(std::span<const double> zq, std::span<const double> zu, const MarginConfig& cfg);

struct AlignmentMatrix {
  Tensor violations;  // |V_T| x |V_Q|
  std::uint64_t score_evaluations = 0;

  std::size_t target_nodes() const noexcept { return violations.rows(); }
  std::size_t query_nodes() const noexcept { return violations.cols(); }
};

AlignmentMatrix alignment(const EmbeddingIndex& query, const EmbeddingIndex& target, std::size_t workers = 1);
// Embeds the query's own neighbourhoods first. The query must be connected.
AlignmentMatrix alignment(const LabeledGraph& query, const EmbeddingIndex& target, const Model& model,
                          std::size_t workers = 1);

// Long format: target_node,query_node,violation
std::string alignment_csv(const AlignmentMatrix& m);

// Nodes grouped by exact hop distance from v, up to max_hop.
std::vector<std::vector<NodeId>> hop_layers(const LabeledGraph& g, NodeId v, int max_hop);

// Neighbour-consistency check for the pair (q, u). Rejects as soon as some
// query node i within k hops of q (k = 0..K) has no target node j within k hops
// of u with E(z_i, z_j) < t. K = 0 is the plain threshold rule.
bool vote(const EmbeddingIndex& query, std::span<const std::vector<NodeId>> q_layers, const EmbeddingIndex& target,
          std::span<const std::vector<NodeId>> u_layers, int K, double threshold);
bool vote(const LabeledGraph& query, const EmbeddingIndex& query_index, NodeId q, const LabeledGraph& target,
          const EmbeddingIndex& target_index, NodeId u, int K, double threshold);

// vote() for every (u, q); row-major like AlignmentMatrix, 1 = accepted.
std::vector<std::uint8_t> vote_matrix(const LabeledGraph& query, const EmbeddingIndex& query_index,
                                      const LabeledGraph& target, const EmbeddingIndex& target_index, int K,
                                      double threshold, std::size_t workers = 1);

struct QueryDecision {
  double score = 0.0;           // mean of the 0/1 indicator over all entries
  double mean_violation = 0.0;  // mean raw violation, for ranking
  bool subgraph = false;        // score >= cutoff
};

QueryDecision decide(const AlignmentMatrix& m, double threshold, double cutoff);
// Same, with the indicator replaced by the vote outcome.
QueryDecision decide(const AlignmentMatrix& m, std::span<const std::uint8_t> votes, double cutoff);

// Cutoff on decision scores maximising balanced accuracy of score >= cutoff.
// Candidates are the distinct observed scores; the smallest best one wins.
double calibrate_cutoff(std::span<const double> scores, std::span<const bool> labels);

}  // namespace om
