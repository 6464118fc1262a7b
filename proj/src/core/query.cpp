#include "ordermatch/query.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <limits>

#include "ordermatch/error.hpp"
#include "ordermatch/order_embed.hpp"
#include "ordermatch/util.hpp"

namespace om {

static_assert(std::endian::native == std::endian::little, "index files are written in host order");

namespace {

constexpr char kMagic[8] = {'O', 'M', 'I', 'N', 'D', 'E', 'X', '1'};
constexpr std::uint32_t kIndexVersion = 1;
constexpr std::size_t kRowChunk = 32;

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view b) : bytes_(b) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw ParseError("index file is truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

EmbeddingIndex build_index(const LabeledGraph& g, const Model& model, std::size_t workers) {
  EmbeddingIndex idx;
  idx.graph_fingerprint = fingerprint(g);
  idx.model_fingerprint = model.embedding_fingerprint();
  idx.radius = model.radius;
  idx.embeddings = encode_all(g, model.radius, model.params, model.encoder, workers);
  return idx;
}

std::string index_to_bytes(const EmbeddingIndex& index) {
  std::string out(kMagic, sizeof kMagic);
  put(out, kIndexVersion);
  put(out, index.graph_fingerprint);
  put(out, index.model_fingerprint);
  put(out, static_cast<std::int32_t>(index.radius));
  put(out, static_cast<std::uint64_t>(index.embeddings.rows()));
  put(out, static_cast<std::uint64_t>(index.embeddings.cols()));
  for (double v : index.embeddings.values()) put(out, v);
  return out;
}

EmbeddingIndex index_from_bytes(std::string_view bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("not an embedding index file");
  }
  Reader r(bytes.substr(sizeof kMagic));
  const auto version = r.get<std::uint32_t>();
  if (version != kIndexVersion) throw ParseError("unsupported index version " + std::to_string(version));
  EmbeddingIndex idx;
  idx.graph_fingerprint = r.get<std::uint64_t>();
  idx.model_fingerprint = r.get<std::uint64_t>();
  idx.radius = r.get<std::int32_t>();
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  if (cols == 0 || rows > r.remaining() / sizeof(double) / cols || r.remaining() != rows * cols * sizeof(double)) {
    throw ParseError("index payload does not match its declared shape");
  }
  idx.embeddings = Tensor(rows, cols);
  for (double& v : idx.embeddings.values()) v = r.get<double>();
  if (!idx.embeddings.all_finite()) throw ParseError("index contains non-finite values");
  return idx;
}

void save_index(const EmbeddingIndex& index, const std::string& path) { write_file_atomic(path, index_to_bytes(index)); }

EmbeddingIndex load_index(const std::string& path) { return index_from_bytes(read_file(path)); }

EmbeddingIndex load_index(const std::string& path, const LabeledGraph& g, const Model& model) {
  auto idx = load_index(path);
  check_index(idx, g, model);
  return idx;
}

void check_index(const EmbeddingIndex& index, const LabeledGraph& g, const Model& model) {
  if (index.graph_fingerprint != fingerprint(g)) {
    throw FingerprintMismatch("index was built for graph " + hex64(index.graph_fingerprint) + ", not " +
                              hex64(fingerprint(g)));
  }
  if (index.model_fingerprint != model.embedding_fingerprint() || index.radius != model.radius) {
    throw FingerprintMismatch("index was built with model " + hex64(index.model_fingerprint) + ", not " +
                              hex64(model.embedding_fingerprint()));
  }
  if (index.size() != g.node_count()) throw FingerprintMismatch("index row count differs from the graph");
}

PairDecision match_neighborhoods(std::span<const double> zq, std::span<const double> zu, const MarginConfig& cfg) {
  const double e = violation(zq, zu);
  return {e < cfg.threshold, e};
}

AlignmentMatrix alignment(const EmbeddingIndex& query, const EmbeddingIndex& target, std::size_t workers) {
  if (query.embeddings.cols() != target.embeddings.cols()) {
    throw InvalidArgument("alignment: query and target embeddings differ in dimension");
  }
  if (query.model_fingerprint != target.model_fingerprint) {
    throw FingerprintMismatch("alignment: query and target were embedded by different models");
  }
  AlignmentMatrix m;
  m.violations = Tensor(target.size(), query.size());
  std::atomic<std::uint64_t> evaluations{0};
  const std::size_t chunks = (target.size() + kRowChunk - 1) / kRowChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(target.size(), (c + 1) * kRowChunk);
    std::uint64_t done = 0;
    for (std::size_t u = c * kRowChunk; u < end; ++u) {
      const auto zu = target.at(static_cast<NodeId>(u));
      auto row = m.violations.row(u);
      for (std::size_t q = 0; q < query.size(); ++q) {
        row[q] = violation(query.at(static_cast<NodeId>(q)), zu);
        ++done;
      }
    }
    evaluations += done;
  });
  m.score_evaluations = evaluations.load();
  return m;
}

AlignmentMatrix alignment(const LabeledGraph& query, const EmbeddingIndex& target, const Model& model,
                          std::size_t workers) {
  if (query.node_count() == 0 || !is_connected(query)) throw InvalidArgument("alignment: query must be connected");
  if (target.model_fingerprint != model.embedding_fingerprint()) {
    throw FingerprintMismatch("alignment: target index was built with a different model");
  }
  return alignment(build_index(query, model, workers), target, workers);
}

std::string alignment_csv(const AlignmentMatrix& m) {
  std::string out = "target_node,query_node,violation\n";
  char line[96];
  for (std::size_t u = 0; u < m.target_nodes(); ++u) {
    for (std::size_t q = 0; q < m.query_nodes(); ++q) {
      std::snprintf(line, sizeof line, "%zu,%zu,%.17g\n", u, q, m.violations(u, q));
      out += line;
    }
  }
  return out;
}

std::vector<std::vector<NodeId>> hop_layers(const LabeledGraph& g, NodeId v, int max_hop) {
  if (max_hop < 0) throw InvalidArgument("hop_layers: negative hop count");
  const auto dist = bfs_distances(g, v, max_hop);
  std::vector<std::vector<NodeId>> layers(static_cast<std::size_t>(max_hop) + 1);
  for (NodeId w = 0; w < dist.size(); ++w) {
    if (dist[w] >= 0 && dist[w] <= max_hop) layers[static_cast<std::size_t>(dist[w])].push_back(w);
  }
  while (layers.size() > 1 && layers.back().empty()) layers.pop_back();
  return layers;
}

bool vote(const EmbeddingIndex& query, std::span<const std::vector<NodeId>> q_layers, const EmbeddingIndex& target,
          std::span<const std::vector<NodeId>> u_layers, int K, double threshold) {
  if (K < 0) throw InvalidArgument("vote: K must be >= 0");
  if (q_layers.empty() || u_layers.empty()) throw InvalidArgument("vote: empty hop layers");
  // The check for a query node at hop h is strictest at k = h, where the
  // candidate set in the target is smallest; larger k only adds candidates.
  std::vector<NodeId> candidates;
  for (std::size_t h = 0; h <= static_cast<std::size_t>(K) && h < q_layers.size(); ++h) {
    if (h < u_layers.size()) candidates.insert(candidates.end(), u_layers[h].begin(), u_layers[h].end());
    for (NodeId i : q_layers[h]) {
      const auto zi = query.at(i);
      const bool covered = std::any_of(candidates.begin(), candidates.end(),
                                       [&](NodeId j) { return violation(zi, target.at(j)) < threshold; });
      if (!covered) return false;
    }
  }
  return true;
}

bool vote(const LabeledGraph& query, const EmbeddingIndex& query_index, NodeId q, const LabeledGraph& target,
          const EmbeddingIndex& target_index, NodeId u, int K, double threshold) {
  const auto ql = hop_layers(query, q, K);
  const auto ul = hop_layers(target, u, K);
  return vote(query_index, ql, target_index, ul, K, threshold);
}

std::vector<std::uint8_t> vote_matrix(const LabeledGraph& query, const EmbeddingIndex& query_index,
                                      const LabeledGraph& target, const EmbeddingIndex& target_index, int K,
                                      double threshold, std::size_t workers) {
  std::vector<std::vector<std::vector<NodeId>>> ql(query.node_count()), ul(target.node_count());
  for (NodeId q = 0; q < query.node_count(); ++q) ql[q] = hop_layers(query, q, K);
  for (NodeId u = 0; u < target.node_count(); ++u) ul[u] = hop_layers(target, u, K);
  std::vector<std::uint8_t> out(target.node_count() * query.node_count());
  parallel_for(target.node_count(), workers, [&](std::size_t u) {
    for (std::size_t q = 0; q < query.node_count(); ++q) {
      out[u * query.node_count() + q] = vote(query_index, ql[q], target_index, ul[u], K, threshold) ? 1 : 0;
    }
  });
  return out;
}

namespace {

QueryDecision finish(const AlignmentMatrix& m, std::size_t accepted, double cutoff) {
  QueryDecision d;
  const auto n = static_cast<double>(m.violations.size());
  if (n == 0) throw InvalidArgument("decide: empty alignment matrix");
  double sum = 0.0;
  for (double v : m.violations.values()) sum += v;
  d.score = static_cast<double>(accepted) / n;
  d.mean_violation = sum / n;
  d.subgraph = d.score >= cutoff;
  return d;
}

}  // namespace

QueryDecision decide(const AlignmentMatrix& m, double threshold, double cutoff) {
  const auto v = m.violations.values();
  const auto accepted = static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](double e) { return e < threshold; }));
  return finish(m, accepted, cutoff);
}

QueryDecision decide(const AlignmentMatrix& m, std::span<const std::uint8_t> votes, double cutoff) {
  if (votes.size() != m.violations.size()) throw InvalidArgument("decide: vote matrix shape differs");
  const auto accepted = static_cast<std::size_t>(std::count(votes.begin(), votes.end(), std::uint8_t{1}));
  return finish(m, accepted, cutoff);
}

double calibrate_cutoff(std::span<const double> scores, std::span<const bool> labels) {
  if (scores.size() != labels.size() || scores.empty()) throw InvalidArgument("calibrate_cutoff: bad input sizes");
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const auto neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) throw InvalidArgument("calibrate_cutoff: both classes are required");
  std::vector<double> candidates(scores.begin(), scores.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  double best = candidates.front(), best_acc = -1.0;
  for (double c : candidates) {
    double tp = 0, tn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool yes = scores[i] >= c;
      tp += yes && labels[i];
      tn += !yes && !labels[i];
    }
    const double acc = 0.5 * (tp / pos + tn / neg);
    if (acc > best_acc) {
      best_acc = acc;
      best = c;
    }
  }
  return best;
}

}  // namespace om
