#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ordermatch/autodiff.hpp"
#include "ordermatch/graph.hpp"
#include "ordermatch/order_embed.hpp"
#include "ordermatch/util.hpp"

namespace om {

struct EncoderConfig {
  std::size_t layers = 8;
  std::size_t hidden_dim = 64;
  std::size_t output_dim = 64;
  double leaky_slope = 0.01;
  // Fixed positive factor on each layer's neighbourhood sum. Keeps activations
  // from growing geometrically with depth; 1 gives plain GIN.
  double aggregation_scale = 0.25;
  bool use_structural_features = false;
  std::size_t label_alphabet_size = 1;
  bool nonneg_output = true;
  // Per-edge-label message weights; off by default.
  bool edge_label_messages = false;
  std::size_t edge_label_alphabet_size = 1;

  void validate() const;
  // anchor flag + label one-hot + optional (degree, clustering)
  std::size_t input_dim() const noexcept;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct ParameterSpec {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Names and shapes of every parameter tensor, in storage order.
std::vector<ParameterSpec> parameter_manifest(const EncoderConfig& cfg);

struct EncoderParams {
  std::vector<Tensor> tensors;  // parallel to parameter_manifest(cfg)

  // Glorot-uniform weights, zero biases, except the final head bias at +0.1.
  static EncoderParams init(const EncoderConfig& cfg, Rng& rng);
  // Throws when count or shapes disagree with the manifest, or values are non-finite.
  void check(const EncoderConfig& cfg) const;
  std::size_t scalar_count() const noexcept;
};

// One row per node: [anchor indicator] + one-hot(label) + optional [degree, clustering].
Tensor build_input_features(const AnchoredNeighborhood& n, const EncoderConfig& cfg);

// One round of GIN sum aggregation with eps = 0: row v becomes h[v] + sum of h over neighbors.
Tensor gin_sum_aggregate(const LabeledGraph& g, const Tensor& h);

// Records the encoder on the tape for a batch of neighborhoods; returns B x D.
// params must be the tape variables of EncoderParams::tensors, in order.
Var encode_batch(Tape& tape, std::span<const Var> params, std::span<const AnchoredNeighborhood* const> batch,
                 const EncoderConfig& cfg);

// Inference: B x D embeddings. Each row depends only on its own neighborhood,
// bit-for-bit, whatever else shares the batch.
Tensor encode_batch(const EncoderParams& params, std::span<const AnchoredNeighborhood* const> batch,
                    const EncoderConfig& cfg);

Embedding encode(const AnchoredNeighborhood& n, const EncoderParams& params, const EncoderConfig& cfg);

// Embedding of every node's k-hop neighborhood; row u belongs to node u.
Tensor encode_all(const LabeledGraph& g, int k, const EncoderParams& params, const EncoderConfig& cfg,
                  std::size_t workers = 1);

}  // namespace om
