#include "ordermatch/encoder.hpp"

#include <cmath>

#include "ordermatch/error.hpp"

namespace om {

namespace {

constexpr std::size_t kEncodeChunk = 64;
constexpr double kHeadBiasInit = 0.1;

// Node-level index structures for a disjoint union of neighborhoods.
struct BatchLayout {
  std::size_t nodes = 0;
  std::vector<std::uint32_t> agg_src;    // self + neighbors per node
  std::vector<std::uint32_t> agg_group;  // destination node for each agg_src entry
  std::vector<std::vector<std::uint32_t>> edge_src;  // per edge label
  std::vector<std::vector<std::uint32_t>> edge_group;
  std::vector<std::uint32_t> anchors;
};

BatchLayout layout_of(std::span<const AnchoredNeighborhood* const> batch, const EncoderConfig& cfg) {
  BatchLayout out;
  if (cfg.edge_label_messages) {
    out.edge_src.resize(cfg.edge_label_alphabet_size);
    out.edge_group.resize(cfg.edge_label_alphabet_size);
  }
  std::uint32_t offset = 0;
  for (const AnchoredNeighborhood* n : batch) {
    const LabeledGraph& g = n->graph;
    if (n->anchor >= g.node_count()) throw InvalidArgument("encoder: anchor outside its neighborhood");
    for (NodeId v = 0; v < g.node_count(); ++v) {
      const std::uint32_t dst = offset + v;
      out.agg_src.push_back(dst);
      out.agg_group.push_back(dst);
      const auto nbrs = g.neighbors(v);
      const auto elabels = g.neighbor_edge_labels(v);
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        out.agg_src.push_back(offset + nbrs[i]);
        out.agg_group.push_back(dst);
        if (cfg.edge_label_messages) {
          const Label e = elabels.empty() ? 0 : elabels[i];
          if (e >= cfg.edge_label_alphabet_size) {
            throw InvalidArgument("encoder: edge label " + std::to_string(e) + " outside alphabet of size " +
                                  std::to_string(cfg.edge_label_alphabet_size));
          }
          out.edge_src[e].push_back(offset + nbrs[i]);
          out.edge_group[e].push_back(dst);
        }
      }
    }
    out.anchors.push_back(offset + n->anchor);
    offset += static_cast<std::uint32_t>(g.node_count());
  }
  out.nodes = offset;
  return out;
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

void EncoderConfig::validate() const {
  if (layers < 1) throw ConfigError("encoder layers must be >= 1");
  if (hidden_dim < 1) throw ConfigError("encoder hidden_dim must be >= 1");
  if (output_dim < 1) throw ConfigError("encoder output_dim must be >= 1");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("encoder leaky_slope must lie in (0, 1)");
  if (!(aggregation_scale > 0.0 && std::isfinite(aggregation_scale))) {
    throw ConfigError("encoder aggregation_scale must be positive");
  }
  if (label_alphabet_size < 1) throw ConfigError("encoder label_alphabet_size must be >= 1");
  if (!nonneg_output) throw ConfigError("encoder nonneg_output is fixed to true");
  if (edge_label_messages && edge_label_alphabet_size < 1) {
    throw ConfigError("encoder edge_label_alphabet_size must be >= 1");
  }
}

std::size_t EncoderConfig::input_dim() const noexcept {
  return 1 + label_alphabet_size + (use_structural_features ? 2 : 0);
}

std::vector<ParameterSpec> parameter_manifest(const EncoderConfig& cfg) {
  cfg.validate();
  const std::size_t h = cfg.hidden_dim;
  std::vector<ParameterSpec> m;
  m.push_back({"input.weight", cfg.input_dim(), h});
  m.push_back({"input.bias", 1, h});
  for (std::size_t l = 1; l <= cfg.layers; ++l) {
    const std::size_t in = l == 1 ? h : 2 * h;
    const std::string p = "layer" + std::to_string(l) + ".";
    m.push_back({p + "mlp1.weight", in, h});
    m.push_back({p + "mlp1.bias", 1, h});
    m.push_back({p + "mlp2.weight", h, h});
    m.push_back({p + "mlp2.bias", 1, h});
    if (cfg.edge_label_messages) {
      for (std::size_t e = 0; e < cfg.edge_label_alphabet_size; ++e) {
        m.push_back({p + "edge" + std::to_string(e) + ".weight", in, in});
      }
    }
  }
  m.push_back({"head1.weight", 2 * h, h});
  m.push_back({"head1.bias", 1, h});
  m.push_back({"head2.weight", h, cfg.output_dim});
  m.push_back({"head2.bias", 1, cfg.output_dim});
  return m;
}

EncoderParams EncoderParams::init(const EncoderConfig& cfg, Rng& rng) {
  EncoderParams p;
  const auto manifest = parameter_manifest(cfg);
  for (const auto& spec : manifest) {
    Tensor t(spec.rows, spec.cols);
    if (spec.name.ends_with(".weight")) {
      std::uniform_real_distribution<double> u(-glorot_bound(spec.rows, spec.cols), glorot_bound(spec.rows, spec.cols));
      for (double& v : t.values()) v = u(rng);
    } else if (spec.name == "head2.bias") {
      t.fill(kHeadBiasInit);
    }
    p.tensors.push_back(std::move(t));
  }
  return p;
}

void EncoderParams::check(const EncoderConfig& cfg) const {
  const auto manifest = parameter_manifest(cfg);
  if (manifest.size() != tensors.size()) {
    throw InvalidArgument("encoder params: expected " + std::to_string(manifest.size()) + " tensors, got " +
                          std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (tensors[i].rows() != manifest[i].rows || tensors[i].cols() != manifest[i].cols) {
      throw InvalidArgument("encoder params: " + manifest[i].name + " has shape " +
                            std::to_string(tensors[i].rows()) + "x" + std::to_string(tensors[i].cols()) +
                            ", expected " + std::to_string(manifest[i].rows) + "x" +
                            std::to_string(manifest[i].cols));
    }
    if (!tensors[i].all_finite()) throw InvalidArgument("encoder params: " + manifest[i].name + " is not finite");
  }
}

std::size_t EncoderParams::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

Tensor build_input_features(const AnchoredNeighborhood& n, const EncoderConfig& cfg) {
  const LabeledGraph& g = n.graph;
  if (n.anchor >= g.node_count()) throw InvalidArgument("encoder: anchor outside its neighborhood");
  Tensor x(g.node_count(), cfg.input_dim());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const Label l = g.label(v);
    if (l >= cfg.label_alphabet_size) {
      throw InvalidArgument("node label " + std::to_string(l) + " is outside the model's label alphabet of size " +
                            std::to_string(cfg.label_alphabet_size));
    }
    x(v, 0) = v == n.anchor ? 1.0 : 0.0;
    x(v, 1 + l) = 1.0;
    if (cfg.use_structural_features) {
      const auto f = structural_features(g, v);
      x(v, 1 + cfg.label_alphabet_size) = static_cast<double>(f.degree);
      x(v, 2 + cfg.label_alphabet_size) = f.clustering;
    }
  }
  return x;
}

Tensor gin_sum_aggregate(const LabeledGraph& g, const Tensor& h) {
  if (h.rows() != g.node_count()) throw InvalidArgument("gin_sum_aggregate: one row per node required");
  AnchoredNeighborhood n;
  n.graph = g;
  const AnchoredNeighborhood* one[] = {&n};
  EncoderConfig cfg;
  const auto layout = layout_of(one, cfg);
  Tape tape;
  const Var v = tape.row_sum_aggregate(tape.gather_rows(tape.constant(h), layout.agg_src), layout.agg_group, layout.nodes);
  return tape.value(v);
}

Var encode_batch(Tape& tape, std::span<const Var> params, std::span<const AnchoredNeighborhood* const> batch,
                 const EncoderConfig& cfg) {
  const auto manifest = parameter_manifest(cfg);
  if (params.size() != manifest.size()) throw InvalidArgument("encoder: parameter count mismatch");
  if (batch.empty()) throw InvalidArgument("encoder: empty batch");
  const auto layout = layout_of(batch, cfg);

  Tensor features(layout.nodes, cfg.input_dim());
  {
    std::size_t row = 0;
    for (const AnchoredNeighborhood* n : batch) {
      const Tensor x = build_input_features(*n, cfg);
      std::copy(x.values().begin(), x.values().end(), features.values().begin() + static_cast<std::ptrdiff_t>(row * x.cols()));
      row += x.rows();
    }
  }

  std::size_t next = 0;
  auto take = [&]() { return params[next++]; };
  const double slope = cfg.leaky_slope;
  auto linear = [&](Var x, Var w, Var b) { return tape.add_bias(tape.matmul(x, w), b); };

  const Var w_in = take(), b_in = take();
  std::vector<Var> xs;
  xs.push_back(tape.leaky_relu(linear(tape.constant(std::move(features)), w_in, b_in), slope));
  for (std::size_t l = 1; l <= cfg.layers; ++l) {
    const Var in = l == 1 ? xs[0] : tape.concat(xs[l - 2], xs[l - 1]);
    Var agg = tape.row_sum_aggregate(tape.gather_rows(in, layout.agg_src), layout.agg_group, layout.nodes);
    const Var w1 = take(), b1 = take(), w2 = take(), b2 = take();
    if (cfg.edge_label_messages) {
      for (std::size_t e = 0; e < cfg.edge_label_alphabet_size; ++e) {
        const Var we = take();
        if (layout.edge_src[e].empty()) continue;
        const Var m = tape.row_sum_aggregate(tape.gather_rows(in, layout.edge_src[e]), layout.edge_group[e], layout.nodes);
        agg = tape.add(agg, tape.matmul(m, we));
      }
    }
    if (cfg.aggregation_scale != 1.0) agg = tape.scale(agg, cfg.aggregation_scale);
    const Var hidden = tape.leaky_relu(linear(agg, w1, b1), slope);
    xs.push_back(tape.leaky_relu(linear(hidden, w2, b2), slope));
  }
  const std::size_t k = cfg.layers;
  const Var readout = tape.gather_rows(tape.concat(xs[k - 1], xs[k]), layout.anchors);
  const Var hw1 = take(), hb1 = take(), hw2 = take(), hb2 = take();
  const Var head = tape.leaky_relu(linear(readout, hw1, hb1), slope);
  return tape.relu(linear(head, hw2, hb2));
}

Tensor encode_batch(const EncoderParams& params, std::span<const AnchoredNeighborhood* const> batch,
                    const EncoderConfig& cfg) {
  params.check(cfg);
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.tensors.size());
  for (const auto& t : params.tensors) vars.push_back(tape.parameter(t));
  return tape.value(encode_batch(tape, vars, batch, cfg));
}

Embedding encode(const AnchoredNeighborhood& n, const EncoderParams& params, const EncoderConfig& cfg) {
  const AnchoredNeighborhood* one[] = {&n};
  const Tensor z = encode_batch(params, one, cfg);
  return Embedding(z.values().begin(), z.values().end());
}

Tensor encode_all(const LabeledGraph& g, int k, const EncoderParams& params, const EncoderConfig& cfg,
                  std::size_t workers) {
  params.check(cfg);
  const std::size_t n = g.node_count();
  Tensor out(n, cfg.output_dim);
  const std::size_t chunks = (n + kEncodeChunk - 1) / kEncodeChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t lo = c * kEncodeChunk, hi = std::min(n, lo + kEncodeChunk);
    std::vector<AnchoredNeighborhood> hoods;
    hoods.reserve(hi - lo);
    for (std::size_t u = lo; u < hi; ++u) hoods.push_back(k_hop_neighborhood(g, static_cast<NodeId>(u), k));
    std::vector<const AnchoredNeighborhood*> ptrs;
    for (const auto& h : hoods) ptrs.push_back(&h);
    const Tensor z = encode_batch(params, ptrs, cfg);
    for (std::size_t i = 0; i < z.rows(); ++i) std::copy(z.row(i).begin(), z.row(i).end(), out.row(lo + i).begin());
  });
  return out;
}

}  // namespace om
