#pragma once

#include <cstdint>
#include <string>

#include "ordermatch/encoder.hpp"
#include "ordermatch/order_embed.hpp"

namespace om {

// A trained matcher: encoder weights plus every calibrated decision constant.
struct Model {
  EncoderConfig encoder;
  EncoderParams params;
  MarginConfig margin;
  int radius = 4;                // hop radius of target neighborhoods
  double decision_cutoff = 0.5;  // cutoff on the mean-indicator alignment score

  void validate() const;
  // Hash of config, constants and exact parameter bits.
  std::uint64_t fingerprint() const;
  // Hash of what determines embeddings only (encoder, radius, parameters), so
  // recalibrating thresholds does not invalidate embedding indexes.
  std::uint64_t embedding_fingerprint() const;
};

Model init_model(const EncoderConfig& encoder, const MarginConfig& margin, int radius, std::uint64_t seed);

std::string model_to_json(const Model& m);
Model model_from_json(const std::string& text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace om
