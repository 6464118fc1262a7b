#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ordermatch/autodiff.hpp"

namespace om {

using Embedding = std::vector<double>;

struct MarginConfig {
  double margin = 1.0;     // alpha: required violation on negatives
  double threshold = 0.5;  // t: predict subgraph iff violation < t

  void validate() const;
};

// Sum over i of max(0, zq[i] - zu[i])^2. Zero exactly when zq <= zu elementwise.
double violation(std::span<const double> zq, std::span<const double> zu);

bool predict_subgraph(std::span<const double> zq, std::span<const double> zu, const MarginConfig& cfg);

// Elementwise minimum; the greatest lower bound of its inputs.
Embedding intersection(std::span<const double> a, std::span<const double> b);

struct EmbeddingPair {
  std::span<const double> zq;
  std::span<const double> zu;
  bool positive = false;
};

// Summed (not averaged) max-margin loss: positives pay E, negatives pay max(0, margin - E).
double margin_loss(std::span<const EmbeddingPair> batch, const MarginConfig& cfg);

// Same loss on the tape. zq and zu are B x D; positive has B entries.
Var margin_loss(Tape& tape, Var zq, Var zu, std::span<const bool> positive, const MarginConfig& cfg);

struct ThresholdChoice {
  double threshold = 0.0;
  double balanced_accuracy = 0.0;
};

// Sweeps t over margin * i / (candidates + 1), i = 1..candidates, and keeps the
// first t with the best balanced accuracy of the rule violation < t.
ThresholdChoice calibrate_threshold(std::span<const double> violations, std::span<const bool> positive,
                                    double margin, int candidates = 100);

}  // namespace om
