#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ordermatch/autodiff.hpp"
#include "ordermatch/datasets.hpp"
#include "ordermatch/model.hpp"
#include "ordermatch/sampling.hpp"

namespace om {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
};

// One bias-corrected Adam update in place. Moments are created on first use.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state, double lr,
               const AdamConfig& cfg = {});

// base_lr * (1 + cos(pi * (epoch mod period) / period)) / 2
double cosine_lr(int epoch, double base_lr, int restart_period);

struct CurriculumConfig {
  int patience = 20;            // stale epochs before advancing
  double plateau_delta = 0.1;   // required gain, in metric units
  int max_radius = 4;
  std::size_t max_target_count = 256;
};

struct CurriculumState {
  int radius = 1;
  std::size_t target_count = 1;
  int epochs_since_improvement = 0;
  double best_metric = -1e300;

  friend bool operator==(const CurriculumState&, const CurriculumState&) = default;
};

// Feeds one epoch's metric (validation AUROC in percentage points). After
// `patience` stale epochs the radius grows, then the target count doubles;
// advancing resets the stale counter and the baseline metric.
CurriculumState curriculum_update(CurriculumState state, double metric, const CurriculumConfig& cfg);

struct TrainConfig {
  double learning_rate = 1e-3;
  AdamConfig adam;
  int restart_period = 100;
  CurriculumConfig curriculum;
  bool use_curriculum = true;  // false: start at max radius and max target count
  int negatives_per_positive = 3;
  double hard_negative_fraction = 0.1;
  double same_target_fraction = 0.5;  // share of the non-hard negatives
  int regeneration_period = 50;
  int min_iterations = 64;
  std::size_t batch_min = 16;
  std::size_t batch_max = 64;
  int epochs = 200;
  std::size_t validation_pairs = 512;
  PairSamplerConfig pairs;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

// Batch size at a curriculum state: batch_min * target_count, clamped to batch_max.
std::size_t batch_size_for(const CurriculumState& state, const TrainConfig& cfg);

struct NegativeMix {
  std::size_t hard = 0;
  std::size_t same_target = 0;
  std::size_t cross_target = 0;
};

// Kinds for `negatives` negatives; cross-target folds into same-target when
// only one target graph is available.
NegativeMix negative_mix(std::size_t negatives, std::size_t target_graphs, const TrainConfig& cfg);

using Batch = std::vector<TrainingPair>;

// Iterates over the target graphs sampling one positive per target (cycling
// until every iteration is full) plus negatives at the configured ratio. Pairs
// whose sampling keeps failing are dropped. Deterministic in seed.
std::vector<Batch> build_epoch_batches(std::span<const LabeledGraph> targets, const CurriculumState& state,
                                       const TrainConfig& cfg, std::uint64_t seed);

// `count` oracle-labelled pairs, half positive, at a fixed radius. Negative
// kinds follow the configured mix. Deterministic in seed.
std::vector<TrainingPair> sample_balanced_pairs(std::span<const LabeledGraph> graphs, int radius, std::size_t count,
                                                const TrainConfig& cfg, std::uint64_t seed);

// Violation E(z_query, z_target) for each pair.
std::vector<double> pair_violations(const Model& model, std::span<const TrainingPair> pairs, std::size_t workers);

// AUROC of -violation against pair labels.
double pair_auroc(const Model& model, std::span<const TrainingPair> pairs, std::size_t workers);

// Summed margin loss and its gradient over a batch. Work is split into fixed
// chunks whose gradients are added in order, so results do not depend on the
// worker count.
double batch_loss_and_grad(const Model& model, std::span<const TrainingPair> batch, std::vector<Tensor>& grads,
                           std::size_t workers);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // mean per-pair loss
  double val_auroc = 0.0;
  int radius = 0;
  std::size_t target_count = 0;
  double lr = 0.0;
};

std::string history_csv(std::span<const EpochRecord> history);

// Supplies the target graphs for one regeneration.
using GraphSource = std::function<std::vector<LabeledGraph>(std::size_t count, std::uint64_t seed)>;

GraphSource synthetic_source(const SyntheticConfig& cfg);
// Draws `count` graphs from a fixed pool without replacement (with, once exhausted).
GraphSource pool_source(std::vector<LabeledGraph> pool);

struct TrainResult {
  Model model;  // best-validation parameters with a calibrated threshold
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_val_auroc = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(Model model, const TrainConfig& cfg, const GraphSource& source,
                  std::span<const LabeledGraph> validation_graphs, const EpochCallback& on_epoch = {});

}  // namespace om
