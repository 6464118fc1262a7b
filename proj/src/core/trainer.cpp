#include "ordermatch/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>

#include "ordermatch/error.hpp"
#include "ordermatch/metrics.hpp"
#include "ordermatch/order_embed.hpp"

namespace om {

namespace {

constexpr std::size_t kGradChunk = 16;
constexpr std::size_t kEncodeChunk = 64;
constexpr int kSlotAttempts = 4;

enum : std::uint64_t { kStreamTargets = 0x7a, kStreamBatches = 0xb4, kStreamValidation = 0xc1, kStreamShuffle = 0xd9 };

struct Slot {
  std::size_t target = 0;
  PairKind kind = PairKind::kPositive;
};

std::optional<TrainingPair> fill_slot(std::span<const LabeledGraph> graphs, const Slot& slot, int radius,
                                      const TrainConfig& cfg, std::uint64_t seed) {
  const LabeledGraph& g = graphs[slot.target];
  for (int attempt = 0; attempt < kSlotAttempts; ++attempt) {
    Rng rng = make_rng(derive_seed(seed, attempt));
    std::optional<TrainingPair> pair;
    if (slot.kind == PairKind::kPositive) {
      pair = sample_positive_pair(g, radius, cfg.pairs, rng, slot.target);
    } else if (g.node_count() >= 2) {
      std::size_t source = slot.target;
      if (slot.kind == PairKind::kCrossTargetNegative) {
        source = (slot.target + 1 + rng() % (graphs.size() - 1)) % graphs.size();
      }
      pair = sample_negative_pair(g, radius, slot.kind, cfg.pairs, rng, &graphs[source], slot.target, source);
    }
    if (pair) return pair;
  }
  return std::nullopt;
}

std::vector<std::optional<TrainingPair>> fill_slots(std::span<const LabeledGraph> graphs, std::span<const Slot> slots,
                                                    int radius, const TrainConfig& cfg, std::uint64_t seed) {
  std::vector<std::optional<TrainingPair>> out(slots.size());
  parallel_for(slots.size(), cfg.workers,
               [&](std::size_t i) { out[i] = fill_slot(graphs, slots[i], radius, cfg, derive_seed(seed, i)); });
  return out;
}

void append_negatives(std::vector<Slot>& slots, const NegativeMix& mix, std::span<const std::size_t> targets) {
  std::size_t k = 0;
  auto push = [&](PairKind kind, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i, ++k) slots.push_back({targets[k % targets.size()], kind});
  };
  push(PairKind::kHardNegative, mix.hard);
  push(PairKind::kSameTargetNegative, mix.same_target);
  push(PairKind::kCrossTargetNegative, mix.cross_target);
}

std::vector<const AnchoredNeighborhood*> side(std::span<const TrainingPair> pairs, bool query) {
  std::vector<const AnchoredNeighborhood*> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(query ? &p.query : &p.target);
  return out;
}

}  // namespace

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state, double lr,
               const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw InvalidArgument("adam: parameter and gradient counts differ");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.rows(), p.cols());
      state.v.emplace_back(p.rows(), p.cols());
    }
  }
  if (state.m.size() != params.size()) throw InvalidArgument("adam: state does not match parameters");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size() || params[i].size() != state.m[i].size()) {
      throw InvalidArgument("adam: shape mismatch at tensor " + std::to_string(i));
    }
    auto p = params[i].values();
    auto g = grads[i].values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.epsilon);
    }
  }
}

double cosine_lr(int epoch, double base_lr, int restart_period) {
  if (restart_period < 1) throw InvalidArgument("cosine_lr: restart period must be >= 1");
  const int phase = ((epoch % restart_period) + restart_period) % restart_period;
  return base_lr * (1.0 + std::cos(std::numbers::pi * phase / restart_period)) / 2.0;
}

CurriculumState curriculum_update(CurriculumState state, double metric, const CurriculumConfig& cfg) {
  if (metric > state.best_metric + cfg.plateau_delta) {
    state.best_metric = metric;
    state.epochs_since_improvement = 0;
    return state;
  }
  ++state.epochs_since_improvement;
  if (state.epochs_since_improvement < cfg.patience) return state;
  if (state.radius < cfg.max_radius) {
    ++state.radius;
  } else if (state.target_count < cfg.max_target_count) {
    state.target_count = std::min(cfg.max_target_count, state.target_count * 2);
  } else {
    return state;  // saturated
  }
  state.epochs_since_improvement = 0;
  state.best_metric = -1e300;
  return state;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
  if (restart_period < 1) throw ConfigError("restart_period must be >= 1");
  if (curriculum.patience < 1) throw ConfigError("patience must be >= 1");
  if (!(curriculum.plateau_delta >= 0.0)) throw ConfigError("plateau_delta must be >= 0");
  if (curriculum.max_radius < 1) throw ConfigError("max_radius must be >= 1");
  if (curriculum.max_target_count < 1) throw ConfigError("max_target_count must be >= 1");
  if (negatives_per_positive < 1) throw ConfigError("negatives_per_positive must be >= 1");
  if (!(hard_negative_fraction >= 0.0 && hard_negative_fraction <= 1.0)) {
    throw ConfigError("hard_negative_fraction must lie in [0, 1]");
  }
  if (!(same_target_fraction >= 0.0 && same_target_fraction <= 1.0)) {
    throw ConfigError("same_target_fraction must lie in [0, 1]");
  }
  if (regeneration_period < 1) throw ConfigError("regeneration_period must be >= 1");
  if (min_iterations < 1) throw ConfigError("min_iterations must be >= 1");
  if (batch_min < static_cast<std::size_t>(negatives_per_positive) + 1 || batch_max < batch_min) {
    throw ConfigError("batch sizes need negatives_per_positive + 1 <= batch_min <= batch_max");
  }
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (validation_pairs < 2) throw ConfigError("validation_pairs must be >= 2");
  pairs.validate();
}

std::size_t batch_size_for(const CurriculumState& state, const TrainConfig& cfg) {
  const std::size_t scaled = cfg.batch_min * std::max<std::size_t>(1, state.target_count);
  return std::clamp(scaled, cfg.batch_min, cfg.batch_max);
}

NegativeMix negative_mix(std::size_t negatives, std::size_t target_graphs, const TrainConfig& cfg) {
  NegativeMix mix;
  mix.hard = static_cast<std::size_t>(std::llround(static_cast<double>(negatives) * cfg.hard_negative_fraction));
  mix.hard = std::min(mix.hard, negatives);
  const std::size_t rest = negatives - mix.hard;
  mix.same_target = static_cast<std::size_t>(std::llround(static_cast<double>(rest) * cfg.same_target_fraction));
  mix.same_target = std::min(mix.same_target, rest);
  mix.cross_target = rest - mix.same_target;
  if (target_graphs < 2) {
    mix.same_target += mix.cross_target;
    mix.cross_target = 0;
  }
  return mix;
}

std::vector<Batch> build_epoch_batches(std::span<const LabeledGraph> targets, const CurriculumState& state,
                                       const TrainConfig& cfg, std::uint64_t seed) {
  if (targets.empty()) throw InvalidArgument("build_epoch_batches: empty target pool");
  const std::size_t ratio = static_cast<std::size_t>(cfg.negatives_per_positive);
  const std::size_t batch = batch_size_for(state, cfg);
  const std::size_t positives = std::max<std::size_t>(1, batch / (ratio + 1));
  const NegativeMix mix = negative_mix(positives * ratio, targets.size(), cfg);
  const std::size_t iterations =
      std::max<std::size_t>(static_cast<std::size_t>(cfg.min_iterations), (targets.size() + positives - 1) / positives);

  std::vector<Slot> slots;
  std::vector<std::size_t> batch_start;
  std::size_t next_target = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    batch_start.push_back(slots.size());
    std::vector<std::size_t> used;
    for (std::size_t p = 0; p < positives; ++p) {
      used.push_back(next_target);
      slots.push_back({next_target, PairKind::kPositive});
      next_target = (next_target + 1) % targets.size();
    }
    append_negatives(slots, mix, used);
  }
  batch_start.push_back(slots.size());

  const auto filled = fill_slots(targets, slots, state.radius, cfg, seed);
  std::vector<Batch> out;
  for (std::size_t it = 0; it < iterations; ++it) {
    Batch b;
    for (std::size_t i = batch_start[it]; i < batch_start[it + 1]; ++i) {
      if (filled[i]) b.push_back(*filled[i]);
    }
    if (!b.empty()) out.push_back(std::move(b));
  }
  return out;
}

std::vector<TrainingPair> sample_balanced_pairs(std::span<const LabeledGraph> graphs, int radius, std::size_t count,
                                                const TrainConfig& cfg, std::uint64_t seed) {
  if (graphs.empty()) throw InvalidArgument("sample_balanced_pairs: no graphs");
  const std::size_t positives = count / 2;
  const NegativeMix mix = negative_mix(count - positives, graphs.size(), cfg);
  std::vector<Slot> slots;
  Rng rng = make_rng(seed);
  auto pick = [&]() { return static_cast<std::size_t>(rng() % graphs.size()); };
  for (std::size_t i = 0; i < positives; ++i) slots.push_back({pick(), PairKind::kPositive});
  auto push = [&](PairKind kind, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) slots.push_back({pick(), kind});
  };
  push(PairKind::kHardNegative, mix.hard);
  push(PairKind::kSameTargetNegative, mix.same_target);
  push(PairKind::kCrossTargetNegative, mix.cross_target);
  const auto filled = fill_slots(graphs, slots, radius, cfg, derive_seed(seed, 1));
  std::vector<TrainingPair> out;
  for (const auto& p : filled) {
    if (p) out.push_back(*p);
  }
  return out;
}

std::vector<double> pair_violations(const Model& model, std::span<const TrainingPair> pairs, std::size_t workers) {
  std::vector<double> out(pairs.size());
  const std::size_t chunks = (pairs.size() + kEncodeChunk - 1) / kEncodeChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const auto part = pairs.subspan(c * kEncodeChunk, std::min(kEncodeChunk, pairs.size() - c * kEncodeChunk));
    const Tensor zq = encode_batch(model.params, side(part, true), model.encoder);
    const Tensor zu = encode_batch(model.params, side(part, false), model.encoder);
    for (std::size_t i = 0; i < part.size(); ++i) out[c * kEncodeChunk + i] = violation(zq.row(i), zu.row(i));
  });
  return out;
}

double pair_auroc(const Model& model, std::span<const TrainingPair> pairs, std::size_t workers) {
  const auto v = pair_violations(model, pairs, workers);
  std::vector<double> scores(v.size());
  std::unique_ptr<bool[]> labels(new bool[pairs.size()]);
  for (std::size_t i = 0; i < v.size(); ++i) {
    scores[i] = -v[i];
    labels[i] = pairs[i].positive;
  }
  return auroc(scores, std::span<const bool>(labels.get(), pairs.size()));
}

double batch_loss_and_grad(const Model& model, std::span<const TrainingPair> batch, std::vector<Tensor>& grads,
                           std::size_t workers) {
  if (batch.empty()) throw InvalidArgument("batch_loss_and_grad: empty batch");
  const std::size_t chunks = (batch.size() + kGradChunk - 1) / kGradChunk;
  std::vector<std::vector<Tensor>> chunk_grads(chunks);
  std::vector<double> chunk_loss(chunks, 0.0);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const auto part = batch.subspan(c * kGradChunk, std::min(kGradChunk, batch.size() - c * kGradChunk));
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : model.params.tensors) vars.push_back(tape.parameter(t));
    const Var zq = encode_batch(tape, vars, side(part, true), model.encoder);
    const Var zu = encode_batch(tape, vars, side(part, false), model.encoder);
    std::unique_ptr<bool[]> labels(new bool[part.size()]);
    for (std::size_t i = 0; i < part.size(); ++i) labels[i] = part[i].positive;
    const Var loss = margin_loss(tape, zq, zu, std::span<const bool>(labels.get(), part.size()), model.margin);
    tape.backward(loss);
    chunk_loss[c] = tape.value(loss).item();
    for (Var v : vars) chunk_grads[c].push_back(tape.grad(v));
  });
  grads.clear();
  for (const auto& t : model.params.tensors) grads.emplace_back(t.rows(), t.cols());
  double loss = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    loss += chunk_loss[c];
    for (std::size_t i = 0; i < grads.size(); ++i) {
      auto dst = grads[i].values();
      auto src = chunk_grads[c][i].values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  return loss;
}

std::string history_csv(std::span<const EpochRecord> history) {
  std::string out = "epoch,loss,val_auroc,radius,n_targets,lr\n";
  char line[256];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%d,%zu,%.17g\n", r.epoch, r.loss, r.val_auroc, r.radius,
                  r.target_count, r.lr);
    out += line;
  }
  return out;
}

GraphSource synthetic_source(const SyntheticConfig& cfg) {
  cfg.validate();
  return [cfg](std::size_t count, std::uint64_t seed) { return gen_synthetic(cfg, count, seed); };
}

GraphSource pool_source(std::vector<LabeledGraph> pool) {
  if (pool.empty()) throw InvalidArgument("pool_source: empty pool");
  return [pool = std::move(pool)](std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = make_rng(seed);
    std::vector<LabeledGraph> out;
    while (out.size() < count) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i = 0; i < order.size() && out.size() < count; ++i) out.push_back(pool[order[i]]);
    }
    return out;
  };
}

TrainResult train(Model model, const TrainConfig& cfg, const GraphSource& source,
                  std::span<const LabeledGraph> validation_graphs, const EpochCallback& on_epoch) {
  cfg.validate();
  model.validate();
  const int max_radius = cfg.curriculum.max_radius;
  CurriculumState state;
  if (!cfg.use_curriculum) {
    state.radius = max_radius;
    state.target_count = cfg.curriculum.max_target_count;
  }

  const auto validation = sample_balanced_pairs(validation_graphs, max_radius, cfg.validation_pairs, cfg,
                                                derive_seed(cfg.seed, kStreamValidation));
  const bool has_pos = std::any_of(validation.begin(), validation.end(), [](const auto& p) { return p.positive; });
  const bool has_neg = std::any_of(validation.begin(), validation.end(), [](const auto& p) { return !p.positive; });
  if (!has_pos || !has_neg) throw RuntimeFailure("train: could not sample both validation classes");

  TrainResult result;
  AdamState adam;
  EncoderParams best_params = model.params;
  std::vector<Batch> store;
  CurriculumState store_state{};
  std::uint64_t regeneration = 0;
  std::vector<Tensor> grads;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const bool stale = store_state.radius != state.radius || store_state.target_count != state.target_count;
    if (store.empty() || epoch % cfg.regeneration_period == 0 || stale) {
      ++regeneration;
      auto drawn = source(state.target_count, derive_seed(cfg.seed, kStreamTargets, regeneration));
      std::vector<LabeledGraph> targets;
      for (auto& g : drawn) {
        if (g.edge_count() > 0) targets.push_back(std::move(g));
      }
      if (targets.empty()) throw RuntimeFailure("train: the graph source produced no graph with an edge");
      store = build_epoch_batches(targets, state, cfg, derive_seed(cfg.seed, kStreamBatches, regeneration));
      if (store.empty()) throw RuntimeFailure("train: no training pairs could be sampled");
      store_state = state;
    }

    std::vector<std::size_t> order(store.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng = make_rng(derive_seed(cfg.seed, kStreamShuffle, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    const double lr = cosine_lr(epoch, cfg.learning_rate, cfg.restart_period);
    double loss_sum = 0.0;
    std::size_t pair_count = 0;
    for (std::size_t it = 0; it < order.size(); ++it) {
      const Batch& batch = store[order[it]];
      const double loss = batch_loss_and_grad(model, batch, grads, cfg.workers);
      if (!std::isfinite(loss)) {
        throw RuntimeFailure("train: non-finite loss at epoch " + std::to_string(epoch) + ", iteration " +
                             std::to_string(it) + " (lr " + std::to_string(lr) + ")");
      }
      adam_step(model.params.tensors, grads, adam, lr, cfg.adam);
      loss_sum += loss;
      pair_count += batch.size();
    }
    for (const auto& t : model.params.tensors) {
      if (!t.all_finite()) throw RuntimeFailure("train: parameters diverged at epoch " + std::to_string(epoch));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(pair_count);
    rec.val_auroc = pair_auroc(model, validation, cfg.workers);
    rec.radius = state.radius;
    rec.target_count = state.target_count;
    rec.lr = lr;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_auroc > result.best_val_auroc || result.best_epoch < 0) {
      result.best_val_auroc = rec.val_auroc;
      result.best_epoch = epoch;
      best_params = model.params;
    }
    if (cfg.use_curriculum) state = curriculum_update(state, 100.0 * rec.val_auroc, cfg.curriculum);
  }

  model.params = std::move(best_params);
  model.radius = max_radius;
  const auto v = pair_violations(model, validation, cfg.workers);
  std::unique_ptr<bool[]> labels(new bool[validation.size()]);
  for (std::size_t i = 0; i < validation.size(); ++i) labels[i] = validation[i].positive;
  model.margin.threshold =
      calibrate_threshold(v, std::span<const bool>(labels.get(), validation.size()), model.margin.margin).threshold;
  model.validate();
  result.model = std::move(model);
  return result;
}

}  // namespace om
