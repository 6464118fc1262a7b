#include "ordermatch/order_embed.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "ordermatch/error.hpp"

namespace om {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* op) {
  if (a != b) throw InvalidArgument(std::string(op) + ": dimension mismatch " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

void MarginConfig::validate() const {
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (!(threshold < margin)) throw ConfigError("threshold must be below the margin");
}

double violation(std::span<const double> zq, std::span<const double> zu) {
  require_same_dim(zq.size(), zu.size(), "violation");
  double e = 0.0;
  for (std::size_t i = 0; i < zq.size(); ++i) {
    const double d = zq[i] - zu[i];
    if (d > 0.0) e += d * d;
  }
  return e;
}

bool predict_subgraph(std::span<const double> zq, std::span<const double> zu, const MarginConfig& cfg) {
  return violation(zq, zu) < cfg.threshold;
}

Embedding intersection(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "intersection");
  Embedding out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0 || b[i] < 0.0) throw InvalidArgument("intersection: embeddings must be nonnegative");
    out[i] = std::min(a[i], b[i]);
  }
  return out;
}

double margin_loss(std::span<const EmbeddingPair> batch, const MarginConfig& cfg) {
  if (batch.empty()) throw InvalidArgument("margin_loss: empty batch");
  double loss = 0.0;
  for (const auto& p : batch) {
    const double e = violation(p.zq, p.zu);
    loss += p.positive ? e : std::max(0.0, cfg.margin - e);
  }
  return loss;
}

Var margin_loss(Tape& tape, Var zq, Var zu, std::span<const bool> positive, const MarginConfig& cfg) {
  const Tensor& q = tape.value(zq);
  if (q.rows() == 0) throw InvalidArgument("margin_loss: empty batch");
  if (positive.size() != q.rows()) throw InvalidArgument("margin_loss: one label per row required");
  const Var e = tape.squared_l2_of_positive_part(zq, zu);
  std::vector<std::uint32_t> pos, neg;
  for (std::size_t i = 0; i < positive.size(); ++i) (positive[i] ? pos : neg).push_back(static_cast<std::uint32_t>(i));
  std::optional<Var> loss;
  if (!pos.empty()) loss = tape.sum(tape.gather_rows(e, std::move(pos)));
  if (!neg.empty()) {
    const Var hinge = tape.relu(tape.add_scalar(tape.scale(tape.gather_rows(e, std::move(neg)), -1.0), cfg.margin));
    const Var s = tape.sum(hinge);
    loss = loss ? tape.add(*loss, s) : s;
  }
  return *loss;
}

ThresholdChoice calibrate_threshold(std::span<const double> violations, std::span<const bool> positive, double margin,
                                    int candidates) {
  if (violations.size() != positive.size()) throw InvalidArgument("calibrate_threshold: length mismatch");
  if (candidates < 1 || !(margin > 0.0)) throw InvalidArgument("calibrate_threshold: bad sweep");
  const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const auto n_neg = static_cast<double>(positive.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InvalidArgument("calibrate_threshold: both classes required");
  ThresholdChoice best{margin / (candidates + 1), -1.0};
  for (int i = 1; i <= candidates; ++i) {
    const double t = margin * i / (candidates + 1);
    double tp = 0, tn = 0;
    for (std::size_t k = 0; k < violations.size(); ++k) {
      const bool pred = violations[k] < t;
      tp += pred && positive[k];
      tn += !pred && !positive[k];
    }
    const double bacc = 0.5 * (tp / n_pos + tn / n_neg);
    if (bacc > best.balanced_accuracy) best = {t, bacc};
  }
  return best;
}

}  // namespace om
