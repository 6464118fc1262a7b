#include "ordermatch/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "ordermatch/error.hpp"

namespace om {

double auroc(std::span<const double> scores, std::span<const bool> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("auroc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U from average ranks
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("auroc: both classes must be present");
  const double np = static_cast<double>(positives), nn = static_cast<double>(negatives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double Confusion::precision() const noexcept {
  const auto d = true_positive + false_positive;
  return d ? static_cast<double>(true_positive) / static_cast<double>(d) : 0.0;
}

double Confusion::recall() const noexcept {
  const auto d = true_positive + false_negative;
  return d ? static_cast<double>(true_positive) / static_cast<double>(d) : 0.0;
}

double Confusion::accuracy() const noexcept {
  const auto total = true_positive + false_positive + true_negative + false_negative;
  return total ? static_cast<double>(true_positive + true_negative) / static_cast<double>(total) : 0.0;
}

Confusion confusion(std::span<const bool> decisions, std::span<const bool> labels) {
  if (decisions.size() != labels.size()) throw InvalidArgument("confusion: decisions and labels differ in length");
  Confusion c;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i]) {
      ++(labels[i] ? c.true_positive : c.false_positive);
    } else {
      ++(labels[i] ? c.false_negative : c.true_negative);
    }
  }
  return c;
}

}  // namespace om
