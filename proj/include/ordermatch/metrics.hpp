#pragma once

#include <cstddef>
#include <span>

namespace om {

// Probability that a random positive outscores a random negative, ties
// counting one half. Throws unless both classes are present.
double auroc(std::span<const double> scores, std::span<const bool> labels);

struct Confusion {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;

  double precision() const noexcept;
  double recall() const noexcept;
  double accuracy() const noexcept;
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion(std::span<const bool> decisions, std::span<const bool> labels);

}  // namespace om
