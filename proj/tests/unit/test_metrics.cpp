#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "ordermatch/error.hpp"
#include "ordermatch/metrics.hpp"

using namespace om;

namespace {

// Direct pair counting, independent of the rank formulation.
double pairwise_auroc(const std::vector<double>& s, const std::vector<bool>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!y[i] || y[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

std::vector<bool> bools(std::initializer_list<int> v) {
  std::vector<bool> out;
  for (int x : v) out.push_back(x != 0);
  return out;
}

// std::vector<bool> has no contiguous storage; copy into a span-friendly buffer.
struct Labels {
  std::unique_ptr<bool[]> data;
  std::size_t n;
  explicit Labels(const std::vector<bool>& v) : data(new bool[v.size()]), n(v.size()) {
    for (std::size_t i = 0; i < n; ++i) data[i] = v[i];
  }
  operator std::span<const bool>() const { return {data.get(), n}; }
};

}  // namespace

TEST_CASE("auroc examples") {
  CHECK(auroc(std::vector<double>{0.9, 0.1}, Labels(bools({1, 0}))) == 1.0);
  CHECK(auroc(std::vector<double>{0.5, 0.5, 0.5}, Labels(bools({1, 0, 1}))) == 0.5);
  const std::vector<double> s = {0.8, 0.7, 0.6, 0.5};
  const auto y = bools({1, 0, 1, 0});
  CHECK(pairwise_auroc(s, y) == 0.75);
  CHECK(auroc(s, Labels(y)) == 0.75);
  CHECK_THROWS_AS(auroc(std::vector<double>{0.1, 0.2}, Labels(bools({1, 1}))), InvalidArgument);
}

TEST_CASE("auroc agrees with pair counting and respects monotone transforms") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> s(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 7);  // coarse grid forces ties
      y[i] = rng() % 2;
    }
    y[0] = true;
    y[1] = false;
    const Labels labels(y);
    const double a = auroc(s, labels);
    CHECK(a == doctest::Approx(pairwise_auroc(s, y)).epsilon(1e-12));
    std::vector<double> t(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(s[i]) * 3 - 1;
    CHECK(auroc(t, labels) == doctest::Approx(a).epsilon(1e-12));

    std::vector<double> distinct(n);
    for (std::size_t i = 0; i < n; ++i) distinct[i] = static_cast<double>(rng()) + static_cast<double>(i) * 1e-3;
    for (std::size_t i = 0; i < n; ++i) neg[i] = -distinct[i];
    CHECK(auroc(distinct, labels) + auroc(neg, labels) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("confusion counts") {
  const auto labels = bools({1, 1, 0, 0, 1, 0});
  CHECK(confusion(Labels(labels), Labels(labels)) == Confusion{3, 0, 3, 0});
  std::vector<bool> inverted(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) inverted[i] = !labels[i];
  CHECK(confusion(Labels(inverted), Labels(labels)) == Confusion{0, 3, 0, 3});
  // hand-counted: decisions 1,0,1,0,1,1 vs labels 1,1,0,0,1,0 -> TP 2, FP 2, TN 1, FN 1
  const auto c = confusion(Labels(bools({1, 0, 1, 0, 1, 1})), Labels(labels));
  CHECK(c == Confusion{2, 2, 1, 1});
  CHECK(c.precision() == 0.5);
  CHECK(c.recall() == doctest::Approx(2.0 / 3.0));
}
