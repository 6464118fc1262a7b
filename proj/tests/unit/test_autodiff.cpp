#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ordermatch/autodiff.hpp"
#include "ordermatch/error.hpp"

using namespace om;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(r, c);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Pushes entries that sit within margin of zero away from the kink.
void clear_of_zero(Tensor& t, double margin) {
  for (double& v : t.values()) {
    if (std::abs(v) < margin) v = v < 0 ? -margin * 2 : margin * 2;
  }
}

}  // namespace

TEST_CASE("forward examples") {
  Tape tape;
  const Var x = tape.constant(Tensor(1, 2, {-1.0, 2.0}));
  const Tensor& y = tape.value(tape.leaky_relu(x, 0.01));
  CHECK(y[0] == doctest::Approx(-0.01).epsilon(1e-15));
  CHECK(y[1] == 2.0);

  const Var a = tape.constant(Tensor(1, 2, {1.0, 2.0}));
  const Var b = tape.constant(Tensor(1, 2, {2.0, 3.0}));
  CHECK(tape.value(tape.squared_l2_of_positive_part(a, b)).item() == 0.0);
  const Var c = tape.constant(Tensor(1, 2, {3.0, 1.0}));
  CHECK(tape.value(tape.squared_l2_of_positive_part(c, b)).item() == 1.0);

  CHECK(tape.value(tape.relu(x))[0] == 0.0);
  CHECK(tape.value(tape.mean(b)).item() == 2.5);
  CHECK(tape.value(tape.concat(a, c)) == Tensor(1, 4, {1, 2, 3, 1}));
}

TEST_CASE("shape errors") {
  Tape tape;
  const Var a = tape.constant(Tensor(2, 3));
  const Var b = tape.constant(Tensor(2, 2));
  CHECK_THROWS_AS(tape.matmul(a, b), InvalidArgument);
  CHECK_THROWS_AS(tape.add(a, b), InvalidArgument);
  CHECK_THROWS_AS(tape.add_bias(a, b), InvalidArgument);
  CHECK_THROWS_AS(tape.squared_l2_of_positive_part(a, b), InvalidArgument);
  CHECK_THROWS_AS(tape.concat(a, tape.constant(Tensor(3, 1))), InvalidArgument);
  CHECK_THROWS_AS(tape.row_sum_aggregate(a, {0}, 1), InvalidArgument);
  CHECK_THROWS_AS(tape.row_sum_aggregate(a, {0, 2}, 2), InvalidArgument);
  CHECK_THROWS_AS(tape.gather_rows(a, {5}), InvalidArgument);
  CHECK_THROWS_AS(Tensor(2, 2, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("backward: d(x^2)/dx at 3 is 6") {
  Tensor x(1, 1, 3.0);
  Tape tape;
  const Var v = tape.parameter(x);
  const Var zero = tape.constant(Tensor(1, 1, 0.0));
  // x^2 = ||max(0, x - 0)||^2 for x > 0
  const Var loss = tape.sum(tape.squared_l2_of_positive_part(v, zero));
  tape.backward(loss);
  CHECK(tape.grad(v)[0] == 6.0);
}

TEST_CASE("backward: dominated point of the squared positive part has zero gradient") {
  Tensor a(1, 3, {0.1, 0.5, 1.0});
  Tensor b(1, 3, {0.2, 0.6, 1.0});
  Tape tape;
  const Var va = tape.parameter(a);
  const Var vb = tape.parameter(b);
  tape.backward(tape.sum(tape.squared_l2_of_positive_part(va, vb)));
  for (double g : tape.grad(va).values()) CHECK(g == 0.0);
  for (double g : tape.grad(vb).values()) CHECK(g == 0.0);
}

TEST_CASE("backward rejects reuse and non-scalar losses") {
  Tensor x(2, 2, 1.0);
  Tape tape;
  const Var v = tape.parameter(x);
  CHECK_THROWS_AS(tape.backward(v), InvalidArgument);
  CHECK_THROWS_AS(tape.grad(v), InvalidArgument);
  const Var s = tape.sum(v);
  tape.backward(s);
  CHECK_THROWS_AS(tape.backward(s), InvalidArgument);
  CHECK(tape.grad(v)[3] == 1.0);
}

TEST_CASE("non-finite forward values are rejected") {
  Tape tape;
  CHECK_THROWS_AS(tape.constant(Tensor(1, 1, std::nan(""))), RuntimeFailure);
  Tensor big(1, 1, 1e300);
  const Var v = tape.parameter(big);
  CHECK_THROWS_AS(tape.scale(v, 1e300), RuntimeFailure);
}

TEST_CASE("random 3-layer network matches central differences") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 50 && checked < 5; ++trial) {
    Tensor x = random_tensor(5, 4, rng);
    Tensor w1 = random_tensor(4, 6, rng), b1 = random_tensor(1, 6, rng);
    Tensor w2 = random_tensor(6, 6, rng), b2 = random_tensor(1, 6, rng);
    Tensor w3 = random_tensor(6, 3, rng), b3 = random_tensor(1, 3, rng);
    Tensor target = random_tensor(5, 3, rng, 0.0, 1.0);
    const LossFunction f = [&](Tape& t, std::span<const Var> p) {
      Var h = t.leaky_relu(t.add_bias(t.matmul(t.constant(x), p[0]), p[1]), 0.01);
      h = t.leaky_relu(t.add_bias(t.matmul(h, p[2]), p[3]), 0.01);
      h = t.add_bias(t.matmul(h, p[4]), p[5]);
      return t.sum(t.squared_l2_of_positive_part(h, t.constant(target)));
    };
    Tensor* params[] = {&w1, &b1, &w2, &b2, &w3, &b3};
    const auto report = grad_check(f, params, 1e-5, 1e-4);
    if (report.min_kink_distance < 1e-3) continue;  // too close to a kink for central differences
    CHECK(report.checked == 4 * 6 + 6 + 36 + 6 + 18 + 3);
    CHECK(report.max_relative_error < 1e-4);
    CHECK(report.passed);
    ++checked;
  }
  CHECK(checked == 5);
}

TEST_CASE("every op passes grad_check at 20 random points") {
  std::mt19937_64 rng(77);
  const double margin = 1e-3;
  for (int point = 0; point < 20; ++point) {
    Tensor a = random_tensor(4, 3, rng);
    Tensor b = random_tensor(4, 3, rng);
    Tensor w = random_tensor(3, 2, rng);
    Tensor bias = random_tensor(1, 3, rng);
    clear_of_zero(a, margin);
    const std::vector<std::uint32_t> groups = {1, 0, 1, 2};
    const std::vector<std::uint32_t> rows = {3, 3, 0, 2, 1};

    struct Case {
      const char* name;
      LossFunction f;
      std::vector<Tensor*> params;
    };
    // sum of (v/2 + 4)^2: every output coordinate gets its own nonconstant weight
    auto weighted = [](Tape& t, Var v) {
      const Tensor& val = t.value(v);
      const Var floor = t.constant(Tensor(val.rows(), val.cols(), -1.0));
      return t.sum(t.squared_l2_of_positive_part(t.add_scalar(t.scale(v, 0.5), 3.0), floor));
    };
    const std::vector<Case> cases = {
        {"matmul", [&](Tape& t, std::span<const Var> p) { return t.sum(t.matmul(p[0], p[1])); }, {&a, &w}},
        {"add", [&](Tape& t, std::span<const Var> p) { return weighted(t, t.add(p[0], p[1])); }, {&a, &b}},
        {"add_bias", [&](Tape& t, std::span<const Var> p) { return weighted(t, t.add_bias(p[0], p[1])); }, {&a, &bias}},
        {"leaky_relu", [&](Tape& t, std::span<const Var> p) { return weighted(t, t.leaky_relu(p[0], 0.01)); }, {&a}},
        {"relu", [&](Tape& t, std::span<const Var> p) { return weighted(t, t.relu(p[0])); }, {&a}},
        {"gather_rows", [&](Tape& t, std::span<const Var> p) { return weighted(t, t.gather_rows(p[0], rows)); }, {&a}},
        {"row_sum_aggregate", [&](Tape& t, std::span<const Var> p) { return weighted(t, t.row_sum_aggregate(p[0], groups, 3)); }, {&a}},
        {"concat", [&](Tape& t, std::span<const Var> p) { return weighted(t, t.concat(p[0], p[1])); }, {&a, &b}},
        {"squared_l2_of_positive_part", [&](Tape& t, std::span<const Var> p) { return t.sum(t.squared_l2_of_positive_part(p[0], p[1])); }, {&a, &b}},
        {"mean", [&](Tape& t, std::span<const Var> p) { return t.mean(t.squared_l2_of_positive_part(p[0], p[1])); }, {&a, &b}},
    };
    for (const auto& c : cases) {
      const auto report = grad_check(c.f, c.params, 1e-5, 1e-4);
      INFO(c.name << " point " << point << " rel " << report.max_relative_error);
      CHECK(report.passed);
    }
  }
}

TEST_CASE("row_sum_aggregate ignores row order and is monotone on nonnegative inputs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 2 + rng() % 8;
    Tensor x = random_tensor(rows, 4, rng, 0.0, 3.0);
    std::vector<std::uint32_t> group(rows);
    for (auto& g : group) g = static_cast<std::uint32_t>(rng() % 3);

    // permuted listing of the same rows gives a bit-identical result
    std::vector<std::size_t> perm(rows);
    for (std::size_t i = 0; i < rows; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor xp(rows, 4);
    std::vector<std::uint32_t> gp(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy_n(x.row(perm[i]).begin(), 4, xp.row(i).begin());
      gp[i] = group[perm[i]];
    }
    Tape tape;
    const Tensor base = tape.value(tape.row_sum_aggregate(tape.constant(x), group, 3));
    CHECK(tape.value(tape.row_sum_aggregate(tape.constant(xp), gp, 3)) == base);

    Tensor bumped = x;
    bumped[rng() % bumped.size()] += std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const Tensor& after = tape.value(tape.row_sum_aggregate(tape.constant(bumped), group, 3));
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(after[i] >= base[i]);
  }
}

TEST_CASE("grad_check reports a deliberately wrong gradient") {
  // relu applied at exactly zero: numeric slope is 1/2, tape subgradient is 0
  Tensor x(1, 1, 0.0);
  const LossFunction f = [](Tape& t, std::span<const Var> p) { return t.sum(t.relu(p[0])); };
  Tensor* params[] = {&x};
  const auto report = grad_check(f, params, 1e-5, 1e-4);
  CHECK_FALSE(report.passed);
  CHECK(report.min_kink_distance == 0.0);
  CHECK(report.max_relative_error == doctest::Approx(1.0));
}
