#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace om {

/// Dense row-major matrix of doubles. Vectors are 1 x n.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor row_vector(std::span<const double> values);
  static Tensor scalar(double v) { return Tensor(1, 1, v); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::vector<std::size_t> shape() const { return {rows_, cols_}; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double item() const;

  bool all_finite() const noexcept;
  void fill(double v) noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Handle to a value recorded on a Tape; only meaningful on that tape.
struct Var {
  std::uint32_t id = 0;
};

/// Reverse-mode tape over Tensor values.
///
/// Parameters are recorded by reference and must outlive the tape. Subgradient
/// convention at kinks: relu'(0) = 0 and leaky_relu'(0) = slope. Only bias rows
/// broadcast; every other op requires matching shapes.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(const Tensor& value);

  const Tensor& value(Var v) const;
  // Gradient of the last backward() loss with respect to v.
  const Tensor& grad(Var v) const;

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  // a (n x m) + bias (1 x m) broadcast over rows.
  Var add_bias(Var a, Var bias);
  Var add_scalar(Var a, double s);
  Var scale(Var a, double s);
  Var leaky_relu(Var a, double slope);
  Var relu(Var a);
  Var elementwise_max_with_zero(Var a) { return relu(a); }
  // Row i of the result is row index[i] of a.
  Var gather_rows(Var a, std::vector<std::uint32_t> index);
  // Row g of the result sums the rows of a whose group is g. Each column of a
  // group is summed in sorted order, so the result does not depend on the
  // order in which rows are listed.
  Var row_sum_aggregate(Var a, std::vector<std::uint32_t> group, std::size_t group_count);
  // Column-wise concatenation [a | b].
  Var concat(Var a, Var b);
  // Row-wise ||max(0, a - b)||^2, shape rows x 1.
  Var squared_l2_of_positive_part(Var a, Var b);
  Var sum(Var a);
  Var mean(Var a);

  // Reverse pass from a 1x1 loss; may run once per tape.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  // Smallest |input| seen at a relu/leaky_relu kink during the forward pass.
  double min_kink_distance() const noexcept { return min_kink_distance_; }

 private:
  enum class Op {
    kConstant, kParameter, kMatmul, kAdd, kAddBias, kAddScalar, kScale, kLeakyRelu, kRelu,
    kGatherRows, kRowSum, kConcat, kSqPosPart, kSum, kMean,
  };
  struct Node {
    Op op = Op::kConstant;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double scalar = 0.0;
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor grad;
    std::vector<std::uint32_t> index;
    std::size_t group_count = 0;
  };

  Var push(Node node);
  Node& node(Var v);
  const Node& node(Var v) const;
  const Tensor& val(std::uint32_t id) const;
  Tensor& grad_buffer(std::uint32_t id);
  void note_kinks(const Tensor& input);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
  double min_kink_distance_ = 1e300;
};

// C += A * B with a fixed k-then-j accumulation order per output row.
void matmul_accumulate(const Tensor& a, const Tensor& b, Tensor& c);

struct GradCheckReport {
  double max_relative_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_parameter = 0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  double min_kink_distance = 0.0;
  bool passed = false;
};

using LossFunction = std::function<Var(Tape&, std::span<const Var>)>;

// Compares tape gradients with central differences of step h for every
// coordinate of every parameter. Relative error uses the denominator
// max(|analytic|, |numeric|, abs_floor).
GradCheckReport grad_check(const LossFunction& loss, std::span<Tensor* const> params, double h, double tol,
                           double abs_floor = 1e-6);

}  // namespace om
