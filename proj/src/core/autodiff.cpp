#include "ordermatch/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ordermatch/error.hpp"

namespace om {

namespace {

std::string shape_str(const Tensor& t) {
  return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

void add_into(Tensor& dst, const Tensor& src) {
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw InvalidArgument("tensor: " + std::to_string(data_.size()) + " values for shape " + std::to_string(rows) +
                          "x" + std::to_string(cols));
  }
}

Tensor Tensor::row_vector(std::span<const double> values) {
  return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

double Tensor::item() const {
  if (data_.size() != 1) throw InvalidArgument("tensor: item() on " + shape_str(*this));
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

void matmul_accumulate(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* out = c.row(i).data();
    for (std::size_t k = 0; k < m; ++k) {
      const double x = a(i, k);
      if (x == 0.0) continue;
      const double* brow = b.row(k).data();
      for (std::size_t j = 0; j < p; ++j) out[j] += x * brow[j];
    }
  }
}

Var Tape::push(Node n) {
  if (!n.external && !n.owned.all_finite()) throw RuntimeFailure("tape: non-finite value in forward pass");
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw InvalidArgument("tape: unknown variable");
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw InvalidArgument("tape: unknown variable");
  return nodes_[v.id];
}

const Tensor& Tape::val(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.owned;
}

Tensor& Tape::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    const Tensor& v = val(id);
    n.grad = Tensor(v.rows(), v.cols());
  }
  return n.grad;
}

void Tape::note_kinks(const Tensor& input) {
  for (double x : input.values()) min_kink_distance_ = std::min(min_kink_distance_, std::abs(x));
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = Op::kConstant;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(const Tensor& value) {
  if (!value.all_finite()) throw RuntimeFailure("tape: non-finite parameter");
  Node n;
  n.op = Op::kParameter;
  n.external = &value;
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const {
  node(v);
  return val(v.id);
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!backward_done_) throw InvalidArgument("tape: grad() before backward()");
  return n.grad;
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.cols() != y.rows()) throw InvalidArgument("matmul: shape mismatch " + shape_str(x) + " * " + shape_str(y));
  Node n;
  n.op = Op::kMatmul;
  n.a = a.id;
  n.b = b.id;
  n.owned = Tensor(x.rows(), y.cols());
  matmul_accumulate(x, y, n.owned);
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require_same_shape(x, y, "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.owned = x;
  add_into(n.owned, y);
  return push(std::move(n));
}

Var Tape::add_bias(Var a, Var bias) {
  const Tensor& x = value(a);
  const Tensor& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != x.cols()) {
    throw InvalidArgument("add_bias: shape mismatch " + shape_str(x) + " + " + shape_str(bv));
  }
  Node n;
  n.op = Op::kAddBias;
  n.a = a.id;
  n.b = bias.id;
  n.owned = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = n.owned.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
  }
  return push(std::move(n));
}

Var Tape::add_scalar(Var a, double s) {
  Node n;
  n.op = Op::kAddScalar;
  n.a = a.id;
  n.owned = value(a);
  for (double& v : n.owned.values()) v += s;
  return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.scalar = s;
  n.owned = value(a);
  for (double& v : n.owned.values()) v *= s;
  return push(std::move(n));
}

Var Tape::leaky_relu(Var a, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw InvalidArgument("leaky_relu: slope must lie in (0, 1)");
  const Tensor& x = value(a);
  note_kinks(x);
  Node n;
  n.op = Op::kLeakyRelu;
  n.a = a.id;
  n.scalar = slope;
  n.owned = x;
  for (double& v : n.owned.values()) v = v > 0.0 ? v : slope * v;
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  const Tensor& x = value(a);
  note_kinks(x);
  Node n;
  n.op = Op::kRelu;
  n.a = a.id;
  n.owned = x;
  for (double& v : n.owned.values()) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Var Tape::gather_rows(Var a, std::vector<std::uint32_t> index) {
  const Tensor& x = value(a);
  Node n;
  n.op = Op::kGatherRows;
  n.a = a.id;
  n.owned = Tensor(index.size(), x.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= x.rows()) throw InvalidArgument("gather_rows: row index out of range");
    std::copy_n(x.row(index[i]).begin(), x.cols(), n.owned.row(i).begin());
  }
  n.index = std::move(index);
  return push(std::move(n));
}

Var Tape::row_sum_aggregate(Var a, std::vector<std::uint32_t> group, std::size_t group_count) {
  const Tensor& x = value(a);
  if (group.size() != x.rows()) throw InvalidArgument("row_sum_aggregate: one group id per row required");
  // bucket rows by group (counting sort keeps this linear)
  std::vector<std::size_t> start(group_count + 1, 0);
  for (auto g : group) {
    if (g >= group_count) throw InvalidArgument("row_sum_aggregate: group id out of range");
    ++start[g + 1];
  }
  for (std::size_t g = 0; g < group_count; ++g) start[g + 1] += start[g];
  std::vector<std::uint32_t> members(group.size());
  {
    auto fill = start;
    for (std::size_t r = 0; r < group.size(); ++r) members[fill[group[r]]++] = static_cast<std::uint32_t>(r);
  }
  Node n;
  n.op = Op::kRowSum;
  n.a = a.id;
  n.group_count = group_count;
  n.owned = Tensor(group_count, x.cols());
  std::vector<double> column;
  for (std::size_t g = 0; g < group_count; ++g) {
    const std::size_t lo = start[g], hi = start[g + 1];
    if (lo == hi) continue;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      column.clear();
      for (std::size_t i = lo; i < hi; ++i) column.push_back(x(members[i], c));
      std::sort(column.begin(), column.end());
      double s = 0.0;
      for (double v : column) s += v;
      n.owned(g, c) = s;
    }
  }
  n.index = std::move(group);
  return push(std::move(n));
}

Var Tape::concat(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.rows() != y.rows()) throw InvalidArgument("concat: row mismatch " + shape_str(x) + " | " + shape_str(y));
  Node n;
  n.op = Op::kConcat;
  n.a = a.id;
  n.b = b.id;
  n.owned = Tensor(x.rows(), x.cols() + y.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto out = n.owned.row(r);
    std::copy(x.row(r).begin(), x.row(r).end(), out.begin());
    std::copy(y.row(r).begin(), y.row(r).end(), out.begin() + static_cast<std::ptrdiff_t>(x.cols()));
  }
  return push(std::move(n));
}

Var Tape::squared_l2_of_positive_part(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require_same_shape(x, y, "squared_l2_of_positive_part");
  Node n;
  n.op = Op::kSqPosPart;
  n.a = a.id;
  n.b = b.id;
  n.owned = Tensor(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x(r, c) - y(r, c);
      if (d > 0.0) s += d * d;
    }
    n.owned(r, 0) = s;
  }
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  const Tensor& x = value(a);
  double s = 0.0;
  for (double v : x.values()) s += v;
  Node n;
  n.op = Op::kSum;
  n.a = a.id;
  n.owned = Tensor::scalar(s);
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  const Tensor& x = value(a);
  if (x.size() == 0) throw InvalidArgument("mean: empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  Node n;
  n.op = Op::kMean;
  n.a = a.id;
  n.owned = Tensor::scalar(s / static_cast<double>(x.size()));
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  if (backward_done_) throw InvalidArgument("tape: backward() already ran on this tape");
  const Tensor& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) throw InvalidArgument("tape: backward() needs a scalar loss, got " + shape_str(lv));
  backward_done_ = true;
  grad_buffer(loss.id)[0] = 1.0;

  for (std::size_t idx = loss.id + 1; idx-- > 0;) {
    Node& n = nodes_[idx];
    if (n.grad.size() == 0) continue;  // not on a path to the loss
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::kConstant:
      case Op::kParameter:
        break;
      case Op::kMatmul: {
        const Tensor& x = val(n.a);
        const Tensor& y = val(n.b);
        Tensor& gx = grad_buffer(n.a);
        // dX = G * Y^T
        for (std::size_t i = 0; i < x.rows(); ++i) {
          auto grow = g.row(i);
          for (std::size_t k = 0; k < x.cols(); ++k) {
            auto yrow = y.row(k);
            double s = 0.0;
            for (std::size_t j = 0; j < grow.size(); ++j) s += grow[j] * yrow[j];
            gx(i, k) += s;
          }
        }
        // dY = X^T * G
        Tensor& gy = grad_buffer(n.b);
        for (std::size_t i = 0; i < x.rows(); ++i) {
          auto grow = g.row(i);
          for (std::size_t k = 0; k < x.cols(); ++k) {
            const double xv = x(i, k);
            if (xv == 0.0) continue;
            auto gyrow = gy.row(k);
            for (std::size_t j = 0; j < grow.size(); ++j) gyrow[j] += xv * grow[j];
          }
        }
        break;
      }
      case Op::kAdd:
        add_into(grad_buffer(n.a), g);
        add_into(grad_buffer(n.b), g);
        break;
      case Op::kAddBias: {
        add_into(grad_buffer(n.a), g);
        Tensor& gb = grad_buffer(n.b);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto grow = g.row(r);
          for (std::size_t c = 0; c < grow.size(); ++c) gb[c] += grow[c];
        }
        break;
      }
      case Op::kAddScalar:
        add_into(grad_buffer(n.a), g);
        break;
      case Op::kScale: {
        Tensor& ga = grad_buffer(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.scalar * g[i];
        break;
      }
      case Op::kLeakyRelu: {
        const Tensor& x = val(n.a);
        Tensor& ga = grad_buffer(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += x[i] > 0.0 ? g[i] : n.scalar * g[i];
        break;
      }
      case Op::kRelu: {
        const Tensor& x = val(n.a);
        Tensor& ga = grad_buffer(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (x[i] > 0.0) ga[i] += g[i];
        }
        break;
      }
      case Op::kGatherRows: {
        Tensor& ga = grad_buffer(n.a);
        for (std::size_t i = 0; i < n.index.size(); ++i) {
          auto src = g.row(i);
          auto dst = ga.row(n.index[i]);
          for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
        }
        break;
      }
      case Op::kRowSum: {
        Tensor& ga = grad_buffer(n.a);
        for (std::size_t r = 0; r < n.index.size(); ++r) {
          auto src = g.row(n.index[r]);
          auto dst = ga.row(r);
          for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
        }
        break;
      }
      case Op::kConcat: {
        Tensor& ga = grad_buffer(n.a);
        Tensor& gb = grad_buffer(n.b);
        const std::size_t ca = ga.cols();
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto grow = g.row(r);
          auto arow = ga.row(r);
          auto brow = gb.row(r);
          for (std::size_t c = 0; c < ca; ++c) arow[c] += grow[c];
          for (std::size_t c = 0; c < brow.size(); ++c) brow[c] += grow[ca + c];
        }
        break;
      }
      case Op::kSqPosPart: {
        const Tensor& x = val(n.a);
        const Tensor& y = val(n.b);
        Tensor& ga = grad_buffer(n.a);
        Tensor& gb = grad_buffer(n.b);
        for (std::size_t r = 0; r < x.rows(); ++r) {
          const double gr = g(r, 0);
          for (std::size_t c = 0; c < x.cols(); ++c) {
            const double d = x(r, c) - y(r, c);
            if (d > 0.0) {
              ga(r, c) += 2.0 * d * gr;
              gb(r, c) -= 2.0 * d * gr;
            }
          }
        }
        break;
      }
      case Op::kSum: {
        Tensor& ga = grad_buffer(n.a);
        for (double& v : ga.values()) v += g[0];
        break;
      }
      case Op::kMean: {
        Tensor& ga = grad_buffer(n.a);
        const double s = g[0] / static_cast<double>(ga.size());
        for (double& v : ga.values()) v += s;
        break;
      }
    }
  }
  // nodes the loss never reached get zero gradients of the right shape
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) grad_buffer(i);
}

GradCheckReport grad_check(const LossFunction& loss, std::span<Tensor* const> params, double h, double tol,
                           double abs_floor) {
  if (!(h > 0.0)) throw InvalidArgument("grad_check: step must be positive");
  GradCheckReport report;

  auto evaluate = [&]() {
    Tape tape;
    std::vector<Var> vars;
    for (Tensor* p : params) vars.push_back(tape.parameter(*p));
    return tape.value(loss(tape, vars)).item();
  };

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (Tensor* p : params) vars.push_back(tape.parameter(*p));
    const Var l = loss(tape, vars);
    tape.backward(l);
    for (Var v : vars) analytic.push_back(tape.grad(v));
    report.min_kink_distance = tape.min_kink_distance();
  }

  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& t = *params[p];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double up = evaluate();
      t[i] = saved - h;
      const double down = evaluate();
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p][i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), abs_floor});
      ++report.checked;
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = p;
        report.worst_index = i;
      }
    }
  }
  report.passed = report.max_relative_error < tol;
  return report;
}

}  // namespace om
