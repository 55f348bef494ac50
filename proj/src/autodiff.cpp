#include "kgalign/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "kgalign/kernels.hpp"

namespace kgalign {

namespace {
constexpr double kLogFloor = 1e-30;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw std::invalid_argument(std::string(op) + ": " + detail);
}
}  // namespace

std::size_t ParameterSet::add(std::string name, Tensor init) {
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(init));
  return tensors_.size() - 1;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw std::out_of_range("ParameterSet: no parameter named " + name);
}

Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  const double limit =
      std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& v : t.values) v = rng.uniform(-limit, limit);
  return t;
}

Var Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Graph::input(Tensor t) {
  Node n;
  n.op = Op::Input;
  n.out = std::move(t);
  return push(std::move(n));
}

Var Graph::param(ParameterSet& params, std::size_t index) {
  Node n;
  n.op = Op::Param;
  n.out = params.tensor(index);
  n.param_index = static_cast<std::int32_t>(index);
  return push(std::move(n));
}

void Graph::check_same_shape(const char* op, Var a, Var b) const {
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  if (!x.same_shape(y))
    shape_error(op, "shape mismatch " + x.shape_str() + " vs " + y.shape_str());
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  if (x.cols != y.rows)
    shape_error("matmul", "inner dimensions differ " + x.shape_str() + " * " +
                              y.shape_str());
  Node n;
  n.op = Op::MatMul;
  n.a = a.id;
  n.b = b.id;
  n.out = Tensor(x.rows, y.cols);
  kernels::matmul(x.data(), false, y.data(), false, n.out.data(), x.rows,
                  x.cols, y.cols);
  return push(std::move(n));
}

Var Graph::transpose(Var a) {
  const Tensor& x = val(a.id);
  Node n;
  n.op = Op::Transpose;
  n.a = a.id;
  n.out = Tensor(x.cols, x.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) n.out.at(j, i) = x.at(i, j);
  return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
  check_same_shape("add", a, b);
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  Node n;
  n.op = Op::Add;
  n.a = a.id;
  n.b = b.id;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.numel(); ++i)
    n.out.values[i] = x.values[i] + y.values[i];
  return push(std::move(n));
}

Var Graph::sub(Var a, Var b) {
  check_same_shape("sub", a, b);
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  Node n;
  n.op = Op::Sub;
  n.a = a.id;
  n.b = b.id;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.numel(); ++i)
    n.out.values[i] = x.values[i] - y.values[i];
  return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
  check_same_shape("mul", a, b);
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  Node n;
  n.op = Op::Mul;
  n.a = a.id;
  n.b = b.id;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.numel(); ++i)
    n.out.values[i] = x.values[i] * y.values[i];
  return push(std::move(n));
}

Var Graph::div(Var a, Var b) {
  check_same_shape("div", a, b);
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  Node n;
  n.op = Op::Div;
  n.a = a.id;
  n.b = b.id;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.numel(); ++i)
    n.out.values[i] = x.values[i] / y.values[i];
  return push(std::move(n));
}

Var Graph::scalar_mul(Var a, double c) {
  const Tensor& x = val(a.id);
  Node n;
  n.op = Op::ScalarMul;
  n.a = a.id;
  n.attr = c;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.numel(); ++i) n.out.values[i] = c * x.values[i];
  return push(std::move(n));
}

Var Graph::concat_rows(Var a, Var b) {
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  if (x.cols != y.cols)
    shape_error("concat_rows",
                "column counts differ " + x.shape_str() + " vs " + y.shape_str());
  Node n;
  n.op = Op::ConcatRows;
  n.a = a.id;
  n.b = b.id;
  n.out = Tensor(x.rows + y.rows, x.cols);
  std::copy(x.values.begin(), x.values.end(), n.out.values.begin());
  std::copy(y.values.begin(), y.values.end(),
            n.out.values.begin() + static_cast<std::ptrdiff_t>(x.numel()));
  return push(std::move(n));
}

Var Graph::concat_cols(Var a, Var b) {
  const Tensor& x = val(a.id);
  const Tensor& y = val(b.id);
  if (x.rows != y.rows)
    shape_error("concat_cols",
                "row counts differ " + x.shape_str() + " vs " + y.shape_str());
  Node n;
  n.op = Op::ConcatCols;
  n.a = a.id;
  n.b = b.id;
  n.out = Tensor(x.rows, x.cols + y.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::copy(x.values.begin() + static_cast<std::ptrdiff_t>(i * x.cols),
              x.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * x.cols),
              n.out.values.begin() + static_cast<std::ptrdiff_t>(i * n.out.cols));
    std::copy(y.values.begin() + static_cast<std::ptrdiff_t>(i * y.cols),
              y.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * y.cols),
              n.out.values.begin() +
                  static_cast<std::ptrdiff_t>(i * n.out.cols + x.cols));
  }
  return push(std::move(n));
}

Var Graph::row_softmax(Var a) {
  const Tensor& x = val(a.id);
  Node n;
  n.op = Op::RowSoftmax;
  n.a = a.id;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double hi = x.at(i, 0);
    for (std::size_t j = 1; j < x.cols; ++j) hi = std::max(hi, x.at(i, j));
    double acc = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double e = std::exp(x.at(i, j) - hi);
      n.out.at(i, j) = e;
      acc += e;
    }
    for (std::size_t j = 0; j < x.cols; ++j) n.out.at(i, j) /= acc;
  }
  return push(std::move(n));
}

Var Graph::masked_row_softmax(Var a, Tensor mask) {
  const Tensor& x = val(a.id);
  if (!x.same_shape(mask))
    shape_error("masked_row_softmax", "mask shape " + mask.shape_str() +
                                          " does not match input " +
                                          x.shape_str());
  Node n;
  n.op = Op::MaskedRowSoftmax;
  n.a = a.id;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < x.cols; ++j)
      if (mask.at(i, j) != 0.0) hi = std::max(hi, x.at(i, j));
    if (!std::isfinite(hi))
      shape_error("masked_row_softmax",
                  "row " + std::to_string(i) + " is fully masked");
    double acc = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
      if (mask.at(i, j) != 0.0) {
        const double e = std::exp(x.at(i, j) - hi);
        n.out.at(i, j) = e;
        acc += e;
      }
    }
    for (std::size_t j = 0; j < x.cols; ++j)
      if (mask.at(i, j) != 0.0) n.out.at(i, j) /= acc;
  }
  n.aux = std::move(mask);
  return push(std::move(n));
}

Var Graph::unary(Op op, Var a, double attr) {
  const Tensor& x = val(a.id);
  Node n;
  n.op = op;
  n.a = a.id;
  n.attr = attr;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double v = x.values[i];
    double r = 0.0;
    switch (op) {
      case Op::LeakyRelu:
        r = v >= 0.0 ? v : attr * v;
        break;
      case Op::Tanh:
        r = std::tanh(v);
        break;
      case Op::Sigmoid:
        r = 1.0 / (1.0 + std::exp(-v));
        break;
      case Op::Exp:
        r = std::exp(v);
        break;
      case Op::Log:
        r = std::log(std::max(v, kLogFloor));
        break;
      case Op::ClampMin:
        r = std::max(v, attr);
        break;
      case Op::ClampMax:
        r = std::min(v, attr);
        break;
      default:
        shape_error("unary", "bad op");
    }
    n.out.values[i] = r;
  }
  return push(std::move(n));
}

Var Graph::leaky_relu(Var a, double slope) {
  return unary(Op::LeakyRelu, a, slope);
}
Var Graph::tanh(Var a) { return unary(Op::Tanh, a); }
Var Graph::sigmoid(Var a) { return unary(Op::Sigmoid, a); }
Var Graph::exp(Var a) { return unary(Op::Exp, a); }
Var Graph::log(Var a) { return unary(Op::Log, a); }
Var Graph::clamp_min(Var a, double bound) {
  return unary(Op::ClampMin, a, bound);
}
Var Graph::clamp_max(Var a, double bound) {
  return unary(Op::ClampMax, a, bound);
}

Var Graph::sum(Var a, int axis) {
  const Tensor& x = val(a.id);
  if (axis != 0 && axis != 1) shape_error("sum", "axis must be 0 or 1");
  Node n;
  n.op = Op::SumAxis;
  n.a = a.id;
  n.axis = axis;
  if (axis == 0) {
    n.out = Tensor(1, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t j = 0; j < x.cols; ++j) n.out.at(0, j) += x.at(i, j);
  } else {
    n.out = Tensor(x.rows, 1);
    for (std::size_t i = 0; i < x.rows; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < x.cols; ++j) acc += x.at(i, j);
      n.out.at(i, 0) = acc;
    }
  }
  return push(std::move(n));
}

Var Graph::mean(Var a, int axis) {
  const Tensor& x = val(a.id);
  if (axis != 0 && axis != 1) shape_error("mean", "axis must be 0 or 1");
  const std::size_t count = axis == 0 ? x.rows : x.cols;
  if (count == 0) shape_error("mean", "empty axis");
  Var s = sum(a, axis);
  // Fold the division into a dedicated node so the gradient carries 1/count.
  Node& sn = nodes_[s.id];
  sn.op = Op::MeanAxis;
  sn.attr = 1.0 / static_cast<double>(count);
  for (auto& v : sn.out.values) v *= sn.attr;
  return s;
}

Var Graph::sum_all(Var a) {
  const Tensor& x = val(a.id);
  Node n;
  n.op = Op::SumAll;
  n.a = a.id;
  n.out = Tensor(1, 1);
  double acc = 0.0;
  for (double v : x.values) acc += v;
  n.out.values[0] = acc;
  return push(std::move(n));
}

Var Graph::l2_normalize_rows(Var a) {
  const Tensor& x = val(a.id);
  Node n;
  n.op = Op::L2NormalizeRows;
  n.a = a.id;
  n.out = Tensor(x.rows, x.cols);
  n.aux = Tensor(x.rows, 1);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) acc += x.at(i, j) * x.at(i, j);
    const double norm = std::sqrt(std::max(acc, kLogFloor));
    n.aux.at(i, 0) = norm;
    for (std::size_t j = 0; j < x.cols; ++j) n.out.at(i, j) = x.at(i, j) / norm;
  }
  return push(std::move(n));
}

Var Graph::gather_rows(Var a, std::vector<std::size_t> index) {
  const Tensor& x = val(a.id);
  for (std::size_t r : index)
    if (r >= x.rows)
      shape_error("gather_rows", "row index " + std::to_string(r) +
                                     " out of range for " + x.shape_str());
  Node n;
  n.op = Op::GatherRows;
  n.a = a.id;
  n.out = Tensor(index.size(), x.cols);
  for (std::size_t e = 0; e < index.size(); ++e)
    for (std::size_t j = 0; j < x.cols; ++j)
      n.out.at(e, j) = x.at(index[e], j);
  n.index = std::move(index);
  return push(std::move(n));
}

Var Graph::scatter_add_rows(Var a, std::vector<std::size_t> index,
                            std::size_t out_rows) {
  const Tensor& x = val(a.id);
  if (index.size() != x.rows)
    shape_error("scatter_add_rows", "index size " +
                                        std::to_string(index.size()) +
                                        " does not match rows of " +
                                        x.shape_str());
  for (std::size_t r : index)
    if (r >= out_rows)
      shape_error("scatter_add_rows",
                  "row index " + std::to_string(r) + " out of range");
  Node n;
  n.op = Op::ScatterAddRows;
  n.a = a.id;
  n.out = Tensor(out_rows, x.cols);
  for (std::size_t e = 0; e < index.size(); ++e)
    for (std::size_t j = 0; j < x.cols; ++j)
      n.out.at(index[e], j) += x.at(e, j);
  n.index = std::move(index);
  return push(std::move(n));
}

Var Graph::dropout(Var a, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    shape_error("dropout", "rate must be in [0,1)");
  const Tensor& x = val(a.id);
  Node n;
  n.op = Op::Dropout;
  n.a = a.id;
  n.attr = rate;
  n.aux = Tensor(x.rows, x.cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& m : n.aux.values)
    m = rng.bernoulli(rate) ? 0.0 : keep_scale;
  n.out = Tensor(x.rows, x.cols);
  for (std::size_t i = 0; i < x.numel(); ++i)
    n.out.values[i] = x.values[i] * n.aux.values[i];
  return push(std::move(n));
}

const Tensor& Graph::value(Var v) const { return nodes_[v.id].out; }

const Tensor& Graph::grad(Var v) const {
  if (static_cast<std::size_t>(v.id) < has_grad_.size() && has_grad_[v.id])
    return grads_[v.id];
  const Tensor& out = nodes_[v.id].out;
  zero_grad_ = Tensor(out.rows, out.cols);
  return zero_grad_;
}

Tensor& Graph::accum(std::vector<Tensor>& grads, std::vector<bool>& has,
                     const Tensor& shape_like, std::int32_t id) {
  if (!has[id]) {
    grads[id] = Tensor(shape_like.rows, shape_like.cols);
    has[id] = true;
  }
  return grads[id];
}

void Graph::backward(Var scalar) {
  const Tensor& s = val(scalar.id);
  if (!s.is_scalar())
    throw std::invalid_argument("backward: output is not a scalar, shape " +
                                s.shape_str());
  grads_.assign(nodes_.size(), Tensor());
  has_grad_.assign(nodes_.size(), false);
  grads_[scalar.id] = Tensor::scalar(1.0);
  has_grad_[scalar.id] = true;
  for (std::int32_t id = scalar.id; id >= 0; --id) {
    if (!has_grad_[id]) continue;
    backward_node(id, grads_, has_grad_);
  }
}

void Graph::backward_node(std::int32_t id, std::vector<Tensor>& grads,
                          std::vector<bool>& has_grad) const {
  const Node& n = nodes_[id];
  const Tensor& g = grads[id];
  switch (n.op) {
    case Op::Input:
    case Op::Param:
      break;
    case Op::MatMul: {
      const Tensor& x = val(n.a);
      const Tensor& y = val(n.b);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      Tensor& gb = accum(grads, has_grad, y, n.b);
      // dX += G * Y^T ; dY += X^T * G
      Tensor tmp(x.rows, x.cols);
      kernels::matmul(g.data(), false, y.data(), true, tmp.data(), x.rows,
                      y.cols, x.cols);
      for (std::size_t i = 0; i < tmp.numel(); ++i)
        ga.values[i] += tmp.values[i];
      Tensor tmpb(y.rows, y.cols);
      kernels::matmul(x.data(), true, g.data(), false, tmpb.data(), y.rows,
                      x.rows, y.cols);
      for (std::size_t i = 0; i < tmpb.numel(); ++i)
        gb.values[i] += tmpb.values[i];
      break;
    }
    case Op::Transpose: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) ga.at(j, i) += g.at(i, j);
      break;
    }
    case Op::Add: {
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      Tensor& gb = accum(grads, has_grad, val(n.b), n.b);
      for (std::size_t i = 0; i < g.numel(); ++i) {
        ga.values[i] += g.values[i];
        gb.values[i] += g.values[i];
      }
      break;
    }
    case Op::Sub: {
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      Tensor& gb = accum(grads, has_grad, val(n.b), n.b);
      for (std::size_t i = 0; i < g.numel(); ++i) {
        ga.values[i] += g.values[i];
        gb.values[i] -= g.values[i];
      }
      break;
    }
    case Op::Mul: {
      const Tensor& x = val(n.a);
      const Tensor& y = val(n.b);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      Tensor& gb = accum(grads, has_grad, y, n.b);
      for (std::size_t i = 0; i < g.numel(); ++i) {
        ga.values[i] += g.values[i] * y.values[i];
        gb.values[i] += g.values[i] * x.values[i];
      }
      break;
    }
    case Op::Div: {
      const Tensor& x = val(n.a);
      const Tensor& y = val(n.b);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      Tensor& gb = accum(grads, has_grad, y, n.b);
      for (std::size_t i = 0; i < g.numel(); ++i) {
        const double inv = 1.0 / y.values[i];
        ga.values[i] += g.values[i] * inv;
        gb.values[i] -= g.values[i] * x.values[i] * inv * inv;
      }
      break;
    }
    case Op::ScalarMul: {
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      for (std::size_t i = 0; i < g.numel(); ++i)
        ga.values[i] += n.attr * g.values[i];
      break;
    }
    case Op::ConcatRows: {
      const Tensor& x = val(n.a);
      const Tensor& y = val(n.b);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      Tensor& gb = accum(grads, has_grad, y, n.b);
      for (std::size_t i = 0; i < x.numel(); ++i) ga.values[i] += g.values[i];
      for (std::size_t i = 0; i < y.numel(); ++i)
        gb.values[i] += g.values[x.numel() + i];
      break;
    }
    case Op::ConcatCols: {
      const Tensor& x = val(n.a);
      const Tensor& y = val(n.b);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      Tensor& gb = accum(grads, has_grad, y, n.b);
      for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j)
          ga.at(i, j) += g.at(i, j);
        for (std::size_t j = 0; j < y.cols; ++j)
          gb.at(i, j) += g.at(i, x.cols + j);
      }
      break;
    }
    case Op::RowSoftmax:
    case Op::MaskedRowSoftmax: {
      const Tensor& y = n.out;
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      for (std::size_t i = 0; i < y.rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < y.cols; ++j) dot += g.at(i, j) * y.at(i, j);
        for (std::size_t j = 0; j < y.cols; ++j)
          ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
      }
      break;
    }
    case Op::LeakyRelu: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      for (std::size_t i = 0; i < g.numel(); ++i)
        ga.values[i] += g.values[i] * (x.values[i] >= 0.0 ? 1.0 : n.attr);
      break;
    }
    case Op::Tanh: {
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      for (std::size_t i = 0; i < g.numel(); ++i)
        ga.values[i] += g.values[i] * (1.0 - n.out.values[i] * n.out.values[i]);
      break;
    }
    case Op::Sigmoid: {
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      for (std::size_t i = 0; i < g.numel(); ++i) {
        const double y = n.out.values[i];
        ga.values[i] += g.values[i] * y * (1.0 - y);
      }
      break;
    }
    case Op::Exp: {
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      for (std::size_t i = 0; i < g.numel(); ++i)
        ga.values[i] += g.values[i] * n.out.values[i];
      break;
    }
    case Op::Log: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      for (std::size_t i = 0; i < g.numel(); ++i)
        if (x.values[i] > kLogFloor)
          ga.values[i] += g.values[i] / x.values[i];
      break;
    }
    case Op::ClampMin: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      for (std::size_t i = 0; i < g.numel(); ++i)
        if (x.values[i] >= n.attr) ga.values[i] += g.values[i];
      break;
    }
    case Op::ClampMax: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      for (std::size_t i = 0; i < g.numel(); ++i)
        if (x.values[i] <= n.attr) ga.values[i] += g.values[i];
      break;
    }
    case Op::SumAxis:
    case Op::MeanAxis: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      const double scale = n.op == Op::MeanAxis ? n.attr : 1.0;
      if (n.axis == 0) {
        for (std::size_t i = 0; i < x.rows; ++i)
          for (std::size_t j = 0; j < x.cols; ++j)
            ga.at(i, j) += scale * g.at(0, j);
      } else {
        for (std::size_t i = 0; i < x.rows; ++i)
          for (std::size_t j = 0; j < x.cols; ++j)
            ga.at(i, j) += scale * g.at(i, 0);
      }
      break;
    }
    case Op::SumAll: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      const double gv = g.values[0];
      for (std::size_t i = 0; i < x.numel(); ++i) ga.values[i] += gv;
      break;
    }
    case Op::L2NormalizeRows: {
      const Tensor& y = n.out;
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      for (std::size_t i = 0; i < y.rows; ++i) {
        const double norm = n.aux.at(i, 0);
        double dot = 0.0;
        for (std::size_t j = 0; j < y.cols; ++j) dot += g.at(i, j) * y.at(i, j);
        for (std::size_t j = 0; j < y.cols; ++j)
          ga.at(i, j) += (g.at(i, j) - y.at(i, j) * dot) / norm;
      }
      break;
    }
    case Op::GatherRows: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      for (std::size_t e = 0; e < n.index.size(); ++e)
        for (std::size_t j = 0; j < x.cols; ++j)
          ga.at(n.index[e], j) += g.at(e, j);
      break;
    }
    case Op::ScatterAddRows: {
      const Tensor& x = val(n.a);
      Tensor& ga = accum(grads, has_grad, x, n.a);
      for (std::size_t e = 0; e < n.index.size(); ++e)
        for (std::size_t j = 0; j < x.cols; ++j)
          ga.at(e, j) += g.at(n.index[e], j);
      break;
    }
    case Op::Dropout: {
      Tensor& ga = accum(grads, has_grad, val(n.a), n.a);
      for (std::size_t i = 0; i < g.numel(); ++i)
        ga.values[i] += g.values[i] * n.aux.values[i];
      break;
    }
  }
}

std::vector<Tensor> Graph::param_grads(const ParameterSet& params) const {
  std::vector<Tensor> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = params.tensor(i);
    out[i] = Tensor(p.rows, p.cols);
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.op != Op::Param || n.param_index < 0) continue;
    if (id >= has_grad_.size() || !has_grad_[id]) continue;
    Tensor& dst = out[n.param_index];
    const Tensor& src = grads_[id];
    for (std::size_t i = 0; i < dst.numel(); ++i) dst.values[i] += src.values[i];
  }
  return out;
}

}  // namespace kgalign
