#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgalign/rng.hpp"
#include "kgalign/tensor.hpp"

namespace kgalign {

/// Named collection of trainable tensors. Owns the values; graphs bind to
/// entries by index and the optimizer updates them in place between steps.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor init);
  std::size_t size() const { return tensors_.size(); }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  /// Index of a named parameter; throws if absent.
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

class Graph;

/// Handle to a node in a Graph. Cheap to copy; valid only for the graph
/// that produced it.
struct Var {
  Graph* graph = nullptr;
  std::int32_t id = -1;
};

/// Tape of primitive tensor operations with reverse-mode gradients.
/// Forward values are computed eagerly as nodes are appended, so the tape
/// is topologically ordered by construction and backward() visits nodes
/// exactly once in reverse order. A graph is confined to one thread.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaves.
  Var input(Tensor t);
  Var param(ParameterSet& params, std::size_t index);

  // Primitives. Shapes are explicit; there is no broadcasting.
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var scalar_mul(Var a, double c);
  Var concat_rows(Var a, Var b);
  Var concat_cols(Var a, Var b);
  Var row_softmax(Var a);
  /// Softmax per row over entries where mask is nonzero. Masked entries get
  /// exactly zero weight and zero gradient. A fully masked row is an error.
  Var masked_row_softmax(Var a, Tensor mask);
  Var leaky_relu(Var a, double slope);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  /// Natural log; inputs are clamped to >= 1e-30 before the log.
  Var log(Var a);
  Var clamp_min(Var a, double bound);
  Var clamp_max(Var a, double bound);
  /// axis 0 collapses rows (result [1,n]); axis 1 collapses columns ([m,1]).
  Var sum(Var a, int axis);
  Var mean(Var a, int axis);
  Var sum_all(Var a);
  Var l2_normalize_rows(Var a);
  Var gather_rows(Var a, std::vector<std::size_t> index);
  /// out[index[e], :] += a[e, :]; out has out_rows rows.
  Var scatter_add_rows(Var a, std::vector<std::size_t> index,
                       std::size_t out_rows);
  /// Inverted dropout: kept entries are scaled by 1/(1-rate) at train time.
  Var dropout(Var a, double rate, Rng& rng);

  /// Reverse pass from a scalar ([1,1]) node. Gradients for every node
  /// reachable from it become available via grad(); parameters bound with
  /// param() can be read back with param_grads().
  void backward(Var scalar);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() scalar w.r.t. this node (zeros if the
  /// node is unreachable from it).
  const Tensor& grad(Var v) const;
  /// Gradients aligned with the parameter set; zeros for parameters that
  /// were never bound into this graph or are unreachable.
  std::vector<Tensor> param_grads(const ParameterSet& params) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    Input,
    Param,
    MatMul,
    Transpose,
    Add,
    Sub,
    Mul,
    Div,
    ScalarMul,
    ConcatRows,
    ConcatCols,
    RowSoftmax,
    MaskedRowSoftmax,
    LeakyRelu,
    Tanh,
    Sigmoid,
    Exp,
    Log,
    ClampMin,
    ClampMax,
    SumAxis,
    MeanAxis,
    SumAll,
    L2NormalizeRows,
    GatherRows,
    ScatterAddRows,
    Dropout,
  };

  struct Node {
    Op op;
    std::int32_t a = -1;
    std::int32_t b = -1;
    Tensor out;
    double attr = 0.0;  // scalar factor / slope / clamp bound / dropout rate
    int axis = -1;
    std::int32_t param_index = -1;
    std::vector<std::size_t> index;  // gather / scatter row map
    Tensor aux;                      // mask, dropout scale mask, row norms
  };

  Var push(Node n);
  const Tensor& val(std::int32_t id) const { return nodes_[id].out; }
  Var unary(Op op, Var a, double attr = 0.0);
  void check_same_shape(const char* op, Var a, Var b) const;
  void backward_node(std::int32_t id, std::vector<Tensor>& grads,
                     std::vector<bool>& has_grad) const;
  static Tensor& accum(std::vector<Tensor>& grads, std::vector<bool>& has,
                       const Tensor& shape_like, std::int32_t id);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<bool> has_grad_;
  Tensor zero_like_;  // scratch for grad() of unreachable nodes
  mutable Tensor zero_grad_;
};

/// Xavier / Glorot uniform initialization with fan sizes taken from the
/// tensor shape.
Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace kgalign
