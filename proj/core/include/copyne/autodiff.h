// Copyright 2026 The CopyNE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode automatic differentiation over rank-2 double tensors.
//
// A Graph is a define-by-run tape: every op evaluates eagerly and appends a
// node, so node ids are already a topological order. backward() walks the
// tape once in reverse. Parameters are bound into a graph by pointer and are
// never mutated by it.

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "copyne/rng.h"
#include "copyne/tensor.h"

namespace copyne {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public GraphError {
 public:
  ShapeError(const std::string& op, int node, const std::string& expected,
             const Shape& actual);
};

/// Named leaf tensors in insertion order.
class Parameters {
 public:
  void add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  const std::vector<std::string>& names() const { return order_; }
  std::size_t size() const { return order_.size(); }
  std::size_t scalar_count() const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> tensors_;
};

using Gradients = std::map<std::string, Tensor>;

enum class OpKind {
  kLeaf,
  kAdd,
  kMul,
  kMatMul,
  kConcat,
  kSlice,
  kGather,
  kTanh,
  kSigmoid,
  kRelu,
  kLog,
  kExp,
  kSoftmax,
  kLayerNorm,
  kSum,
  kMean,
  kLogSumExp,
};

const char* op_name(OpKind op);

class Graph;

struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

class Graph {
 public:
  /// With record_gradients=false, parameters bind as constants and nothing
  /// requires grad; used for decoding.
  explicit Graph(bool record_gradients = true)
      : record_gradients_(record_gradients) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Binds a parameter by reference; the tensor must outlive the graph.
  /// Binding the same name twice returns the same node.
  Var parameter(const std::string& name, const Tensor& value);
  Var parameter(const Parameters& params, const std::string& name) {
    return parameter(name, params.get(name));
  }
  Var input(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return input(std::move(value), false); }
  /// Constant bound by reference; the tensor must outlive the graph.
  Var external(const Tensor& value);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }
  OpKind kind(Var v) const { return node(v).op; }

  /// Fills gradients for every node that requires grad. The loss must hold
  /// exactly one value.
  void backward(Var loss);
  /// Gradient of the last backward() loss with respect to v.
  const Tensor& grad(Var v) const;
  /// Parameter gradients keyed by name; parameters that did not take part
  /// in the loss get zero tensors.
  Gradients parameter_gradients() const;

  /// Number of log() inputs clamped at the 1e-300 floor so far.
  std::size_t clamped_logs() const { return clamped_logs_; }

  /// Turns on dropout() for this graph. Masks come from rng in call order.
  void enable_dropout(double rate, Rng rng);
  double dropout_rate() const { return dropout_rate_; }

 private:
  struct Node {
    OpKind op = OpKind::kLeaf;
    std::vector<int> inputs;
    Tensor value;
    const Tensor* external = nullptr;
    bool requires_grad = false;
    std::string name;
    // Op attributes.
    int axis = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    bool transpose_b = false;
    std::vector<std::size_t> indices;
    Tensor saved;
  };

  const Node& node(Var v) const;
  const Tensor& node_value(const Node& n) const {
    return n.external != nullptr ? *n.external : n.value;
  }
  Var push(Node n);
  void backward_node(int id);

  bool record_gradients_;
  std::deque<Node> nodes_;  // stable addresses: value() references survive later ops
  std::unordered_map<std::string, int> parameter_ids_;
  std::vector<Tensor> grads_;
  std::size_t clamped_logs_ = 0;
  double dropout_rate_ = 0.0;
  std::optional<Rng> dropout_rng_;

  friend Var add(Var a, Var b);
  friend Var mul(Var a, Var b);
  friend Var matmul(Var a, Var b, bool transpose_b);
  friend Var concat(const std::vector<Var>& parts, int axis);
  friend Var slice(Var a, int axis, std::size_t begin, std::size_t end);
  friend Var gather_rows(Var table, std::vector<std::size_t> indices);
  friend Var unary(OpKind op, Var a);
  friend Var softmax(Var a);
  friend Var dropout(Var a);
  friend Var layer_norm(Var a, double eps);
  friend Var sum(Var a);
  friend Var mean(Var a);
  friend Var log_sum_exp(Var a);
};

// Primitives. Broadcasting for add/mul: b may match a, be a [1, n] row, a
// [m, 1] column, or a [1, 1] scalar.
Var add(Var a, Var b);
Var mul(Var a, Var b);
/// a[m,k] x b[k,n], or a[m,k] x b[n,k]^T when transpose_b.
Var matmul(Var a, Var b, bool transpose_b = false);
Var concat(const std::vector<Var>& parts, int axis);
/// Half-open [begin, end) along axis 0 (rows) or 1 (columns).
Var slice(Var a, int axis, std::size_t begin, std::size_t end);
/// Embedding lookup: output row i is table row indices[i].
Var gather_rows(Var table, std::vector<std::size_t> indices);
Var unary(OpKind op, Var a);
inline Var tanh(Var a) { return unary(OpKind::kTanh, a); }
inline Var sigmoid(Var a) { return unary(OpKind::kSigmoid, a); }
inline Var relu(Var a) { return unary(OpKind::kRelu, a); }
/// Natural log; inputs below 1e-300 are clamped and counted.
inline Var log(Var a) { return unary(OpKind::kLog, a); }
inline Var exp(Var a) { return unary(OpKind::kExp, a); }
/// Row-wise softmax over the last axis, max-subtracted.
Var softmax(Var a);
/// Row-wise normalization to zero mean and unit variance (no affine).
Var layer_norm(Var a, double eps = 1e-5);
/// Full reductions to [1, 1].
Var sum(Var a);
Var mean(Var a);
/// Row-wise log-sum-exp over the last axis, giving [m, 1].
Var log_sum_exp(Var a);

// Composites.
Var scale(Var a, double factor);
Var sub(Var a, Var b);
Var log_softmax(Var a);
/// x W + b with W stored [in, out] and b a [1, out] row.
Var linear(Var x, Var w, Var b);
/// Inverted dropout at the graph's rate; identity unless enabled.
Var dropout(Var a);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

using LossBuilder = std::function<Var(Graph&, const Parameters&)>;

/// Central finite differences on every coordinate of every parameter
/// (or only those listed). Relative error uses max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const LossBuilder& build, Parameters params,
                           double eps,
                           const std::vector<std::string>& only = {});

}  // namespace copyne
