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

#include "copyne/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace copyne {

namespace {

constexpr double kLogFloor = 1e-300;

// All kernels accumulate each output element over the reduction index in
// ascending order, so a row of the result never depends on how many other
// rows are present.

// c[m,n] += a[m,k] * b[k,n]
void mm_nn(const double* a, const double* b, double* c, std::size_t m,
           std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m,n] += a[k,m]^T * b[k,n]
void mm_tn(const double* a, const double* b, double* c, std::size_t k,
           std::size_t m, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

std::vector<double> transposed(const Tensor& t) {
  const std::size_t r = t.rows(), c = t.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = t[i * c + j];
  return out;
}

enum class Broadcast { kSame, kRow, kCol, kScalar };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op,
                         int node) {
  const std::size_t ar = a.rows(), ac = a.cols();
  const std::size_t br = b.rows(), bc = b.cols();
  if (br == ar && bc == ac) return Broadcast::kSame;
  if (br == 1 && bc == 1) return Broadcast::kScalar;
  if (br == 1 && bc == ac) return Broadcast::kRow;
  if (bc == 1 && br == ar) return Broadcast::kCol;
  throw ShapeError(op, node,
                   "rhs broadcastable to " + shape_to_string(a.shape()),
                   b.shape());
}

std::size_t bcast_index(Broadcast kind, std::size_t i, std::size_t j,
                        std::size_t cols) {
  switch (kind) {
    case Broadcast::kSame:
      return i * cols + j;
    case Broadcast::kRow:
      return j;
    case Broadcast::kCol:
      return i;
    case Broadcast::kScalar:
      return 0;
  }
  return 0;
}

Shape shape2(std::size_t r, std::size_t c) { return {r, c}; }

void require_rank2(const Tensor& t, const char* op, int node) {
  if (t.rank() != 2 && t.rank() != 1) {
    throw ShapeError(op, node, "rank-2 tensor", t.shape());
  }
}

void accumulate(Tensor& dst, const Tensor& src) {
  if (dst.empty()) {
    dst = src;
    return;
  }
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
}

}  // namespace

ShapeError::ShapeError(const std::string& op, int node,
                       const std::string& expected, const Shape& actual)
    : GraphError("shape mismatch in " + op + " at node " +
                 std::to_string(node) + ": expected " + expected + ", got " +
                 shape_to_string(actual)) {}

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kGather: return "gather_rows";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kRelu: return "relu";
    case OpKind::kLog: return "log";
    case OpKind::kExp: return "exp";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLayerNorm: return "layer_norm";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kLogSumExp: return "log_sum_exp";
  }
  return "?";
}

// ---------------------------------------------------------------- Parameters

void Parameters::add(const std::string& name, Tensor value) {
  if (tensors_.contains(name)) {
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  }
  order_.push_back(name);
  tensors_.emplace(name, std::move(value));
}

bool Parameters::contains(const std::string& name) const {
  return tensors_.contains(name);
}

const Tensor& Parameters::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw std::out_of_range("unknown parameter '" + name + "'");
  }
  return it->second;
}

Tensor& Parameters::get(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw std::out_of_range("unknown parameter '" + name + "'");
  }
  return it->second;
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

// --------------------------------------------------------------------- Graph

const Tensor& Var::value() const { return graph->value(*this); }

const Graph::Node& Graph::node(Var v) const {
  if (v.graph != this || v.id < 0 ||
      static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw GraphError("variable does not belong to this graph");
  }
  return nodes_[v.id];
}

const Tensor& Graph::value(Var v) const { return node_value(node(v)); }

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

Var Graph::push(Node n) {
  if (!record_gradients_) n.requires_grad = false;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::parameter(const std::string& name, const Tensor& value) {
  if (auto it = parameter_ids_.find(name); it != parameter_ids_.end()) {
    return Var{this, it->second};
  }
  Node n;
  n.op = OpKind::kLeaf;
  n.external = &value;
  n.requires_grad = true;
  n.name = name;
  Var v = push(std::move(n));
  parameter_ids_.emplace(name, v.id);
  return v;
}

Var Graph::input(Tensor value, bool requires_grad) {
  Node n;
  n.op = OpKind::kLeaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Var Graph::external(const Tensor& value) {
  Node n;
  n.op = OpKind::kLeaf;
  n.external = &value;
  return push(std::move(n));
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = node(v);
  if (!n.requires_grad) {
    throw GraphError("gradient requested for detached node " +
                     std::to_string(v.id) + " (" + op_name(n.op) + ")");
  }
  if (grads_.size() != nodes_.size()) {
    throw GraphError("backward() has not been run on this graph");
  }
  return grads_[v.id];
}

Gradients Graph::parameter_gradients() const {
  Gradients out;
  for (const auto& [name, id] : parameter_ids_) {
    const Node& n = nodes_[id];
    if (id < static_cast<int>(grads_.size()) && !grads_[id].empty()) {
      out.emplace(name, grads_[id]);
    } else {
      out.emplace(name, Tensor(node_value(n).shape(), 0.0));
    }
  }
  return out;
}

void Graph::enable_dropout(double rate, Rng rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  dropout_rate_ = rate;
  dropout_rng_ = std::move(rng);
}

void Graph::backward(Var loss) {
  const Node& ln = node(loss);
  if (node_value(ln).size() != 1) {
    throw GraphError("backward() needs a scalar loss, got shape " +
                     shape_to_string(node_value(ln).shape()));
  }
  if (!ln.requires_grad) {
    throw GraphError("loss does not depend on any gradient-tracked node");
  }
  grads_.assign(nodes_.size(), Tensor());
  grads_[loss.id] = Tensor(node_value(ln).shape(), 1.0);
  for (int id = loss.id; id >= 0; --id) {
    if (!nodes_[id].requires_grad || grads_[id].empty()) continue;
    if (nodes_[id].op == OpKind::kLeaf) continue;
    backward_node(id);
  }
}

void Graph::backward_node(int id) {
  const Node& n = nodes_[id];
  const Tensor& out = node_value(n);
  const Tensor& g = grads_[id];
  auto in_value = [&](std::size_t k) -> const Tensor& {
    return node_value(nodes_[n.inputs[k]]);
  };
  auto wants = [&](std::size_t k) {
    return nodes_[n.inputs[k]].requires_grad;
  };
  auto send = [&](std::size_t k, const Tensor& contribution) {
    accumulate(grads_[n.inputs[k]], contribution);
  };

  switch (n.op) {
    case OpKind::kLeaf:
      break;
    case OpKind::kAdd: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      if (wants(0)) send(0, g);
      if (wants(1)) {
        const auto kind = broadcast_kind(a, b, "add", id);
        Tensor gb(b.shape(), 0.0);
        const std::size_t r = a.rows(), c = a.cols();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            gb[bcast_index(kind, i, j, c)] += g[i * c + j];
        send(1, gb);
      }
      break;
    }
    case OpKind::kMul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      const auto kind = broadcast_kind(a, b, "mul", id);
      const std::size_t r = a.rows(), c = a.cols();
      if (wants(0)) {
        Tensor ga(a.shape(), 0.0);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            ga[i * c + j] = g[i * c + j] * b[bcast_index(kind, i, j, c)];
        send(0, ga);
      }
      if (wants(1)) {
        Tensor gb(b.shape(), 0.0);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            gb[bcast_index(kind, i, j, c)] += g[i * c + j] * a[i * c + j];
        send(1, gb);
      }
      break;
    }
    case OpKind::kMatMul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      const std::size_t m = a.rows(), k = a.cols();
      const std::size_t n_out = out.cols();
      if (!n.transpose_b) {
        // out = a b ; da = g b^T ; db = a^T g
        if (wants(0)) {
          Tensor ga(a.shape(), 0.0);
          const auto bt = transposed(b);
          mm_nn(g.data().data(), bt.data(), ga.data().data(), m, n_out, k);
          send(0, ga);
        }
        if (wants(1)) {
          Tensor gb(b.shape(), 0.0);
          mm_tn(a.data().data(), g.data().data(), gb.data().data(), m, k,
                n_out);
          send(1, gb);
        }
      } else {
        // out = a b^T ; da = g b ; db = g^T a
        if (wants(0)) {
          Tensor ga(a.shape(), 0.0);
          mm_nn(g.data().data(), b.data().data(), ga.data().data(), m, n_out,
                k);
          send(0, ga);
        }
        if (wants(1)) {
          Tensor gb(b.shape(), 0.0);
          mm_tn(g.data().data(), a.data().data(), gb.data().data(), m, n_out,
                k);
          send(1, gb);
        }
      }
      break;
    }
    case OpKind::kConcat: {
      const std::size_t oc = out.cols();
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Tensor& part = in_value(k);
        const std::size_t pr = part.rows(), pc = part.cols();
        if (wants(k)) {
          Tensor gp(part.shape(), 0.0);
          for (std::size_t i = 0; i < pr; ++i)
            for (std::size_t j = 0; j < pc; ++j)
              gp[i * pc + j] = n.axis == 0 ? g[(offset + i) * oc + j]
                                           : g[i * oc + offset + j];
          send(k, gp);
        }
        offset += n.axis == 0 ? pr : pc;
      }
      break;
    }
    case OpKind::kSlice: {
      if (!wants(0)) break;
      const Tensor& a = in_value(0);
      const std::size_t ac = a.cols();
      const std::size_t orow = out.rows(), ocol = out.cols();
      Tensor ga(a.shape(), 0.0);
      for (std::size_t i = 0; i < orow; ++i)
        for (std::size_t j = 0; j < ocol; ++j) {
          const std::size_t src =
              n.axis == 0 ? (n.begin + i) * ac + j : i * ac + n.begin + j;
          ga[src] = g[i * ocol + j];
        }
      send(0, ga);
      break;
    }
    case OpKind::kGather: {
      if (!wants(0)) break;
      const Tensor& table = in_value(0);
      const std::size_t c = table.cols();
      Tensor gt(table.shape(), 0.0);
      for (std::size_t i = 0; i < n.indices.size(); ++i)
        for (std::size_t j = 0; j < c; ++j)
          gt[n.indices[i] * c + j] += g[i * c + j];
      send(0, gt);
      break;
    }
    case OpKind::kTanh:
    case OpKind::kSigmoid:
    case OpKind::kRelu:
    case OpKind::kLog:
    case OpKind::kExp: {
      if (!wants(0)) break;
      const Tensor& a = in_value(0);
      Tensor ga(a.shape(), 0.0);
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = 0.0;
        switch (n.op) {
          case OpKind::kTanh: d = 1.0 - out[i] * out[i]; break;
          case OpKind::kSigmoid: d = out[i] * (1.0 - out[i]); break;
          case OpKind::kRelu: d = a[i] > 0.0 ? 1.0 : 0.0; break;
          case OpKind::kLog: d = 1.0 / std::max(a[i], kLogFloor); break;
          case OpKind::kExp: d = out[i]; break;
          default: break;
        }
        ga[i] = g[i] * d;
      }
      send(0, ga);
      break;
    }
    case OpKind::kSoftmax: {
      if (!wants(0)) break;
      const std::size_t r = out.rows(), c = out.cols();
      Tensor ga(out.shape(), 0.0);
      for (std::size_t i = 0; i < r; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * out[i * c + j];
        for (std::size_t j = 0; j < c; ++j)
          ga[i * c + j] = out[i * c + j] * (g[i * c + j] - dot);
      }
      send(0, ga);
      break;
    }
    case OpKind::kLayerNorm: {
      if (!wants(0)) break;
      const std::size_t r = out.rows(), c = out.cols();
      Tensor ga(out.shape(), 0.0);
      for (std::size_t i = 0; i < r; ++i) {
        double mg = 0.0, mgy = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
          mg += g[i * c + j];
          mgy += g[i * c + j] * out[i * c + j];
        }
        mg /= static_cast<double>(c);
        mgy /= static_cast<double>(c);
        const double inv_std = n.saved[i];
        for (std::size_t j = 0; j < c; ++j)
          ga[i * c + j] =
              inv_std * (g[i * c + j] - mg - out[i * c + j] * mgy);
      }
      send(0, ga);
      break;
    }
    case OpKind::kSum:
    case OpKind::kMean: {
      if (!wants(0)) break;
      const Tensor& a = in_value(0);
      const double v =
          n.op == OpKind::kSum ? g[0] : g[0] / static_cast<double>(a.size());
      send(0, Tensor(a.shape(), v));
      break;
    }
    case OpKind::kLogSumExp: {
      if (!wants(0)) break;
      const Tensor& a = in_value(0);
      const std::size_t r = a.rows(), c = a.cols();
      Tensor ga(a.shape(), 0.0);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          ga[i * c + j] = g[i] * std::exp(a[i * c + j] - out[i]);
      send(0, ga);
      break;
    }
  }
}

// ---------------------------------------------------------------- primitives

namespace {

Graph* common_graph(Var a, Var b) {
  if (a.graph == nullptr || a.graph != b.graph) {
    throw GraphError("operands belong to different graphs");
  }
  return a.graph;
}

}  // namespace

Var add(Var a, Var b) {
  Graph* g = common_graph(a, b);
  const Tensor& av = g->value(a);
  const Tensor& bv = g->value(b);
  const int id = static_cast<int>(g->node_count());
  require_rank2(av, "add", id);
  const auto kind = broadcast_kind(av, bv, "add", id);
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(shape2(r, c), 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      out[i * c + j] = av[i * c + j] + bv[bcast_index(kind, i, j, c)];
  Graph::Node n;
  n.op = OpKind::kAdd;
  n.inputs = {a.id, b.id};
  n.value = std::move(out);
  n.requires_grad = g->requires_grad(a) || g->requires_grad(b);
  return g->push(std::move(n));
}

Var mul(Var a, Var b) {
  Graph* g = common_graph(a, b);
  const Tensor& av = g->value(a);
  const Tensor& bv = g->value(b);
  const int id = static_cast<int>(g->node_count());
  require_rank2(av, "mul", id);
  const auto kind = broadcast_kind(av, bv, "mul", id);
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(shape2(r, c), 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      out[i * c + j] = av[i * c + j] * bv[bcast_index(kind, i, j, c)];
  Graph::Node n;
  n.op = OpKind::kMul;
  n.inputs = {a.id, b.id};
  n.value = std::move(out);
  n.requires_grad = g->requires_grad(a) || g->requires_grad(b);
  return g->push(std::move(n));
}

Var matmul(Var a, Var b, bool transpose_b) {
  Graph* g = common_graph(a, b);
  const Tensor& av = g->value(a);
  const Tensor& bv = g->value(b);
  const int id = static_cast<int>(g->node_count());
  require_rank2(av, "matmul", id);
  require_rank2(bv, "matmul", id);
  const std::size_t m = av.rows(), k = av.cols();
  const std::size_t bk = transpose_b ? bv.cols() : bv.rows();
  const std::size_t nn = transpose_b ? bv.rows() : bv.cols();
  if (bk != k) {
    throw ShapeError("matmul", id,
                     transpose_b ? "[n, " + std::to_string(k) + "]"
                                 : "[" + std::to_string(k) + ", n]",
                     bv.shape());
  }
  Tensor out(shape2(m, nn), 0.0);
  if (transpose_b) {
    const auto bt = transposed(bv);
    mm_nn(av.data().data(), bt.data(), out.data().data(), m, k, nn);
  } else {
    mm_nn(av.data().data(), bv.data().data(), out.data().data(), m, k, nn);
  }
  Graph::Node n;
  n.op = OpKind::kMatMul;
  n.inputs = {a.id, b.id};
  n.value = std::move(out);
  n.transpose_b = transpose_b;
  n.requires_grad = g->requires_grad(a) || g->requires_grad(b);
  return g->push(std::move(n));
}

Var concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw GraphError("concat of zero tensors");
  Graph* g = parts.front().graph;
  const int id = static_cast<int>(g->node_count());
  if (axis != 0 && axis != 1) throw GraphError("concat axis must be 0 or 1");
  std::size_t rows = 0, cols = 0;
  bool rg = false;
  for (const Var& p : parts) {
    if (p.graph != g) throw GraphError("operands belong to different graphs");
    const Tensor& v = g->value(p);
    require_rank2(v, "concat", id);
    if (axis == 0) {
      if (cols == 0) cols = v.cols();
      if (v.cols() != cols) {
        throw ShapeError("concat", id, "[*, " + std::to_string(cols) + "]",
                         v.shape());
      }
      rows += v.rows();
    } else {
      if (rows == 0) rows = v.rows();
      if (v.rows() != rows) {
        throw ShapeError("concat", id, "[" + std::to_string(rows) + ", *]",
                         v.shape());
      }
      cols += v.cols();
    }
    rg = rg || g->requires_grad(p);
  }
  Tensor out(shape2(rows, cols), 0.0);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = g->value(p);
    const std::size_t pr = v.rows(), pc = v.cols();
    for (std::size_t i = 0; i < pr; ++i)
      for (std::size_t j = 0; j < pc; ++j) {
        if (axis == 0) {
          out[(offset + i) * cols + j] = v[i * pc + j];
        } else {
          out[i * cols + offset + j] = v[i * pc + j];
        }
      }
    offset += axis == 0 ? pr : pc;
  }
  Graph::Node n;
  n.op = OpKind::kConcat;
  for (const Var& p : parts) n.inputs.push_back(p.id);
  n.axis = axis;
  n.value = std::move(out);
  n.requires_grad = rg;
  return g->push(std::move(n));
}

Var slice(Var a, int axis, std::size_t begin, std::size_t end) {
  Graph* g = a.graph;
  const Tensor& av = g->value(a);
  const int id = static_cast<int>(g->node_count());
  require_rank2(av, "slice", id);
  const std::size_t r = av.rows(), c = av.cols();
  const std::size_t extent = axis == 0 ? r : c;
  if (axis != 0 && axis != 1) throw GraphError("slice axis must be 0 or 1");
  if (begin >= end || end > extent) {
    throw ShapeError("slice", id,
                     "extent >= " + std::to_string(end) + " along axis " +
                         std::to_string(axis) + " with begin < end",
                     av.shape());
  }
  const std::size_t orow = axis == 0 ? end - begin : r;
  const std::size_t ocol = axis == 0 ? c : end - begin;
  Tensor out(shape2(orow, ocol), 0.0);
  for (std::size_t i = 0; i < orow; ++i)
    for (std::size_t j = 0; j < ocol; ++j)
      out[i * ocol + j] =
          axis == 0 ? av[(begin + i) * c + j] : av[i * c + begin + j];
  Graph::Node n;
  n.op = OpKind::kSlice;
  n.inputs = {a.id};
  n.axis = axis;
  n.begin = begin;
  n.end = end;
  n.value = std::move(out);
  n.requires_grad = g->requires_grad(a);
  return g->push(std::move(n));
}

Var gather_rows(Var table, std::vector<std::size_t> indices) {
  Graph* g = table.graph;
  const Tensor& tv = g->value(table);
  const int id = static_cast<int>(g->node_count());
  require_rank2(tv, "gather_rows", id);
  const std::size_t r = tv.rows(), c = tv.cols();
  if (indices.empty()) throw GraphError("gather_rows with no indices");
  Tensor out(shape2(indices.size(), c), 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= r) {
      throw ShapeError("gather_rows", id,
                       "more than " + std::to_string(indices[i]) + " rows",
                       tv.shape());
    }
    std::copy_n(tv.data().begin() + indices[i] * c, c,
                out.data().begin() + i * c);
  }
  Graph::Node n;
  n.op = OpKind::kGather;
  n.inputs = {table.id};
  n.indices = std::move(indices);
  n.value = std::move(out);
  n.requires_grad = g->requires_grad(table);
  return g->push(std::move(n));
}

Var unary(OpKind op, Var a) {
  Graph* g = a.graph;
  const Tensor& av = g->value(a);
  const int id = static_cast<int>(g->node_count());
  require_rank2(av, op_name(op), id);
  Tensor out(shape2(av.rows(), av.cols()), 0.0);
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double x = av[i];
    switch (op) {
      case OpKind::kTanh: out[i] = std::tanh(x); break;
      case OpKind::kSigmoid:
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
        break;
      case OpKind::kRelu: out[i] = x > 0.0 ? x : 0.0; break;
      case OpKind::kLog:
        if (x < kLogFloor) ++g->clamped_logs_;
        out[i] = std::log(std::max(x, kLogFloor));
        break;
      case OpKind::kExp: out[i] = std::exp(x); break;
      default:
        throw GraphError(std::string("not a unary op: ") + op_name(op));
    }
  }
  Graph::Node n;
  n.op = op;
  n.inputs = {a.id};
  n.value = std::move(out);
  n.requires_grad = g->requires_grad(a);
  return g->push(std::move(n));
}

Var softmax(Var a) {
  Graph* g = a.graph;
  const Tensor& av = g->value(a);
  const int id = static_cast<int>(g->node_count());
  require_rank2(av, "softmax", id);
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(shape2(r, c), 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, av[i * c + j]);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp(av[i * c + j] - mx);
      total += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= total;
  }
  Graph::Node n;
  n.op = OpKind::kSoftmax;
  n.inputs = {a.id};
  n.value = std::move(out);
  n.requires_grad = g->requires_grad(a);
  return g->push(std::move(n));
}

Var layer_norm(Var a, double eps) {
  Graph* g = a.graph;
  const Tensor& av = g->value(a);
  const int id = static_cast<int>(g->node_count());
  require_rank2(av, "layer_norm", id);
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(shape2(r, c), 0.0);
  Tensor inv_std({r}, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += av[i * c + j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double d = av[i * c + j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[i] = is;
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = (av[i * c + j] - mu) * is;
  }
  Graph::Node n;
  n.op = OpKind::kLayerNorm;
  n.inputs = {a.id};
  n.value = std::move(out);
  n.saved = std::move(inv_std);
  n.requires_grad = g->requires_grad(a);
  return g->push(std::move(n));
}

Var sum(Var a) {
  Graph* g = a.graph;
  const Tensor& av = g->value(a);
  double total = 0.0;
  for (double v : av.data()) total += v;
  Graph::Node n;
  n.op = OpKind::kSum;
  n.inputs = {a.id};
  n.value = Tensor::scalar(total);
  n.requires_grad = g->requires_grad(a);
  return g->push(std::move(n));
}

Var mean(Var a) {
  Graph* g = a.graph;
  const Tensor& av = g->value(a);
  double total = 0.0;
  for (double v : av.data()) total += v;
  Graph::Node n;
  n.op = OpKind::kMean;
  n.inputs = {a.id};
  n.value = Tensor::scalar(total / static_cast<double>(av.size()));
  n.requires_grad = g->requires_grad(a);
  return g->push(std::move(n));
}

Var log_sum_exp(Var a) {
  Graph* g = a.graph;
  const Tensor& av = g->value(a);
  const int id = static_cast<int>(g->node_count());
  require_rank2(av, "log_sum_exp", id);
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(shape2(r, 1), 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, av[i * c + j]);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += std::exp(av[i * c + j] - mx);
    out[i] = mx + std::log(total);
  }
  Graph::Node n;
  n.op = OpKind::kLogSumExp;
  n.inputs = {a.id};
  n.value = std::move(out);
  n.requires_grad = g->requires_grad(a);
  return g->push(std::move(n));
}

// ---------------------------------------------------------------- composites

Var scale(Var a, double factor) {
  return mul(a, a.graph->constant(Tensor::scalar(factor)));
}

Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var log_softmax(Var a) { return sub(a, log_sum_exp(a)); }

Var linear(Var x, Var w, Var b) { return add(matmul(x, w), b); }

Var dropout(Var a) {
  Graph* g = a.graph;
  if (g->dropout_rate_ <= 0.0) return a;
  const double keep = 1.0 - g->dropout_rate_;
  Tensor mask(g->value(a).shape(), 0.0);
  for (auto& m : mask.data()) m = g->dropout_rng_->uniform() < keep ? 1.0 / keep : 0.0;
  return mul(a, g->constant(std::move(mask)));
}

// ---------------------------------------------------------------- grad check

GradCheckReport grad_check(const LossBuilder& build, Parameters params,
                           double eps, const std::vector<std::string>& only) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check needs eps > 0");
  Gradients analytic;
  {
    Graph g;
    Var loss = build(g, params);
    if (g.requires_grad(loss)) {
      g.backward(loss);
      analytic = g.parameter_gradients();
    }
  }
  auto evaluate = [&]() {
    Graph g(false);
    return g.value(build(g, params))[0];
  };

  GradCheckReport report;
  const auto& names = only.empty() ? params.names() : only;
  for (const auto& name : names) {
    Tensor& t = params.get(name);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + eps;
      const double up = evaluate();
      t[i] = saved - eps;
      const double down = evaluate();
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      double a = 0.0;
      if (auto it = analytic.find(name); it != analytic.end()) a = it->second[i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace copyne
