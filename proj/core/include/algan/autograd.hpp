// Copyright 2026 The ALGAN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "algan/matrix.hpp"

namespace algan {

class Graph;

// A learnable weight living outside any particular graph. Graphs bind to it
// through Graph::param(); gradients from every backward pass accumulate into
// `grad` until they are explicitly cleared (sgd_step clears them).
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Handle to a node of a Graph. Cheap to copy; valid as long as the graph.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  const Matrix& value() const;
  // Gradient of the last backward root with respect to this node. Empty
  // (0x0) when no gradient reached the node.
  const Matrix& grad() const;
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::string shape_string() const { return value().shape_string(); }

  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Tape of differentiable nodes. Nodes are appended in creation order, which
// is a topological order, so backward() simply walks the reachable nodes from
// the root towards the leaves. A graph must stay on one thread.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf that never receives gradients.
  Var constant(Matrix value);
  // Leaf that receives gradients; they accumulate across backward() calls.
  Var variable(Matrix value);
  // Leaf bound to an external parameter; gradients accumulate into it.
  Var param(Parameter& p);

  // Builds an interior node. `backward` is stored only when one of the
  // parents requires a gradient.
  Var make(Matrix value, std::vector<std::size_t> parents, BackwardFn backward);

  // Reverse-mode sweep from a 1x1 root. Interior gradients are recomputed
  // from scratch; leaf and parameter gradients accumulate.
  void backward(Var root);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Gradient accumulator of node `id`, zero-initialised on first use.
  Matrix& grad_slot(std::size_t id);
  // Clears accumulated gradients of plain `variable` leaves.
  void zero_leaf_grads();

  std::size_t size() const { return nodes_.size(); }
  // Number of nodes whose backward rule ran during the last backward().
  std::size_t last_backward_visits() const { return last_visits_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    bool leaf = false;
  };

  // deque keeps value references stable while the tape grows.
  std::deque<Node> nodes_;
  std::size_t last_visits_ = 0;
};

// ---- operations -----------------------------------------------------------

enum class ElementwiseOp { kAdd, kSub, kMul, kSigmoid, kTanh, kAbs };

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
// Hadamard product.
Var mul(Var a, Var b);
// Adds a 1 x cols bias row to every row of `a`; the only broadcast supported.
Var add_row(Var a, Var bias);
Var scale(Var a, double factor);
Var sigmoid(Var a);
Var tanh(Var a);
// Subgradient 0 at 0.
Var abs(Var a);
Var log(Var a);
// Gradient passes where lo <= x <= hi, zero elsewhere.
Var clamp(Var a, double lo, double hi);

Var elementwise(ElementwiseOp op, Var a);
Var elementwise(ElementwiseOp op, Var a, Var b);

// Row-wise softmax with max subtraction.
Var softmax_rows(Var a);

Var sum(Var a);
Var mean(Var a);

// [a, b] side by side; row counts must agree.
Var concat_cols(Var a, Var b);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var vstack(const std::vector<Var>& parts);

// Batched attention helpers over time-major sequence batches: row t*groups+g
// holds step t of sequence g. For groups == 1 they reduce to q*k^T and p*v.
//
// grouped_scores: out[t*G+g][s] = dot(q[t*G+g], k[s*G+g])
Var grouped_scores(Var q, Var k, std::size_t groups);
// grouped_mix:    out[t*G+g] = sum_s p[t*G+g][s] * v[s*G+g]
Var grouped_mix(Var p, Var v, std::size_t groups);

}  // namespace algan
