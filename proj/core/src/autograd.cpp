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

#include "algan/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "algan/errors.hpp"

namespace algan {

const Matrix& Var::value() const { return graph_->value(id_); }
const Matrix& Var::grad() const { return graph_->grad(id_); }
bool Var::requires_grad() const { return graph_->requires_grad(id_); }

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.leaf = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::variable(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.leaf = true;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.leaf = true;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::make(Matrix value, std::vector<std::size_t> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = std::any_of(parents.begin(), parents.end(),
                                [&](std::size_t p) { return nodes_[p].requires_grad; });
  if (n.requires_grad) n.backward = std::move(backward);
  n.parents = std::move(parents);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Matrix& Graph::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param != nullptr ? n.param->grad : n.grad;
}

Matrix& Graph::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  Matrix& slot = n.param != nullptr ? n.param->grad : n.grad;
  if (!slot.same_shape(n.value)) slot = Matrix(n.value.rows(), n.value.cols());
  return slot;
}

void Graph::zero_leaf_grads() {
  for (Node& n : nodes_) {
    if (n.leaf && n.param == nullptr) n.grad = Matrix();
  }
}

void Graph::backward(Var root) {
  if (root.graph() != this) throw ContractError("backward: root belongs to another graph");
  const std::size_t root_id = root.id();
  if (nodes_[root_id].value.rows() != 1 || nodes_[root_id].value.cols() != 1) {
    throw ContractError("backward: root must be a 1x1 scalar, got " +
                        nodes_[root_id].value.shape_string());
  }
  std::vector<char> reachable(root_id + 1, 0);
  reachable[root_id] = 1;
  for (std::size_t id = root_id + 1; id-- > 0;) {
    if (!reachable[id]) continue;
    for (std::size_t p : nodes_[id].parents) reachable[p] = 1;
  }
  for (std::size_t id = 0; id <= root_id; ++id) {
    if (reachable[id] && !nodes_[id].leaf) nodes_[id].grad = Matrix();
  }

  grad_slot(root_id)(0, 0) += 1.0;
  last_visits_ = 0;
  for (std::size_t id = root_id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!reachable[id] || !n.requires_grad || !n.backward) continue;
    if (n.grad.empty()) continue;
    n.backward(*this, id);
    ++last_visits_;
  }
}

namespace {

Graph& graph_of(Var a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.graph();
}

Graph& graph_of(Var a, Var b) {
  Graph& g = graph_of(a);
  if (b.graph() != &g) throw ContractError("operands belong to different graphs");
  return g;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

// Applies dx += g * local(x, y) elementwise where y is the node's own value.
template <typename F>
Var unary(Var a, Matrix value, F local) {
  Graph& g = graph_of(a);
  const std::size_t pa = a.id();
  return g.make(std::move(value), {pa}, [pa, local](Graph& gr, std::size_t self) {
    if (!gr.requires_grad(pa)) return;
    const auto x = gr.value(pa).data();
    const auto y = gr.value(self).data();
    const auto up = gr.grad(self).data();
    auto dx = gr.grad_slot(pa).data();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up[i] * local(x[i], y[i]);
  });
}

void add_into(Matrix& dst, const Matrix& src, double factor) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * s[i];
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  Matrix value;
  matmul_into(a.value(), b.value(), value, false);
  const std::size_t pa = a.id(), pb = b.id();
  return g.make(std::move(value), {pa, pb}, [pa, pb](Graph& gr, std::size_t self) {
    const Matrix& up = gr.grad(self);
    if (gr.requires_grad(pa)) matmul_bt_into(up, gr.value(pb), gr.grad_slot(pa), true);
    if (gr.requires_grad(pb)) matmul_at_into(gr.value(pa), up, gr.grad_slot(pb), true);
  });
}

namespace {

Var binary_add(Var a, Var b, double sign_b, const char* name) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), name);
  Matrix value = a.value();
  add_into(value, b.value(), sign_b);
  const std::size_t pa = a.id(), pb = b.id();
  return g.make(std::move(value), {pa, pb}, [pa, pb, sign_b](Graph& gr, std::size_t self) {
    const Matrix& up = gr.grad(self);
    if (gr.requires_grad(pa)) add_into(gr.grad_slot(pa), up, 1.0);
    if (gr.requires_grad(pb)) add_into(gr.grad_slot(pb), up, sign_b);
  });
}

}  // namespace

Var add(Var a, Var b) { return binary_add(a, b, 1.0, "add"); }
Var sub(Var a, Var b) { return binary_add(a, b, -1.0, "sub"); }

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Matrix value(a.rows(), a.cols());
  {
    auto x = a.value().data();
    auto y = b.value().data();
    auto o = value.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  }
  const std::size_t pa = a.id(), pb = b.id();
  return g.make(std::move(value), {pa, pb}, [pa, pb](Graph& gr, std::size_t self) {
    const auto up = gr.grad(self).data();
    if (gr.requires_grad(pa)) {
      const auto y = gr.value(pb).data();
      auto d = gr.grad_slot(pa).data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += up[i] * y[i];
    }
    if (gr.requires_grad(pb)) {
      const auto x = gr.value(pa).data();
      auto d = gr.grad_slot(pb).data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += up[i] * x[i];
    }
  });
}

Var add_row(Var a, Var bias) {
  Graph& g = graph_of(a, bias);
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw DimensionError("add_row: bias " + bias.shape_string() + " does not fit rows of " +
                         a.shape_string());
  }
  Matrix value = a.value();
  const auto b = bias.value().data();
  for (std::size_t r = 0; r < value.rows(); ++r) {
    auto row = value.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
  }
  const std::size_t pa = a.id(), pb = bias.id();
  return g.make(std::move(value), {pa, pb}, [pa, pb](Graph& gr, std::size_t self) {
    const Matrix& up = gr.grad(self);
    if (gr.requires_grad(pa)) add_into(gr.grad_slot(pa), up, 1.0);
    if (gr.requires_grad(pb)) {
      auto db = gr.grad_slot(pb).data();
      for (std::size_t r = 0; r < up.rows(); ++r) {
        const auto row = up.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) db[c] += row[c];
      }
    }
  });
}

Var scale(Var a, double factor) {
  return unary(a, map(a.value(), [factor](double x) { return factor * x; }),
               [factor](double, double) { return factor; });
}

Var sigmoid(Var a) {
  return unary(a, map(a.value(), stable_sigmoid),
               [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(a, map(a.value(), [](double x) { return std::tanh(x); }),
               [](double, double y) { return 1.0 - y * y; });
}

Var abs(Var a) {
  return unary(a, map(a.value(), [](double x) { return std::fabs(x); }),
               [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var log(Var a) {
  return unary(a, map(a.value(), [](double x) { return std::log(x); }),
               [](double x, double) { return 1.0 / x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(a, map(a.value(), [lo, hi](double x) { return std::clamp(x, lo, hi); }),
               [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var elementwise(ElementwiseOp op, Var a) {
  switch (op) {
    case ElementwiseOp::kSigmoid: return sigmoid(a);
    case ElementwiseOp::kTanh: return tanh(a);
    case ElementwiseOp::kAbs: return abs(a);
    default: throw ContractError("elementwise: binary op used with one operand");
  }
}

Var elementwise(ElementwiseOp op, Var a, Var b) {
  switch (op) {
    case ElementwiseOp::kAdd: return add(a, b);
    case ElementwiseOp::kSub: return sub(a, b);
    case ElementwiseOp::kMul: return mul(a, b);
    default: throw ContractError("elementwise: unary op used with two operands");
  }
}

Var softmax_rows(Var a) {
  Graph& g = graph_of(a);
  if (a.value().empty()) throw DimensionError("softmax_rows: empty input");
  Matrix value(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto x = a.value().row(r);
    auto y = value.row(r);
    const double mx = *std::max_element(x.begin(), x.end());
    double total = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      y[c] = std::exp(x[c] - mx);
      total += y[c];
    }
    for (double& v : y) v /= total;
  }
  const std::size_t pa = a.id();
  return g.make(std::move(value), {pa}, [pa](Graph& gr, std::size_t self) {
    const Matrix& y = gr.value(self);
    const Matrix& up = gr.grad(self);
    Matrix& dx = gr.grad_slot(pa);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const auto yr = y.row(r);
      const auto ur = up.row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * ur[c];
      auto dr = dx.row(r);
      for (std::size_t c = 0; c < yr.size(); ++c) dr[c] += yr[c] * (ur[c] - dot);
    }
  });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  Matrix value(1, 1, a.value().sum());
  const std::size_t pa = a.id();
  return g.make(std::move(value), {pa}, [pa](Graph& gr, std::size_t self) {
    const double up = gr.grad(self)(0, 0);
    for (double& d : gr.grad_slot(pa).data()) d += up;
  });
}

Var mean(Var a) {
  if (a.value().empty()) throw ContractError("mean: empty input");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var concat_cols(Var a, Var b) {
  Graph& g = graph_of(a, b);
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
  const std::size_t ca = a.cols(), cb = b.cols();
  Matrix value(a.rows(), ca + cb);
  for (std::size_t r = 0; r < value.rows(); ++r) {
    auto out = value.row(r);
    std::copy_n(a.value().row(r).begin(), ca, out.begin());
    std::copy_n(b.value().row(r).begin(), cb, out.begin() + static_cast<std::ptrdiff_t>(ca));
  }
  const std::size_t pa = a.id(), pb = b.id();
  return g.make(std::move(value), {pa, pb}, [pa, pb, ca, cb](Graph& gr, std::size_t self) {
    const Matrix& up = gr.grad(self);
    if (gr.requires_grad(pa)) {
      Matrix& d = gr.grad_slot(pa);
      for (std::size_t r = 0; r < up.rows(); ++r) {
        auto dr = d.row(r);
        const auto ur = up.row(r);
        for (std::size_t c = 0; c < ca; ++c) dr[c] += ur[c];
      }
    }
    if (gr.requires_grad(pb)) {
      Matrix& d = gr.grad_slot(pb);
      for (std::size_t r = 0; r < up.rows(); ++r) {
        auto dr = d.row(r);
        const auto ur = up.row(r);
        for (std::size_t c = 0; c < cb; ++c) dr[c] += ur[ca + c];
      }
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Graph& g = graph_of(a);
  if (begin + count > a.rows() || count == 0) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of " + a.shape_string());
  }
  const std::size_t cols = a.cols();
  const auto src = a.value().data();
  Matrix value(count, cols,
               std::vector<double>(src.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                                   src.begin() + static_cast<std::ptrdiff_t>((begin + count) * cols)));
  const std::size_t pa = a.id();
  return g.make(std::move(value), {pa}, [pa, begin, cols](Graph& gr, std::size_t self) {
    const auto up = gr.grad(self).data();
    auto d = gr.grad_slot(pa).data().subspan(begin * cols, up.size());
    for (std::size_t i = 0; i < up.size(); ++i) d[i] += up[i];
  });
}

Var vstack(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("vstack: no parts");
  Graph& g = graph_of(parts.front());
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  std::vector<std::size_t> ids;
  ids.reserve(parts.size());
  for (const Var& p : parts) {
    if (p.graph() != &g) throw ContractError("vstack: parts belong to different graphs");
    if (p.cols() != cols) {
      throw DimensionError("vstack: column mismatch " + p.shape_string() + " vs " +
                           parts.front().shape_string());
    }
    rows += p.rows();
    ids.push_back(p.id());
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const Var& p : parts) {
    const auto d = p.value().data();
    data.insert(data.end(), d.begin(), d.end());
  }
  Matrix value(rows, cols, std::move(data));
  std::vector<std::size_t> parents = ids;
  return g.make(std::move(value), std::move(parents), [ids](Graph& gr, std::size_t self) {
    const auto up = gr.grad(self).data();
    std::size_t offset = 0;
    for (std::size_t id : ids) {
      const std::size_t n = gr.value(id).size();
      if (gr.requires_grad(id)) {
        auto d = gr.grad_slot(id).data();
        for (std::size_t i = 0; i < n; ++i) d[i] += up[offset + i];
      }
      offset += n;
    }
  });
}

namespace {

std::size_t steps_for(const Matrix& m, std::size_t groups, const char* what) {
  if (groups == 0 || m.rows() % groups != 0) {
    throw DimensionError(std::string(what) + ": " + m.shape_string() +
                         " rows are not divisible into " + std::to_string(groups) + " groups");
  }
  return m.rows() / groups;
}

}  // namespace

namespace {

// c[m x n] += a[m x k] * b[k x n] over strided row-major blocks; i-k-j order
// so each output entry sums its k terms in ascending order.
void gemm_strided(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                  double* c, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* __restrict ci = c + i * ldc;
    const double* ai = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* __restrict bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// Rows gi, gi + groups, ... of `m` as a dense block, transposed (cols x steps).
void gather_group_t(const Matrix& m, std::size_t gi, std::size_t groups, std::size_t steps,
                    std::vector<double>& out) {
  const std::size_t cols = m.cols();
  out.assign(cols * steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto r = m.row(t * groups + gi);
    for (std::size_t c = 0; c < cols; ++c) out[c * steps + t] = r[c];
  }
}

}  // namespace

Var grouped_scores(Var q, Var k, std::size_t groups) {
  Graph& g = graph_of(q, k);
  require_same_shape(q.value(), k.value(), "grouped_scores");
  const std::size_t steps = steps_for(q.value(), groups, "grouped_scores");
  const std::size_t dim = q.cols();
  Matrix value(q.rows(), steps);
  const std::size_t row_q = groups * dim, row_s = groups * steps;
  std::vector<double> kt;
  for (std::size_t gi = 0; gi < groups; ++gi) {
    gather_group_t(k.value(), gi, groups, steps, kt);
    gemm_strided(q.value().data().data() + gi * dim, row_q, kt.data(), steps,
                 value.data().data() + gi * steps, row_s, steps, dim, steps);
  }
  const std::size_t pq = q.id(), pk = k.id();
  return g.make(std::move(value), {pq, pk},
                [pq, pk, groups, steps, dim](Graph& gr, std::size_t self) {
    const Matrix& up = gr.grad(self);
    const std::size_t row_q = groups * dim, row_s = groups * steps;
    std::vector<double> ut;
    if (gr.requires_grad(pq)) {
      // dQ = U K
      Matrix& dq = gr.grad_slot(pq);
      for (std::size_t gi = 0; gi < groups; ++gi) {
        gemm_strided(up.data().data() + gi * steps, row_s, gr.value(pk).data().data() + gi * dim,
                     row_q, dq.data().data() + gi * dim, row_q, steps, steps, dim);
      }
    }
    if (gr.requires_grad(pk)) {
      // dK = U^T Q
      Matrix& dk = gr.grad_slot(pk);
      for (std::size_t gi = 0; gi < groups; ++gi) {
        gather_group_t(up, gi, groups, steps, ut);
        gemm_strided(ut.data(), steps, gr.value(pq).data().data() + gi * dim, row_q,
                     dk.data().data() + gi * dim, row_q, steps, steps, dim);
      }
    }
  });
}

Var grouped_mix(Var p, Var v, std::size_t groups) {
  Graph& g = graph_of(p, v);
  const std::size_t steps = steps_for(v.value(), groups, "grouped_mix");
  if (p.rows() != v.rows() || p.cols() != steps) {
    throw DimensionError("grouped_mix: weights " + p.shape_string() + " incompatible with values " +
                         v.shape_string());
  }
  const std::size_t dim = v.cols();
  Matrix value(v.rows(), dim);
  const std::size_t row_v = groups * dim, row_p = groups * steps;
  for (std::size_t gi = 0; gi < groups; ++gi) {
    gemm_strided(p.value().data().data() + gi * steps, row_p, v.value().data().data() + gi * dim,
                 row_v, value.data().data() + gi * dim, row_v, steps, steps, dim);
  }
  const std::size_t pp = p.id(), pv_id = v.id();
  return g.make(std::move(value), {pp, pv_id},
                [pp, pv_id, groups, steps, dim](Graph& gr, std::size_t self) {
    const Matrix& up = gr.grad(self);
    const std::size_t row_v = groups * dim, row_p = groups * steps;
    std::vector<double> tmp;
    if (gr.requires_grad(pp)) {
      // dP = U V^T
      Matrix& dp = gr.grad_slot(pp);
      for (std::size_t gi = 0; gi < groups; ++gi) {
        gather_group_t(gr.value(pv_id), gi, groups, steps, tmp);
        gemm_strided(up.data().data() + gi * dim, row_v, tmp.data(), steps,
                     dp.data().data() + gi * steps, row_p, steps, dim, steps);
      }
    }
    if (gr.requires_grad(pv_id)) {
      // dV = P^T U
      Matrix& dv = gr.grad_slot(pv_id);
      for (std::size_t gi = 0; gi < groups; ++gi) {
        gather_group_t(gr.value(pp), gi, groups, steps, tmp);
        gemm_strided(tmp.data(), steps, up.data().data() + gi * dim, row_v,
                     dv.data().data() + gi * dim, row_v, steps, steps, dim);
      }
    }
  });
}

}  // namespace algan
