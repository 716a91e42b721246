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

#include "algan/layers.hpp"

#include <cmath>
#include <vector>

#include "algan/errors.hpp"

namespace algan {

Var bind(Graph& graph, Parameter& p, Binding mode) {
  return mode == Binding::kTrainable ? graph.param(p) : graph.constant(p.value);
}

Var bind(Graph& graph, const Parameter& p) { return graph.constant(p.value); }

void LstmCellParams::validate() const {
  const std::size_t rows = w_f.rows();
  const std::size_t hidden = w_f.cols();
  for (const Var* w : {&w_i, &w_c, &w_o}) {
    if (w->rows() != rows || w->cols() != hidden) {
      throw DimensionError("lstm: gate weights disagree: " + w_f.shape_string() + " vs " +
                           w->shape_string());
    }
  }
  if (rows <= hidden) {
    throw DimensionError("lstm: weight " + w_f.shape_string() +
                         " leaves no room for the input part");
  }
  for (const Var* b : {&b_f, &b_i, &b_c, &b_o}) {
    if (b->rows() != 1 || b->cols() != hidden) {
      throw DimensionError("lstm: bias " + b->shape_string() + " does not match hidden width " +
                           std::to_string(hidden));
    }
  }
}

LstmState zero_lstm_state(Graph& graph, std::size_t batch, std::size_t hidden_dim) {
  return {graph.constant(Matrix(batch, hidden_dim)), graph.constant(Matrix(batch, hidden_dim))};
}

LstmState lstm_step(const LstmCellParams& params, const LstmState& state, Var x_t) {
  params.validate();
  const std::size_t hidden = params.hidden_dim();
  if (x_t.cols() != params.input_dim()) {
    throw DimensionError("lstm_step: input " + x_t.shape_string() + " but cell expects width " +
                         std::to_string(params.input_dim()));
  }
  if (state.h.cols() != hidden || state.c.cols() != hidden || state.h.rows() != x_t.rows() ||
      state.c.rows() != x_t.rows()) {
    throw DimensionError("lstm_step: state " + state.h.shape_string() + "/" +
                         state.c.shape_string() + " does not fit input " + x_t.shape_string() +
                         " and hidden width " + std::to_string(hidden));
  }
  const Var hx = concat_cols(state.h, x_t);
  const Var f = sigmoid(add_row(matmul(hx, params.w_f), params.b_f));
  const Var i = sigmoid(add_row(matmul(hx, params.w_i), params.b_i));
  const Var c_tilde = tanh(add_row(matmul(hx, params.w_c), params.b_c));
  const Var c = add(mul(f, state.c), mul(i, c_tilde));
  const Var o = sigmoid(add_row(matmul(hx, params.w_o), params.b_o));
  const Var h = mul(o, tanh(c));
  return {h, c};
}

Var lstm_sequence(const LstmCellParams& params, Var xs, std::size_t batch,
                  const std::optional<LstmState>& init) {
  if (batch == 0 || xs.rows() == 0) throw ContractError("lstm_sequence: empty sequence");
  if (xs.rows() % batch != 0) {
    throw DimensionError("lstm_sequence: " + xs.shape_string() + " is not a batch of " +
                         std::to_string(batch) + " sequences");
  }
  params.validate();
  const std::size_t steps = xs.rows() / batch;
  LstmState state = init ? *init : zero_lstm_state(*xs.graph(), batch, params.hidden_dim());
  std::vector<Var> hidden;
  hidden.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    state = lstm_step(params, state, slice_rows(xs, t * batch, batch));
    hidden.push_back(state.h);
  }
  return steps == 1 ? hidden.front() : vstack(hidden);
}

AttentionParams AttentionParams::identity(std::size_t dim) {
  AttentionParams p;
  p.key_dim = dim;
  return p;
}

AttentionParams AttentionParams::projected(Var w_q, Var w_k, Var w_v) {
  if (w_q.rows() != w_k.rows() || w_q.cols() != w_k.cols() || w_v.rows() != w_q.rows()) {
    throw DimensionError("attention: projections disagree: " + w_q.shape_string() + ", " +
                         w_k.shape_string() + ", " + w_v.shape_string());
  }
  AttentionParams p;
  p.w_q = w_q;
  p.w_k = w_k;
  p.w_v = w_v;
  p.key_dim = w_k.cols();
  return p;
}

AttentionResult self_attention_full(const AttentionParams& params, Var inputs,
                                    std::size_t batch) {
  if (batch == 0 || inputs.rows() == 0) throw ContractError("self_attention: empty window");
  if (inputs.rows() % batch != 0) {
    throw DimensionError("self_attention: " + inputs.shape_string() + " is not a batch of " +
                         std::to_string(batch) + " sequences");
  }
  auto project = [&](const std::optional<Var>& w) {
    if (!w) return inputs;
    if (w->rows() != inputs.cols()) {
      throw DimensionError("self_attention: projection " + w->shape_string() +
                           " does not accept inputs " + inputs.shape_string());
    }
    return matmul(inputs, *w);
  };
  const Var q = project(params.w_q);
  const Var k = project(params.w_k);
  const Var v = project(params.w_v);
  if (k.cols() != params.key_dim) {
    throw DimensionError("self_attention: key width " + std::to_string(k.cols()) +
                         " differs from d_k " + std::to_string(params.key_dim));
  }
  const Var scores =
      scale(grouped_scores(q, k, batch), 1.0 / std::sqrt(static_cast<double>(params.key_dim)));
  const Var weights = softmax_rows(scores);
  return {grouped_mix(weights, v, batch), weights};
}

Var self_attention(const AttentionParams& params, Var inputs, std::size_t batch) {
  return self_attention_full(params, inputs, batch).output;
}

Var linear(const LinearParams& params, Var inputs) {
  if (inputs.cols() != params.w.rows()) {
    throw DimensionError("linear: inputs " + inputs.shape_string() + " do not fit weights " +
                         params.w.shape_string());
  }
  return add_row(matmul(inputs, params.w), params.b);
}

Var linear_tanh(const LinearParams& params, Var inputs) { return tanh(linear(params, inputs)); }

void register_lstm(ParameterSet& set, const std::string& prefix, std::size_t input_dim,
                   std::size_t hidden_dim) {
  for (const char* gate : {"f", "i", "C", "o"}) {
    set.add_weight(prefix + ".W_" + gate, input_dim + hidden_dim, hidden_dim);
    set.add_zeros(prefix + ".b_" + gate, 1, hidden_dim);
  }
}

LstmCellParams bind_lstm(Graph& graph, ParameterSet& set, const std::string& prefix,
                         Binding mode) {
  auto b = [&](const char* name) { return bind(graph, set.at(prefix + "." + name), mode); };
  LstmCellParams p{b("W_f"), b("W_i"), b("W_C"), b("W_o"),
                   b("b_f"), b("b_i"), b("b_C"), b("b_o")};
  p.validate();
  return p;
}

void register_attention(ParameterSet& set, const std::string& prefix, std::size_t dim) {
  for (const char* w : {"W_q", "W_k", "W_v"}) set.add_weight(prefix + "." + w, dim, dim);
}

AttentionParams bind_attention(Graph& graph, ParameterSet& set, const std::string& prefix,
                               Binding mode) {
  auto b = [&](const char* name) { return bind(graph, set.at(prefix + "." + name), mode); };
  return AttentionParams::projected(b("W_q"), b("W_k"), b("W_v"));
}

void register_linear(ParameterSet& set, const std::string& prefix, std::size_t in_dim,
                     std::size_t out_dim) {
  set.add_weight(prefix + ".W", in_dim, out_dim);
  set.add_zeros(prefix + ".b", 1, out_dim);
}

LinearParams bind_linear(Graph& graph, ParameterSet& set, const std::string& prefix,
                         Binding mode) {
  return {bind(graph, set.at(prefix + ".W"), mode), bind(graph, set.at(prefix + ".b"), mode)};
}

}  // namespace algan
