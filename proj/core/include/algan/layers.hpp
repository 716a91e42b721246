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
#include <optional>
#include <string>

#include "algan/autograd.hpp"
#include "algan/parameters.hpp"

namespace algan {

// Sequences are passed as time-major batches: a (steps * batch) x dim matrix
// whose row t * batch + b holds time step t of sequence b. With batch == 1
// the rows are simply the time steps.

// How parameters enter a graph: as trainable leaves that collect gradients,
// or as constants (read-only, safe to share across threads).
enum class Binding { kTrainable, kFrozen };

Var bind(Graph& graph, Parameter& p, Binding mode);
Var bind(Graph& graph, const Parameter& p);

// Weights for one LSTM cell. Weight matrices are (input + hidden) x hidden
// and multiply the row [h_{t-1}, x_t]; biases are 1 x hidden rows.
struct LstmCellParams {
  Var w_f, w_i, w_c, w_o;
  Var b_f, b_i, b_c, b_o;

  std::size_t hidden_dim() const { return w_f.cols(); }
  std::size_t input_dim() const { return w_f.rows() - w_f.cols(); }
  void validate() const;
};

struct LstmState {
  Var h;
  Var c;
};

LstmState zero_lstm_state(Graph& graph, std::size_t batch, std::size_t hidden_dim);

// One step of the cell:
//   f = sigma([h, x] W_f + b_f)    i = sigma([h, x] W_i + b_i)
//   C~ = tanh([h, x] W_C + b_C)    C = f * C_prev + i * C~
//   o = sigma([h, x] W_o + b_o)    h = o * tanh(C)
LstmState lstm_step(const LstmCellParams& params, const LstmState& state, Var x_t);

// Folds lstm_step over all steps; returns the hidden rows in the same
// time-major layout as `xs`. Starts from zeros unless `init` is given.
Var lstm_sequence(const LstmCellParams& params, Var xs, std::size_t batch = 1,
                  const std::optional<LstmState>& init = std::nullopt);

// Scaled dot-product self-attention. Projections are optional: a missing
// projection means identity.
struct AttentionParams {
  std::optional<Var> w_q, w_k, w_v;
  std::size_t key_dim = 0;  // scaling uses sqrt(key_dim)

  static AttentionParams identity(std::size_t dim);
  static AttentionParams projected(Var w_q, Var w_k, Var w_v);
};

struct AttentionResult {
  Var output;   // (steps * batch) x value_dim
  Var weights;  // (steps * batch) x steps, rows sum to one
};

// softmax(Q K^T / sqrt(d_k)) V over the whole window (no causal mask).
AttentionResult self_attention_full(const AttentionParams& params, Var inputs,
                                    std::size_t batch = 1);
Var self_attention(const AttentionParams& params, Var inputs, std::size_t batch = 1);

struct LinearParams {
  Var w;  // in x out
  Var b;  // 1 x out
};

Var linear(const LinearParams& params, Var inputs);
Var linear_tanh(const LinearParams& params, Var inputs);

// Parameter registration and binding under a name prefix.
void register_lstm(ParameterSet& set, const std::string& prefix, std::size_t input_dim,
                   std::size_t hidden_dim);
LstmCellParams bind_lstm(Graph& graph, ParameterSet& set, const std::string& prefix,
                         Binding mode);

void register_attention(ParameterSet& set, const std::string& prefix, std::size_t dim);
AttentionParams bind_attention(Graph& graph, ParameterSet& set, const std::string& prefix,
                               Binding mode);

void register_linear(ParameterSet& set, const std::string& prefix, std::size_t in_dim,
                     std::size_t out_dim);
LinearParams bind_linear(Graph& graph, ParameterSet& set, const std::string& prefix,
                         Binding mode);

}  // namespace algan
