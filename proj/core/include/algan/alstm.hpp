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
#include <string_view>
#include <vector>

#include "algan/layers.hpp"

namespace algan {

// Recurrent unit used at every site of the generator and discriminator.
enum class CellVariant {
  kAlstm,      // LSTM corrected by input and hidden-state attention
  kPlainLstm,  // bare LSTM hidden sequence (baseline)
};

std::string_view to_string(CellVariant variant);
CellVariant cell_variant_from_string(std::string_view name);

// One adjusted-LSTM layer:
//   h   = lstm_sequence(x)
//   A^h = proj_h(attention_h(h))       (proj_h optional, linear + tanh)
//   A^x = proj_x(attention_x(x))       (linear + tanh, input -> hidden width)
//   out = A^x + A^h                    (row-aligned per time step)
struct AlstmLayerParams {
  LstmCellParams lstm;
  AttentionParams attn_h;
  AttentionParams attn_x;
  std::optional<LinearParams> proj_h;
  LinearParams proj_x;

  void validate() const;
};

Var alstm_forward(const AlstmLayerParams& params, Var xs, std::size_t batch = 1);

// A bound stack. For kPlainLstm only `lstm` of each layer is used.
struct AlstmStackParams {
  CellVariant variant = CellVariant::kAlstm;
  std::vector<AlstmLayerParams> layers;
};

// Feeds each layer's (steps * batch) x hidden output into the next layer.
Var alstm_stack_forward(const AlstmStackParams& params, Var xs, std::size_t batch = 1);

// Shape of a stack; registers and binds its parameters under a prefix.
struct StackSpec {
  std::size_t input_dim = 1;
  std::size_t hidden_dim = 100;
  std::size_t layers = 1;
  CellVariant variant = CellVariant::kAlstm;
  bool use_proj_h = true;

  void register_params(ParameterSet& set, const std::string& prefix) const;
  AlstmStackParams bind(Graph& graph, ParameterSet& set, const std::string& prefix,
                        Binding mode) const;
};

}  // namespace algan
