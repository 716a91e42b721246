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

#include "algan/alstm.hpp"

#include "algan/errors.hpp"

namespace algan {

std::string_view to_string(CellVariant variant) {
  switch (variant) {
    case CellVariant::kAlstm: return "alstm";
    case CellVariant::kPlainLstm: return "plain_lstm";
  }
  return "unknown";
}

CellVariant cell_variant_from_string(std::string_view name) {
  if (name == "alstm") return CellVariant::kAlstm;
  if (name == "plain_lstm") return CellVariant::kPlainLstm;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected alstm|plain_lstm)");
}

void AlstmLayerParams::validate() const {
  lstm.validate();
  const std::size_t hidden = lstm.hidden_dim();
  if (proj_x.w.cols() != hidden) {
    throw DimensionError("alstm: input projection " + proj_x.w.shape_string() +
                         " must produce hidden width " + std::to_string(hidden));
  }
  if (proj_h && proj_h->w.cols() != hidden) {
    throw DimensionError("alstm: hidden projection " + proj_h->w.shape_string() +
                         " must produce hidden width " + std::to_string(hidden));
  }
}

Var alstm_forward(const AlstmLayerParams& params, Var xs, std::size_t batch) {
  params.validate();
  const Var h = lstm_sequence(params.lstm, xs, batch);
  Var attended_h = self_attention(params.attn_h, h, batch);
  if (params.proj_h) attended_h = linear_tanh(*params.proj_h, attended_h);
  const Var attended_x = linear_tanh(params.proj_x, self_attention(params.attn_x, xs, batch));
  if (attended_h.cols() != attended_x.cols()) {
    throw DimensionError("alstm: cannot add A^x " + attended_x.shape_string() + " to A^h " +
                         attended_h.shape_string());
  }
  return add(attended_x, attended_h);
}

Var alstm_stack_forward(const AlstmStackParams& params, Var xs, std::size_t batch) {
  if (params.layers.empty()) throw ContractError("alstm stack has no layers");
  Var out = xs;
  for (const AlstmLayerParams& layer : params.layers) {
    out = params.variant == CellVariant::kAlstm ? alstm_forward(layer, out, batch)
                                                : lstm_sequence(layer.lstm, out, batch);
  }
  return out;
}

namespace {

std::string layer_prefix(const std::string& prefix, std::size_t k) {
  return prefix + ".layer" + std::to_string(k);
}

}  // namespace

void StackSpec::register_params(ParameterSet& set, const std::string& prefix) const {
  if (layers == 0 || hidden_dim == 0 || input_dim == 0) {
    throw ConfigError("stack '" + prefix + "' needs positive input, hidden and layer counts");
  }
  for (std::size_t k = 0; k < layers; ++k) {
    const std::string p = layer_prefix(prefix, k);
    const std::size_t in = k == 0 ? input_dim : hidden_dim;
    register_lstm(set, p + ".lstm", in, hidden_dim);
    if (variant == CellVariant::kPlainLstm) continue;
    register_attention(set, p + ".attn_h", hidden_dim);
    register_attention(set, p + ".attn_x", in);
    if (use_proj_h) register_linear(set, p + ".proj_h", hidden_dim, hidden_dim);
    register_linear(set, p + ".proj_x", in, hidden_dim);
  }
}

AlstmStackParams StackSpec::bind(Graph& graph, ParameterSet& set, const std::string& prefix,
                                 Binding mode) const {
  AlstmStackParams stack;
  stack.variant = variant;
  for (std::size_t k = 0; k < layers; ++k) {
    const std::string p = layer_prefix(prefix, k);
    AlstmLayerParams layer;
    layer.lstm = bind_lstm(graph, set, p + ".lstm", mode);
    if (variant == CellVariant::kAlstm) {
      layer.attn_h = bind_attention(graph, set, p + ".attn_h", mode);
      layer.attn_x = bind_attention(graph, set, p + ".attn_x", mode);
      if (use_proj_h) layer.proj_h = bind_linear(graph, set, p + ".proj_h", mode);
      layer.proj_x = bind_linear(graph, set, p + ".proj_x", mode);
    }
    stack.layers.push_back(std::move(layer));
  }
  return stack;
}

}  // namespace algan
