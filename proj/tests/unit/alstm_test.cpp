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

#include <cmath>

#include <gtest/gtest.h>

#include "algan/alstm.hpp"
#include "algan/errors.hpp"
#include "test_support.hpp"

namespace algan {
namespace {

using test::Rng;

StackSpec spec_of(std::size_t in, std::size_t hid, std::size_t layers, bool proj_h = true,
                  CellVariant variant = CellVariant::kAlstm) {
  StackSpec s;
  s.input_dim = in;
  s.hidden_dim = hid;
  s.layers = layers;
  s.use_proj_h = proj_h;
  s.variant = variant;
  return s;
}

ParameterSet registered(const StackSpec& spec, std::uint64_t seed,
                        InitScheme scheme = InitScheme::kXavierUniform) {
  ParameterSet set(seed, scheme);
  spec.register_params(set, "s");
  return set;
}

void randomize_biases(ParameterSet& set, Rng& rng) {
  for (auto& [name, p] : set) {
    if (name.ends_with(".b") || name.find(".b_") != std::string::npos) {
      p.value = test::random_matrix(rng, 1, p.value.cols(), 0.5);
    }
  }
}

Matrix tanh_linear(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = matmul(x, w);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) = std::tanh(y(r, c) + b(0, c));
  }
  return y;
}

Matrix direct_attention(const Matrix& x, const Matrix& wq, const Matrix& wk, const Matrix& wv) {
  const Matrix q = matmul(x, wq), k = matmul(x, wk), v = matmul(x, wv);
  const std::size_t n = x.rows();
  Matrix out(n, v.cols());
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> s(n);
    double mx = -1e300;
    for (std::size_t u = 0; u < n; ++u) {
      double dot = 0.0;
      for (std::size_t c = 0; c < q.cols(); ++c) dot += q(t, c) * k(u, c);
      s[u] = dot / std::sqrt(static_cast<double>(k.cols()));
      mx = std::max(mx, s[u]);
    }
    double total = 0.0;
    for (double& e : s) total += (e = std::exp(e - mx));
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t c = 0; c < v.cols(); ++c) out(t, c) += s[u] / total * v(u, c);
    }
  }
  return out;
}

TEST(Alstm, ZeroInputBranchLeavesHiddenBranch) {
  Rng rng(1);
  const auto spec = spec_of(2, 4, 1);
  auto set = registered(spec, 3);
  set.at("s.layer0.proj_x.W").value.fill(0.0);
  set.at("s.layer0.proj_x.b").value.fill(0.0);
  const auto x = test::random_matrix(rng, 6, 2);
  Graph g;
  const auto stack = spec.bind(g, set, "s", Binding::kFrozen);
  const auto& layer = stack.layers[0];
  const auto out = alstm_forward(layer, g.constant(x)).value();
  const Var h = lstm_sequence(layer.lstm, g.constant(x));
  const auto ah = linear_tanh(*layer.proj_h, self_attention(layer.attn_h, h)).value();
  EXPECT_EQ(out, ah);
}

TEST(Alstm, ZeroParametersGiveZeroRows) {
  Rng rng(2);
  for (std::size_t layers : {1u, 3u}) {
    const auto spec = spec_of(3, 5, layers);
    auto set = registered(spec, 1, InitScheme::kZeros);
    Graph g;
    const auto out = alstm_stack_forward(spec.bind(g, set, "s", Binding::kFrozen),
                                         g.constant(test::random_matrix(rng, 7, 3)))
                         .value();
    EXPECT_EQ(out, Matrix(7, 5));
  }
}

TEST(Alstm, MatchesCompositionOracle) {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const auto spec = spec_of(2, 3, 1, /*proj_h=*/false);
    auto set = registered(spec, 10 + rep);
    randomize_biases(set, rng);
    const auto x = test::random_matrix(rng, 4, 2);
    Graph g;
    const auto stack = spec.bind(g, set, "s", Binding::kFrozen);
    const auto out = alstm_forward(stack.layers[0], g.constant(x)).value();

    const Matrix h = lstm_sequence(stack.layers[0].lstm, g.constant(x)).value();
    const auto w = [&](const std::string& n) { return set.at("s.layer0." + n).value; };
    const Matrix ah = direct_attention(h, w("attn_h.W_q"), w("attn_h.W_k"), w("attn_h.W_v"));
    const Matrix ax = tanh_linear(direct_attention(x, w("attn_x.W_q"), w("attn_x.W_k"), w("attn_x.W_v")),
                                  w("proj_x.W"), w("proj_x.b"));
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], ax[i] + ah[i], 1e-12);
  }
}

TEST(AlstmStack, OneLayerEqualsForwardAndTwoLayersCompose) {
  Rng rng(4);
  const auto x = test::random_matrix(rng, 5, 2);
  {
    const auto spec = spec_of(2, 3, 1);
    auto set = registered(spec, 5);
    Graph g;
    const auto stack = spec.bind(g, set, "s", Binding::kFrozen);
    EXPECT_EQ(alstm_stack_forward(stack, g.constant(x)).value(),
              alstm_forward(stack.layers[0], g.constant(x)).value());
  }
  {
    const auto spec = spec_of(2, 3, 2);
    auto set = registered(spec, 6);
    randomize_biases(set, rng);
    Graph g;
    const auto stack = spec.bind(g, set, "s", Binding::kFrozen);
    const Var first = alstm_forward(stack.layers[0], g.constant(x));
    EXPECT_EQ(alstm_stack_forward(stack, g.constant(x)).value(),
              alstm_forward(stack.layers[1], first).value());
  }
}

TEST(AlstmStack, PlainVariantIsTheLstmSequence) {
  Rng rng(5);
  const auto spec = spec_of(2, 4, 2, true, CellVariant::kPlainLstm);
  auto set = registered(spec, 7);
  const auto x = test::random_matrix(rng, 6, 2);
  Graph g;
  const auto stack = spec.bind(g, set, "s", Binding::kFrozen);
  const Var h1 = lstm_sequence(stack.layers[0].lstm, g.constant(x));
  EXPECT_EQ(alstm_stack_forward(stack, g.constant(x)).value(),
            lstm_sequence(stack.layers[1].lstm, h1).value());
}

TEST(AlstmStack, ParameterCountDeltaIsAttentionAndProjections) {
  for (bool proj_h : {true, false}) {
    for (std::size_t layers : {1u, 3u}) {
      const std::size_t in = 4, hid = 6;
      const auto a = registered(spec_of(in, hid, layers, proj_h), 1);
      const auto p = registered(spec_of(in, hid, layers, proj_h, CellVariant::kPlainLstm), 1);
      std::size_t expected = 0;
      for (std::size_t k = 0; k < layers; ++k) {
        const std::size_t d_in = k == 0 ? in : hid;
        expected += 3 * hid * hid + 3 * d_in * d_in;  // attention projections
        expected += d_in * hid + hid;                  // proj_x
        if (proj_h) expected += hid * hid + hid;       // proj_h
      }
      EXPECT_EQ(a.scalar_count() - p.scalar_count(), expected);
    }
  }
}

TEST(Alstm, OutputBoundedAndShapedByHiddenWidth) {
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t in = test::uniform_size(rng, 1, 5), hid = test::uniform_size(rng, 1, 5);
    const bool proj_h = rep % 2 == 0;
    const auto spec = spec_of(in, hid, 1, proj_h);
    auto set = registered(spec, rep);
    randomize_biases(set, rng);
    const std::size_t n = test::uniform_size(rng, 1, 9);
    Graph g;
    const auto out = alstm_forward(spec.bind(g, set, "s", Binding::kFrozen).layers[0],
                                   g.constant(test::random_matrix(rng, n, in, 5.0)))
                         .value();
    ASSERT_EQ(out.rows(), n);
    ASSERT_EQ(out.cols(), hid);
    for (double v : out.data()) {
      EXPECT_GT(v, -2.0);
      EXPECT_LT(v, 2.0);
    }
  }
}

TEST(Alstm, BatchedEqualsSingleBitExactly) {
  Rng rng(7);
  const auto spec = spec_of(2, 3, 2);
  auto set = registered(spec, 8);
  randomize_biases(set, rng);
  const std::size_t steps = 6, batch = 3;
  std::vector<Matrix> windows;
  Matrix packed(steps * batch, 2);
  for (std::size_t b = 0; b < batch; ++b) windows.push_back(test::random_matrix(rng, steps, 2));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < 2; ++c) packed(t * batch + b, c) = windows[b](t, c);
    }
  }
  Graph g;
  const auto stack = spec.bind(g, set, "s", Binding::kFrozen);
  const auto all = alstm_stack_forward(stack, g.constant(packed), batch).value();
  for (std::size_t b = 0; b < batch; ++b) {
    const auto one = alstm_stack_forward(stack, g.constant(windows[b])).value();
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(all(t * batch + b, c), one(t, c));
    }
  }
}

TEST(Alstm, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  for (int seed = 0; seed < 3; ++seed) {
    const auto spec = spec_of(2, 3, 2);
    auto set = registered(spec, seed);
    randomize_biases(set, rng);
    const auto x = test::random_matrix(rng, 8, 2);
    const auto check = test::check_parameter_gradients(
        set,
        [&](Graph& g) {
          const auto out =
              alstm_stack_forward(spec.bind(g, set, "s", Binding::kTrainable), g.constant(x), 2);
          return sum(mul(out, out));
        },
        rng, 4);
    EXPECT_TRUE(check.ok()) << check.first_failure;
  }
}

TEST(Alstm, VariantNamesRoundTrip) {
  EXPECT_EQ(cell_variant_from_string("alstm"), CellVariant::kAlstm);
  EXPECT_EQ(cell_variant_from_string("plain_lstm"), CellVariant::kPlainLstm);
  EXPECT_EQ(to_string(CellVariant::kPlainLstm), "plain_lstm");
  EXPECT_THROW(cell_variant_from_string("gru"), ConfigError);
}

}  // namespace
}  // namespace algan
