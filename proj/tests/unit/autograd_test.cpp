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
#include <random>

#include <gtest/gtest.h>

#include "algan/autograd.hpp"
#include "algan/errors.hpp"
#include "algan/parameters.hpp"
#include "test_support.hpp"

namespace algan {
namespace {

using test::Rng;

TEST(Matrix, ShapeAndAccess) {
  Matrix m(2, 3, 1.5);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.shape_string(), "2x3");
  m(1, 2) = 4.0;
  EXPECT_EQ(m[5], 4.0);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST(Matrix, MatmulExamples) {
  const auto id = Matrix::from_rows({{1, 0}, {0, 1}});
  const auto v = Matrix::from_rows({{3}, {4}});
  EXPECT_EQ(matmul(id, v), v);
  EXPECT_EQ(matmul(Matrix::from_rows({{1, 2}}), v), Matrix::from_rows({{11}}));
  EXPECT_THROW(matmul(v, v), DimensionError);
}

TEST(Matrix, MatmulMatchesNaiveLoop) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = test::uniform_size(rng, 1, 7), k = test::uniform_size(rng, 1, 7),
               n = test::uniform_size(rng, 1, 7);
    const auto a = test::random_matrix(rng, m, k), b = test::random_matrix(rng, k, n);
    const auto c = matmul(a, b);
    Matrix bt_out(m, n), at_out(m, n);
    matmul_bt_into(a, b.transposed(), bt_out, false);
    matmul_at_into(a.transposed(), b, at_out, false);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += a(i, p) * b(p, j);
        EXPECT_NEAR(c(i, j), acc, 1e-12);
        EXPECT_NEAR(bt_out(i, j), acc, 1e-12);
        EXPECT_NEAR(at_out(i, j), acc, 1e-12);
      }
    }
  }
}

TEST(Autograd, MatmulGradientExample) {
  Graph g;
  const Var a = g.variable(Matrix::from_rows({{1, 2}}));
  const Var b = g.constant(Matrix::from_rows({{3}, {4}}));
  g.backward(sum(matmul(a, b)));
  EXPECT_EQ(a.grad(), Matrix::from_rows({{3, 4}}));

  const auto check = test::check_input_gradients(
      [](Graph&, const std::vector<Var>& v) { return sum(matmul(v[0], v[1])); },
      {Matrix::from_rows({{1, 2}}), Matrix::from_rows({{3}, {4}})}, 1e-5);
  EXPECT_TRUE(check.ok()) << check.first_failure;
}

TEST(Autograd, ActivationExamples) {
  Graph g;
  const Var z = g.variable(Matrix(1, 1, 0.0));
  EXPECT_EQ(sigmoid(z).value()(0, 0), 0.5);
  EXPECT_EQ(tanh(z).value()(0, 0), 0.0);
  g.backward(sum(sigmoid(z)));
  EXPECT_DOUBLE_EQ(z.grad()(0, 0), 0.25);
}

TEST(Autograd, SoftmaxExamples) {
  Graph g;
  const auto u = softmax_rows(g.constant(Matrix::from_rows({{0, 0, 0}}))).value();
  for (double v : u.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  const auto big = softmax_rows(g.constant(Matrix::from_rows({{1000, 1000}}))).value();
  EXPECT_EQ(big, Matrix::from_rows({{0.5, 0.5}}));

  Rng rng(11);
  const auto check = test::check_input_gradients(
      [](Graph&, const std::vector<Var>& v) {
        // weighted so the gradient is not identically zero
        Graph& gr = *v[0].graph();
        return sum(mul(softmax_rows(v[0]), gr.constant(Matrix::from_rows(
                                               {{1, 2, 3, 4}, {-1, 0, 2, 5}, {3, 1, 4, 1}}))));
      },
      {test::random_matrix(rng, 3, 4)}, 1e-5, 1e-4);
  EXPECT_TRUE(check.ok()) << check.first_failure;
}

TEST(Autograd, ParameterGradientExamples) {
  Parameter p{"w", Matrix(2, 2, 0.0), {}};
  {
    Graph g;
    g.backward(sum(g.param(p)));
    EXPECT_EQ(p.grad, Matrix(2, 2, 1.0));
  }
  p.grad = Matrix();
  {
    Graph g;
    g.backward(sum(sigmoid(g.param(p))));
    EXPECT_EQ(p.grad, Matrix(2, 2, 0.25));
  }
}

TEST(Autograd, BackwardNeedsScalarRoot) {
  Graph g;
  const Var a = g.variable(Matrix(2, 2, 1.0));
  EXPECT_THROW(g.backward(a), ContractError);
}

TEST(Autograd, SharedNodeAccumulatesBothUses) {
  Graph g;
  const Var x = g.variable(Matrix::from_rows({{0.3, -1.2}}));
  const Var t = tanh(x);
  g.backward(sum(add(mul(t, t), t)));
  for (std::size_t i = 0; i < 2; ++i) {
    const double th = std::tanh(x.value()[i]);
    EXPECT_NEAR(x.grad()[i], (2.0 * th + 1.0) * (1.0 - th * th), 1e-14);
  }
}

TEST(Autograd, EveryOpPassesFiniteDifferences) {
  Rng rng(2024);
  const std::vector<std::pair<const char*, test::ScalarFn>> cases = {
      {"add", [](Graph&, const std::vector<Var>& v) { return sum(mul(add(v[0], v[1]), v[0])); }},
      {"sub", [](Graph&, const std::vector<Var>& v) { return sum(mul(sub(v[0], v[1]), v[1])); }},
      {"mul", [](Graph&, const std::vector<Var>& v) { return sum(mul(v[0], v[1])); }},
      {"add_row",
       [](Graph&, const std::vector<Var>& v) {
         return sum(tanh(add_row(v[0], slice_rows(v[1], 0, 1))));
       }},
      {"scale", [](Graph&, const std::vector<Var>& v) { return sum(tanh(scale(v[0], -2.5))); }},
      {"sigmoid", [](Graph&, const std::vector<Var>& v) { return sum(mul(sigmoid(v[0]), v[1])); }},
      {"tanh", [](Graph&, const std::vector<Var>& v) { return sum(mul(tanh(v[0]), v[1])); }},
      {"abs", [](Graph&, const std::vector<Var>& v) { return sum(abs(sub(v[0], v[1]))); }},
      {"log",
       [](Graph&, const std::vector<Var>& v) { return sum(log(add(sigmoid(v[0]), sigmoid(v[1])))); }},
      {"mean", [](Graph&, const std::vector<Var>& v) { return mean(mul(v[0], v[1])); }},
      {"concat",
       [](Graph&, const std::vector<Var>& v) { return sum(tanh(concat_cols(v[0], mul(v[1], v[1])))); }},
      {"vstack",
       [](Graph&, const std::vector<Var>& v) {
         return sum(tanh(vstack({slice_rows(v[0], 1, 2), v[1]})));
       }},
      {"matmul",
       [](Graph&, const std::vector<Var>& v) {
         return sum(tanh(matmul(v[0], concat_cols(v[1], v[1]))));
       }},
  };
  for (const auto& [name, fn] : cases) {
    for (int seed = 0; seed < 5; ++seed) {
      Matrix a = test::random_matrix(rng, 3, 3), b = test::random_matrix(rng, 3, 3);
      const auto check = test::check_input_gradients(fn, {a, b});
      EXPECT_TRUE(check.ok()) << name << ": " << check.first_failure;
    }
  }
}

TEST(Autograd, ClampPassesGradientOnlyInside) {
  Graph g;
  const Var x = g.variable(Matrix::from_rows({{-2.0, 0.5, 3.0}}));
  g.backward(sum(clamp(x, -1.0, 1.0)));
  EXPECT_EQ(x.grad(), Matrix::from_rows({{0.0, 1.0, 0.0}}));
}

// Brute-force grouped attention products against per-element loops.
TEST(Autograd, GroupedOpsMatchLoops) {
  Rng rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const auto steps = test::uniform_size(rng, 1, 5), groups = test::uniform_size(rng, 1, 4),
               dim = test::uniform_size(rng, 1, 4);
    const auto q = test::random_matrix(rng, steps * groups, dim);
    const auto k = test::random_matrix(rng, steps * groups, dim);
    const auto p = test::random_matrix(rng, steps * groups, steps);
    Graph g;
    const auto s = grouped_scores(g.constant(q), g.constant(k), groups).value();
    const auto m = grouped_mix(g.constant(p), g.constant(k), groups).value();
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t b = 0; b < groups; ++b) {
        for (std::size_t u = 0; u < steps; ++u) {
          double acc = 0.0;
          for (std::size_t c = 0; c < dim; ++c) acc += q(t * groups + b, c) * k(u * groups + b, c);
          EXPECT_NEAR(s(t * groups + b, u), acc, 1e-12);
        }
        for (std::size_t c = 0; c < dim; ++c) {
          double acc = 0.0;
          for (std::size_t u = 0; u < steps; ++u) acc += p(t * groups + b, u) * k(u * groups + b, c);
          EXPECT_NEAR(m(t * groups + b, c), acc, 1e-12);
        }
      }
    }
    const auto check = test::check_input_gradients(
        [groups](Graph&, const std::vector<Var>& v) {
          return sum(tanh(grouped_mix(softmax_rows(grouped_scores(v[0], v[1], groups)), v[1],
                                      groups)));
        },
        {q, k});
    EXPECT_TRUE(check.ok()) << check.first_failure;
  }
}

TEST(Autograd, SoftmaxRowsAreDistributions) {
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    Graph g;
    const auto y = softmax_rows(g.constant(test::random_matrix(
                                    rng, test::uniform_size(rng, 1, 6),
                                    test::uniform_size(rng, 1, 9), 50.0)))
                       .value();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double total = 0.0;
      for (double v : y.row(r)) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        total += v;
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(Autograd, DeterministicValuesAndGradients) {
  const auto run = [] {
    Rng rng(77);
    Graph g;
    const Var a = g.variable(test::random_matrix(rng, 4, 3));
    const Var b = g.variable(test::random_matrix(rng, 3, 5));
    g.backward(sum(softmax_rows(tanh(matmul(a, b)))));
    return std::make_pair(a.grad(), b.grad());
  };
  EXPECT_EQ(run(), run());
}

TEST(Parameters, SgdExamples) {
  ParameterSet set(1, InitScheme::kZeros);
  set.add("p", Matrix(1, 1, 1.0));
  set.add("q", Matrix(1, 1, 1.0));
  set.at("p").grad = Matrix(1, 1, 2.0);
  set.at("q").grad = Matrix(1, 1, 0.0);
  sgd_step(set, 0.1);
  EXPECT_DOUBLE_EQ(set.at("p").value(0, 0), 0.8);
  EXPECT_EQ(set.at("q").value(0, 0), 1.0);
}

TEST(Parameters, SgdRejectsNonFiniteGradientBeforeUpdating) {
  ParameterSet set(1, InitScheme::kZeros);
  set.add("a", Matrix(1, 1, 1.0));
  set.add("b", Matrix(1, 1, 1.0));
  set.at("a").grad = Matrix(1, 1, 1.0);
  set.at("b").grad = Matrix(1, 1, std::nan(""));
  try {
    sgd_step(set, 0.1);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
  EXPECT_EQ(set.at("a").value(0, 0), 1.0);
}

TEST(Parameters, SeededInitIsReproducibleAndXavierBounded) {
  ParameterSet a(5, InitScheme::kXavierUniform), b(5, InitScheme::kXavierUniform);
  a.add_weight("w", 30, 20);
  b.add_weight("w", 30, 20);
  EXPECT_TRUE(a.values_equal(b));
  const double bound = std::sqrt(6.0 / 50.0);
  for (double v : a.at("w").value.data()) EXPECT_LE(std::abs(v), bound);
  ParameterSet c(6, InitScheme::kXavierUniform);
  c.add_weight("w", 30, 20);
  EXPECT_FALSE(a.values_equal(c));
  EXPECT_THROW(a.add_weight("w", 1, 1), ContractError);
}

TEST(Parameters, JsonRoundTripIsExact) {
  ParameterSet a(9, InitScheme::kXavierUniform);
  a.add_weight("x.W", 4, 3);
  a.add_zeros("x.b", 1, 3);
  const auto b = ParameterSet::from_json(nlohmann::json::parse(a.to_json().dump()));
  EXPECT_TRUE(a.values_equal(b));
  EXPECT_THROW(ParameterSet::from_json(nlohmann::json{{"seed", 1}}), DataError);
}

TEST(Parameters, TwoSeededRunsStayBitIdentical) {
  const auto run = [] {
    ParameterSet set(3, InitScheme::kXavierUniform);
    set.add_weight("w", 3, 2);
    Rng rng(1);
    const auto x = test::random_matrix(rng, 4, 3);
    for (int step = 0; step < 10; ++step) {
      Graph g;
      g.backward(sum(tanh(matmul(g.constant(x), g.param(set.at("w"))))));
      sgd_step(set, 0.05);
    }
    return set.at("w").value;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace algan
