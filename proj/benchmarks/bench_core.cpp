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

#include <random>

#include <benchmark/benchmark.h>

#include "algan/alstm.hpp"
#include "algan/gan.hpp"
#include "algan/scoring.hpp"

namespace {

algan::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  algan::Matrix m(rows, cols);
  for (double& v : m.data()) v = d(rng);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(algan::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128);

void BM_LstmStepForwardBackward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const std::size_t batch = 32;
  algan::ParameterSet params(7, algan::InitScheme::kXavierUniform);
  algan::register_lstm(params, "cell", 1, hidden);
  const auto x = random_matrix(batch, 1, 3);
  for (auto _ : state) {
    algan::Graph g;
    const auto cell = algan::bind_lstm(g, params, "cell", algan::Binding::kTrainable);
    const auto s = algan::lstm_step(cell, algan::zero_lstm_state(g, batch, hidden), g.constant(x));
    g.backward(algan::sum(s.h));
    params.zero_grad();
  }
}
BENCHMARK(BM_LstmStepForwardBackward)->Arg(8)->Arg(100);

void BM_SelfAttention(benchmark::State& state) {
  const std::size_t steps = 60, batch = 32;
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(steps * batch, dim, 4);
  for (auto _ : state) {
    algan::Graph g;
    benchmark::DoNotOptimize(
        algan::self_attention(algan::AttentionParams::identity(dim), g.constant(x), batch).value());
  }
}
BENCHMARK(BM_SelfAttention)->Arg(8)->Arg(100);

void BM_AlstmForward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const std::size_t steps = 60, batch = 32;
  algan::StackSpec spec;
  spec.input_dim = 1;
  spec.hidden_dim = hidden;
  algan::ParameterSet params(5, algan::InitScheme::kXavierUniform);
  spec.register_params(params, "s");
  const auto x = random_matrix(steps * batch, 1, 6);
  for (auto _ : state) {
    algan::Graph g;
    const auto stack = spec.bind(g, params, "s", algan::Binding::kFrozen);
    benchmark::DoNotOptimize(algan::alstm_stack_forward(stack, g.constant(x), batch).value());
  }
}
BENCHMARK(BM_AlstmForward)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_InversionStep(benchmark::State& state) {
  algan::ModelConfig config;
  config.gen_hidden = config.disc_hidden = static_cast<std::size_t>(state.range(0));
  const algan::GeneratorModel gen(config, 1);
  const algan::DiscriminatorModel disc(config, 2);
  const algan::GanInversionTarget target(gen, disc);
  algan::InversionConfig inv;
  inv.lambda_steps = 1;
  std::vector<algan::Matrix> windows;
  for (std::size_t b = 0; b < 32; ++b) windows.push_back(random_matrix(60, 1, 10 + b));
  std::vector<const algan::Matrix*> ptrs;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> ids;
  for (std::size_t b = 0; b < windows.size(); ++b) {
    ptrs.push_back(&windows[b]);
    seeds.push_back(b);
    ids.push_back(b);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(algan::invert_batch(ptrs, target, inv, seeds, ids));
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_InversionStep)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
