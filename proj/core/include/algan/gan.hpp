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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "algan/alstm.hpp"
#include "algan/data.hpp"

namespace algan {

struct ModelConfig {
  std::size_t feature_dim = 1;
  std::size_t latent_dim = 10;
  std::size_t window_len = 60;
  std::size_t gen_hidden = 100;
  std::size_t gen_layers = 3;
  std::size_t disc_hidden = 100;
  std::size_t disc_layers = 1;
  CellVariant variant = CellVariant::kAlstm;
  bool use_proj_h = true;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& doc);
};

// Time-major packing of equally shaped windows (see layers.hpp).
Matrix to_time_major(std::span<const Matrix* const> windows);
Matrix to_time_major(const Matrix& window);
std::vector<Matrix> from_time_major(const Matrix& packed, std::size_t batch);

// ALstm stack over latent noise sequences followed by a linear head onto
// the feature space.
class GeneratorModel {
 public:
  GeneratorModel(const ModelConfig& config, std::uint64_t seed);
  GeneratorModel(const ModelConfig& config, ParameterSet params);

  // z: (window_len * batch) x latent_dim -> (window_len * batch) x feature_dim
  Var forward(Graph& graph, Var z, std::size_t batch, Binding mode);
  Var forward(Graph& graph, Var z, std::size_t batch) const;

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  StackSpec stack_spec() const;

 private:
  ModelConfig config_;
  ParameterSet params_;
};

struct DiscriminatorOutput {
  Var features;     // final stack output, the f(.) tap: (window_len * batch) x disc_hidden
  Var probability;  // batch x 1, sigmoid of a linear head on the last step
};

class DiscriminatorModel {
 public:
  DiscriminatorModel(const ModelConfig& config, std::uint64_t seed);
  DiscriminatorModel(const ModelConfig& config, ParameterSet params);

  DiscriminatorOutput forward(Graph& graph, Var x, std::size_t batch, Binding mode);
  DiscriminatorOutput forward(Graph& graph, Var x, std::size_t batch) const;

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  StackSpec stack_spec() const;

 private:
  ModelConfig config_;
  ParameterSet params_;
};

// Standard-normal latent sequences, one latent row per window step.
class NoiseSampler {
 public:
  NoiseSampler(std::size_t latent_dim, std::size_t window_len, std::uint64_t seed);

  // (window_len * batch) x latent_dim, time-major.
  Matrix sample(std::size_t batch);

 private:
  std::size_t latent_dim_;
  std::size_t window_len_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

inline constexpr double kProbabilityClamp = 1e-7;

// -mean(log D(x)) - mean(log(1 - D(G(z)))), probabilities clamped to
// [1e-7, 1 - 1e-7].
Var discriminator_loss(Var d_real, Var d_fake);
// Non-saturating form: -mean(log D(G(z))).
Var generator_loss(Var d_fake);

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double lr_d = 0.01;
  double lr_g = 0.01;
  std::size_t d_steps_per_g_step = 1;
  std::uint64_t seed = 42;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& doc);
};

struct EpochLog {
  std::size_t epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double d_real_mean = 0.0;
  double d_fake_mean = 0.0;
};

struct TrainResult {
  GeneratorModel generator;
  DiscriminatorModel discriminator;
  std::vector<EpochLog> log;
  std::size_t d_updates = 0;
  std::size_t g_updates = 0;
};

// Optional hook run after every epoch (progress reporting, tests).
using EpochObserver = std::function<void(const EpochLog&, const GeneratorModel&,
                                         const DiscriminatorModel&)>;

// Each epoch: d_steps_per_g_step discriminator updates, each on a fresh
// noise batch and a fresh sample of real windows, then one generator update
// on another fresh noise batch with the discriminator frozen. Plain SGD.
TrainResult adversarial_train(const WindowSet& windows, const TrainConfig& config,
                              const EpochObserver& observer = nullptr);

struct Checkpoint {
  TrainConfig config;
  std::size_t epoch = 0;
  ParameterSet generator;
  ParameterSet discriminator;
  nlohmann::json extra = nlohmann::json::object();  // run metadata

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log,
                        const std::string& config_hash);

}  // namespace algan
