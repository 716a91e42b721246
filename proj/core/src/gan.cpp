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

#include "algan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "algan/errors.hpp"
#include "algan/random.hpp"

namespace algan {

nlohmann::json ModelConfig::to_json() const {
  return {{"feature_dim", feature_dim}, {"latent_dim", latent_dim},
          {"window_len", window_len},   {"gen_hidden", gen_hidden},
          {"gen_layers", gen_layers},   {"disc_hidden", disc_hidden},
          {"disc_layers", disc_layers}, {"variant", std::string(to_string(variant))},
          {"use_proj_h", use_proj_h}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& doc) {
  ModelConfig c;
  c.feature_dim = doc.at("feature_dim").get<std::size_t>();
  c.latent_dim = doc.at("latent_dim").get<std::size_t>();
  c.window_len = doc.at("window_len").get<std::size_t>();
  c.gen_hidden = doc.at("gen_hidden").get<std::size_t>();
  c.gen_layers = doc.at("gen_layers").get<std::size_t>();
  c.disc_hidden = doc.at("disc_hidden").get<std::size_t>();
  c.disc_layers = doc.at("disc_layers").get<std::size_t>();
  c.variant = cell_variant_from_string(doc.at("variant").get<std::string>());
  c.use_proj_h = doc.at("use_proj_h").get<bool>();
  return c;
}

Matrix to_time_major(std::span<const Matrix* const> windows) {
  if (windows.empty()) throw ContractError("to_time_major: no windows");
  const std::size_t steps = windows.front()->rows();
  const std::size_t dim = windows.front()->cols();
  const std::size_t batch = windows.size();
  Matrix out(steps * batch, dim);
  for (std::size_t b = 0; b < batch; ++b) {
    if (windows[b]->rows() != steps || windows[b]->cols() != dim) {
      throw DimensionError("to_time_major: window " + windows[b]->shape_string() +
                           " differs from " + windows.front()->shape_string());
    }
    for (std::size_t t = 0; t < steps; ++t) {
      const auto src = windows[b]->row(t);
      std::copy(src.begin(), src.end(), out.row(t * batch + b).begin());
    }
  }
  return out;
}

Matrix to_time_major(const Matrix& window) { return window; }

std::vector<Matrix> from_time_major(const Matrix& packed, std::size_t batch) {
  if (batch == 0 || packed.rows() % batch != 0) {
    throw DimensionError("from_time_major: " + packed.shape_string() + " is not a batch of " +
                         std::to_string(batch));
  }
  const std::size_t steps = packed.rows() / batch;
  std::vector<Matrix> out(batch, Matrix(steps, packed.cols()));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      const auto src = packed.row(t * batch + b);
      std::copy(src.begin(), src.end(), out[b].row(t).begin());
    }
  }
  return out;
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view what) {
  return make_stream(seed, fnv1a64(what))();
}

void check_input(const Var& v, std::size_t batch, std::size_t window_len, std::size_t width,
                 const char* what) {
  if (batch == 0 || v.rows() != window_len * batch || v.cols() != width) {
    throw DimensionError(std::string(what) + ": got " + v.shape_string() + ", expected " +
                         std::to_string(window_len * batch) + "x" + std::to_string(width));
  }
}

}  // namespace

StackSpec GeneratorModel::stack_spec() const {
  return {config_.latent_dim, config_.gen_hidden, config_.gen_layers, config_.variant,
          config_.use_proj_h};
}

GeneratorModel::GeneratorModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), params_(derive_seed(seed, "generator"), InitScheme::kXavierUniform) {
  stack_spec().register_params(params_, "gen");
  register_linear(params_, "gen.head", config_.gen_hidden, config_.feature_dim);
}

GeneratorModel::GeneratorModel(const ModelConfig& config, ParameterSet params)
    : config_(config), params_(std::move(params)) {
  GeneratorModel reference(config, 0);
  for (const auto& [name, p] : reference.params()) {
    if (!params_.contains(name) || !params_.at(name).value.same_shape(p.value)) {
      throw ConfigError("generator parameters do not match the model configuration at '" +
                        name + "'");
    }
  }
  if (params_.size() != reference.params().size()) {
    throw ConfigError("generator parameters contain unexpected entries");
  }
}

Var GeneratorModel::forward(Graph& graph, Var z, std::size_t batch, Binding mode) {
  check_input(z, batch, config_.window_len, config_.latent_dim, "generator input");
  const AlstmStackParams stack = stack_spec().bind(graph, params_, "gen", mode);
  const LinearParams head = bind_linear(graph, params_, "gen.head", mode);
  return linear(head, alstm_stack_forward(stack, z, batch));
}

Var GeneratorModel::forward(Graph& graph, Var z, std::size_t batch) const {
  // Frozen binding only reads the parameters.
  return const_cast<GeneratorModel*>(this)->forward(graph, z, batch, Binding::kFrozen);
}

StackSpec DiscriminatorModel::stack_spec() const {
  return {config_.feature_dim, config_.disc_hidden, config_.disc_layers, config_.variant,
          config_.use_proj_h};
}

DiscriminatorModel::DiscriminatorModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), params_(derive_seed(seed, "discriminator"), InitScheme::kXavierUniform) {
  stack_spec().register_params(params_, "disc");
  register_linear(params_, "disc.head", config_.disc_hidden, 1);
}

DiscriminatorModel::DiscriminatorModel(const ModelConfig& config, ParameterSet params)
    : config_(config), params_(std::move(params)) {
  DiscriminatorModel reference(config, 0);
  for (const auto& [name, p] : reference.params()) {
    if (!params_.contains(name) || !params_.at(name).value.same_shape(p.value)) {
      throw ConfigError("discriminator parameters do not match the model configuration at '" +
                        name + "'");
    }
  }
  if (params_.size() != reference.params().size()) {
    throw ConfigError("discriminator parameters contain unexpected entries");
  }
}

DiscriminatorOutput DiscriminatorModel::forward(Graph& graph, Var x, std::size_t batch,
                                                Binding mode) {
  check_input(x, batch, config_.window_len, config_.feature_dim, "discriminator input");
  const AlstmStackParams stack = stack_spec().bind(graph, params_, "disc", mode);
  const LinearParams head = bind_linear(graph, params_, "disc.head", mode);
  const Var features = alstm_stack_forward(stack, x, batch);
  const Var last = slice_rows(features, (config_.window_len - 1) * batch, batch);
  return {features, sigmoid(linear(head, last))};
}

DiscriminatorOutput DiscriminatorModel::forward(Graph& graph, Var x, std::size_t batch) const {
  return const_cast<DiscriminatorModel*>(this)->forward(graph, x, batch, Binding::kFrozen);
}

NoiseSampler::NoiseSampler(std::size_t latent_dim, std::size_t window_len, std::uint64_t seed)
    : latent_dim_(latent_dim), window_len_(window_len), rng_(make_stream(seed, fnv1a64("noise"))) {}

Matrix NoiseSampler::sample(std::size_t batch) {
  Matrix z(window_len_ * batch, latent_dim_);
  for (double& v : z.data()) v = dist_(rng_);
  return z;
}

namespace {

void require_batch(const Var& p, const char* what) {
  if (p.value().empty()) throw ContractError(std::string(what) + ": empty batch");
  if (p.cols() != 1) {
    throw DimensionError(std::string(what) + ": probabilities must be a column, got " +
                         p.shape_string());
  }
}

Var clamped(Var p) { return clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

}  // namespace

Var discriminator_loss(Var d_real, Var d_fake) {
  require_batch(d_real, "discriminator_loss");
  require_batch(d_fake, "discriminator_loss");
  if (d_real.rows() != d_fake.rows()) {
    throw ContractError("discriminator_loss: real batch " + d_real.shape_string() +
                        " and fake batch " + d_fake.shape_string() + " differ");
  }
  Graph& g = *d_real.graph();
  const Var ones = g.constant(Matrix(d_fake.rows(), 1, 1.0));
  const Var real_term = mean(log(clamped(d_real)));
  const Var fake_term = mean(log(sub(ones, clamped(d_fake))));
  return scale(add(real_term, fake_term), -1.0);
}

Var generator_loss(Var d_fake) {
  require_batch(d_fake, "generator_loss");
  return scale(mean(log(clamped(d_fake))), -1.0);
}

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || d_steps_per_g_step == 0) {
    throw ConfigError("epochs, batch_size and d_steps_per_g_step must be positive");
  }
  if (!(lr_d > 0.0) || !(lr_g > 0.0)) throw ConfigError("learning rates must be positive");
  if (model.latent_dim == 0 || model.window_len == 0 || model.feature_dim == 0) {
    throw ConfigError("latent_dim, window_len and feature_dim must be positive");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"model", model.to_json()}, {"epochs", epochs},
          {"batch_size", batch_size}, {"lr_d", lr_d},
          {"lr_g", lr_g},             {"d_steps_per_g_step", d_steps_per_g_step},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& doc) {
  TrainConfig c;
  c.model = ModelConfig::from_json(doc.at("model"));
  c.epochs = doc.at("epochs").get<std::size_t>();
  c.batch_size = doc.at("batch_size").get<std::size_t>();
  c.lr_d = doc.at("lr_d").get<double>();
  c.lr_g = doc.at("lr_g").get<double>();
  c.d_steps_per_g_step = doc.at("d_steps_per_g_step").get<std::size_t>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  return c;
}

namespace {

double mean_of(const Matrix& m) { return m.sum() / static_cast<double>(m.size()); }

void check_finite(double value, std::size_t epoch, const char* what) {
  if (!std::isfinite(value)) {
    throw DivergenceError("epoch " + std::to_string(epoch) + ": " + what + " is " +
                          std::to_string(value));
  }
}

void step_or_report(ParameterSet& params, double lr, std::size_t epoch) {
  try {
    sgd_step(params, lr);
  } catch (const DivergenceError& ex) {
    throw DivergenceError("epoch " + std::to_string(epoch) + ": " + ex.what());
  }
}

}  // namespace

TrainResult adversarial_train(const WindowSet& windows, const TrainConfig& config,
                              const EpochObserver& observer) {
  config.validate();
  const ModelConfig& mc = config.model;
  const std::size_t m = config.batch_size;
  if (windows.size() < m) {
    throw ContractError("dataset has " + std::to_string(windows.size()) +
                        " windows, fewer than one batch of " + std::to_string(m));
  }
  if (windows.window_len != mc.window_len || windows.feature_dim != mc.feature_dim) {
    throw DimensionError("windows are " + std::to_string(windows.window_len) + "x" +
                         std::to_string(windows.feature_dim) + " but the model expects " +
                         std::to_string(mc.window_len) + "x" + std::to_string(mc.feature_dim));
  }

  TrainResult result{GeneratorModel(mc, config.seed), DiscriminatorModel(mc, config.seed), {}, 0, 0};
  GeneratorModel& gen = result.generator;
  DiscriminatorModel& disc = result.discriminator;
  NoiseSampler noise(mc.latent_dim, mc.window_len, config.seed);
  auto batch_rng = make_stream(config.seed, fnv1a64("batches"));
  std::vector<std::size_t> all(windows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picked(m);
  std::vector<const Matrix*> real_ptrs(m);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;

    for (std::size_t k = 0; k < config.d_steps_per_g_step; ++k) {
      Matrix fake;
      {
        Graph g;
        fake = gen.forward(g, g.constant(noise.sample(m)), m, Binding::kFrozen).value();
      }
      std::sample(all.begin(), all.end(), picked.begin(), m, batch_rng);
      for (std::size_t i = 0; i < m; ++i) real_ptrs[i] = &windows.windows[picked[i]].values;

      Graph g;
      const Var d_real = disc.forward(g, g.constant(to_time_major(real_ptrs)), m,
                                      Binding::kTrainable).probability;
      const Var d_fake = disc.forward(g, g.constant(std::move(fake)), m,
                                      Binding::kTrainable).probability;
      const Var loss = discriminator_loss(d_real, d_fake);
      entry.d_loss = loss.value()(0, 0);
      entry.d_real_mean = mean_of(d_real.value());
      entry.d_fake_mean = mean_of(d_fake.value());
      check_finite(entry.d_loss, epoch, "discriminator loss");
      disc.params().zero_grad();
      g.backward(loss);
      step_or_report(disc.params(), config.lr_d, epoch);
      ++result.d_updates;
    }

    {
      Graph g;
      const Var fake = gen.forward(g, g.constant(noise.sample(m)), m, Binding::kTrainable);
      const Var d_fake = disc.forward(g, fake, m, Binding::kFrozen).probability;
      const Var loss = generator_loss(d_fake);
      entry.g_loss = loss.value()(0, 0);
      check_finite(entry.g_loss, epoch, "generator loss");
      gen.params().zero_grad();
      g.backward(loss);
      step_or_report(gen.params(), config.lr_g, epoch);
      ++result.g_updates;
    }

    result.log.push_back(entry);
    if (observer) observer(entry, gen, disc);
  }
  return result;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const nlohmann::json doc = {{"format", "algan-checkpoint"},
                              {"version", 1},
                              {"config", config.to_json()},
                              {"epoch", epoch},
                              {"generator", generator.to_json()},
                              {"discriminator", discriminator.to_json()},
                              {"extra", extra}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << doc.dump(1) << '\n';
  if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    if (doc.at("format") != "algan-checkpoint") {
      throw DataError("'" + path.string() + "' is not an algan checkpoint");
    }
    Checkpoint c;
    c.config = TrainConfig::from_json(doc.at("config"));
    c.epoch = doc.at("epoch").get<std::size_t>();
    c.generator = ParameterSet::from_json(doc.at("generator"));
    c.discriminator = ParameterSet::from_json(doc.at("discriminator"));
    c.extra = doc.value("extra", nlohmann::json::object());
    return c;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("checkpoint '" + path.string() + "': " + ex.what());
  }
}

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log,
                        const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.precision(17);
  out << "epoch,d_loss,g_loss,d_real_mean,d_fake_mean,config_hash\n";
  for (const EpochLog& e : log) {
    out << e.epoch << ',' << e.d_loss << ',' << e.g_loss << ',' << e.d_real_mean << ','
        << e.d_fake_mean << ',' << config_hash << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace algan
