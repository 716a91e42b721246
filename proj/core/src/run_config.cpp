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

#include "algan/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <variant>

#include "algan/errors.hpp"
#include "algan/random.hpp"

namespace algan {
namespace {

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed shares the size_t field kind");

using Member = std::variant<std::string RunConfig::*, std::size_t RunConfig::*,
                            double RunConfig::*, bool RunConfig::*>;

struct Field {
  const char* key;
  Member member;
  bool hashed;
  const char* help;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"data", &RunConfig::data, true, "input series CSV"},
      {"schema", &RunConfig::schema, true, "univariate | multivariate"},
      {"labels", &RunConfig::labels, true, "label interval JSON"},
      {"dataset", &RunConfig::dataset, true, "entry name inside the label file"},
      {"checkpoint", &RunConfig::checkpoint, false, "checkpoint path (default <out_dir>/checkpoint.json)"},
      {"scores", &RunConfig::scores, false, "score CSV path (default <out_dir>/scores.csv)"},
      {"out_dir", &RunConfig::out_dir, false, "directory for outputs"},
      {"window_len", &RunConfig::window_len, true, "window length"},
      {"shift", &RunConfig::shift, true, "window shift"},
      {"latent_dim", &RunConfig::latent_dim, true, "latent dimension per step"},
      {"gen_hidden", &RunConfig::gen_hidden, true, "generator hidden size"},
      {"gen_layers", &RunConfig::gen_layers, true, "generator layers"},
      {"disc_hidden", &RunConfig::disc_hidden, true, "discriminator hidden size"},
      {"disc_layers", &RunConfig::disc_layers, true, "discriminator layers"},
      {"variant", &RunConfig::variant, true, "alstm | plain_lstm"},
      {"use_proj_h", &RunConfig::use_proj_h, true, "tanh projection on the hidden attention path"},
      {"epochs", &RunConfig::epochs, true, "training epochs"},
      {"batch_size", &RunConfig::batch_size, true, "training batch size"},
      {"lr_d", &RunConfig::lr_d, true, "discriminator learning rate"},
      {"lr_g", &RunConfig::lr_g, true, "generator learning rate"},
      {"d_steps", &RunConfig::d_steps, true, "discriminator updates per generator update"},
      {"gamma", &RunConfig::gamma, true, "discrimination weight in the anomaly score"},
      {"lambda_steps", &RunConfig::lambda_steps, true, "latent inversion steps"},
      {"step_size", &RunConfig::step_size, true, "latent inversion step size"},
      {"grad_clip", &RunConfig::grad_clip, true, "latent gradient norm bound (<= 0 disables)"},
      {"score_batch", &RunConfig::score_batch, true, "windows per inversion batch"},
      {"threads", &RunConfig::threads, false, "scoring threads (0 = all cores)"},
      {"aggregation", &RunConfig::aggregation, true, "step_mean | window_max"},
      {"threshold_strategy", &RunConfig::threshold_strategy, true, "best_f1 | percentile:<p>"},
      {"synth_kind", &RunConfig::synth_kind, true, "sine_spike | sine_levelshift"},
      {"synth_length", &RunConfig::synth_length, true, "synthetic series length"},
      {"synth_anomalies", &RunConfig::synth_anomalies, true, "injected anomalies"},
      {"seed", &RunConfig::seed, true, "global seed"},
      {"log_every", &RunConfig::log_every, false, "print training progress every n epochs"},
  };
  return table;
}

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string format(const RunConfig& c, const Member& m) {
  return std::visit(
      [&](auto ptr) -> std::string {
        const auto& v = c.*ptr;
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          char buf[32];
          auto res = std::to_chars(buf, buf + sizeof buf, v);
          return std::string(buf, res.ptr);
        } else {
          return std::to_string(v);
        }
      },
      m);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void assign(RunConfig& c, const Field& f, std::string_view text) {
  const std::string value(trim(text));
  const auto bad = [&](const char* what) {
    return ConfigError(std::string(f.key) + ": '" + value + "' is not " + what);
  };
  std::visit(
      [&](auto ptr) {
        auto& v = c.*ptr;
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          v = value;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1" || value == "yes" || value == "on") {
            v = true;
          } else if (value == "false" || value == "0" || value == "no" || value == "off") {
            v = false;
          } else {
            throw bad("a boolean");
          }
        } else {
          T parsed{};
          const char* end = value.data() + value.size();
          auto res = std::from_chars(value.data(), end, parsed);
          if (value.empty() || res.ec != std::errc() || res.ptr != end) {
            throw bad(std::is_same_v<T, double> ? "a number" : "a non-negative integer");
          }
          v = parsed;
        }
      },
      f.member);
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
  }();
  return keys;
}

std::string help_for(std::string_view key) { return find_field(key).help; }

void RunConfig::set(std::string_view key, std::string_view value) {
  assign(*this, find_field(key), value);
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, format(*this, f.member));
  return out;
}

std::string RunConfig::canonical() const {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& f : fields()) {
    if (f.hashed) kv.emplace_back(f.key, format(*this, f.member));
  }
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [k, v] : entries()) doc[k] = v;
  return doc;
}

void RunConfig::validate() const {
  try {
    csv_schema_from_string(schema);
    cell_variant_from_string(variant);
    point_aggregation_from_string(aggregation);
    ThresholdStrategy::parse(threshold_strategy);
    synth_kind_from_string(synth_kind);
    if (window_len < 2) throw ConfigError("window_len must be at least 2");
    if (shift == 0) throw ConfigError("shift must be positive");
    if (gen_hidden == 0 || disc_hidden == 0 || gen_layers == 0 || disc_layers == 0) {
      throw ConfigError("hidden sizes and layer counts must be positive");
    }
    train_config(1).validate();
    scoring_config().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

TrainConfig RunConfig::train_config(std::size_t feature_dim) const {
  TrainConfig t;
  t.model.feature_dim = feature_dim;
  t.model.latent_dim = latent_dim;
  t.model.window_len = window_len;
  t.model.gen_hidden = gen_hidden;
  t.model.gen_layers = gen_layers;
  t.model.disc_hidden = disc_hidden;
  t.model.disc_layers = disc_layers;
  t.model.variant = cell_variant_from_string(variant);
  t.model.use_proj_h = use_proj_h;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.lr_d = lr_d;
  t.lr_g = lr_g;
  t.d_steps_per_g_step = d_steps;
  t.seed = seed;
  return t;
}

ScoringConfig RunConfig::scoring_config() const {
  ScoringConfig s;
  s.inversion.gamma = gamma;
  s.inversion.lambda_steps = lambda_steps;
  s.inversion.step_size = step_size;
  s.inversion.grad_clip = grad_clip;
  s.seed = seed;
  s.batch_size = score_batch;
  s.threads = threads;
  s.aggregation = point_aggregation_from_string(aggregation);
  return s;
}

ThresholdStrategy RunConfig::threshold() const { return ThresholdStrategy::parse(threshold_strategy); }

std::filesystem::path RunConfig::out_path(std::string_view file) const {
  return std::filesystem::path(out_dir.empty() ? "." : out_dir) / file;
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? out_path("checkpoint.json") : std::filesystem::path(checkpoint);
}

std::filesystem::path RunConfig::scores_path() const {
  return scores.empty() ? out_path("scores.csv") : std::filesystem::path(scores);
}

std::map<std::string, std::string> parse_config_text(std::string_view text,
                                                     const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    std::string key(trim(body.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    try {
      find_field(key);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
    out[key] = std::string(trim(body.substr(eq + 1)));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

RunConfig resolve_run_config(const std::filesystem::path* file,
                             const std::map<std::string, std::string>& flags,
                             const char* env_seed) {
  RunConfig c;
  if (env_seed != nullptr && *env_seed != '\0') {
    try {
      c.set("seed", env_seed);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("ALGAN_SEED: ") + e.what());
    }
  }
  if (file != nullptr) {
    for (const auto& [k, v] : read_config_file(*file)) c.set(k, v);
  }
  for (const auto& [k, v] : flags) c.set(k, v);
  c.validate();
  return c;
}

std::vector<std::string> config_differences(const RunConfig& a, const RunConfig& b) {
  std::vector<std::string> out;
  for (const auto& f : fields()) {
    if (f.hashed && format(a, f.member) != format(b, f.member)) out.emplace_back(f.key);
  }
  return out;
}

}  // namespace algan
