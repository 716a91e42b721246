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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "algan/gan.hpp"
#include "algan/scoring.hpp"

namespace algan {

// Every tunable of a run plus its input and output paths.
struct RunConfig {
  // inputs and outputs
  std::string data;
  std::string schema = "univariate";
  std::string labels;       // JSON label file; empty uses a "label" column if present
  std::string dataset;      // key inside the label file
  std::string checkpoint;   // defaults to <out_dir>/checkpoint.json
  std::string scores;       // defaults to <out_dir>/scores.csv
  std::string out_dir = ".";

  // windows
  std::size_t window_len = 60;
  std::size_t shift = 1;

  // model
  std::size_t latent_dim = 10;
  std::size_t gen_hidden = 100;
  std::size_t gen_layers = 3;
  std::size_t disc_hidden = 100;
  std::size_t disc_layers = 1;
  std::string variant = "alstm";
  bool use_proj_h = true;

  // training
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double lr_d = 0.01;
  double lr_g = 0.01;
  std::size_t d_steps = 1;

  // scoring
  double gamma = 0.1;
  std::size_t lambda_steps = 50;
  double step_size = 0.01;
  double grad_clip = 10.0;
  std::size_t score_batch = 32;
  std::size_t threads = 1;
  std::string aggregation = "step_mean";
  std::string threshold_strategy = "best_f1";

  // synthetic data
  std::string synth_kind = "sine_spike";
  std::size_t synth_length = 3000;
  std::size_t synth_anomalies = 8;

  std::uint64_t seed = 42;
  std::size_t log_every = 0;  // training progress lines; 0 prints only the summary

  // Throws ConfigError on out-of-range or unparseable values.
  void validate() const;

  TrainConfig train_config(std::size_t feature_dim) const;
  ScoringConfig scoring_config() const;
  ThresholdStrategy threshold() const;

  std::filesystem::path out_path(std::string_view file) const;
  std::filesystem::path checkpoint_path() const;
  std::filesystem::path scores_path() const;

  // key -> value text for every field, keys in declaration order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  // Sorted key=value lines of the fields that affect results (paths to
  // outputs and the thread count are left out).
  std::string canonical() const;
  // 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
  nlohmann::json to_json() const;

  void set(std::string_view key, std::string_view value);
};

// Names of all RunConfig keys, in declaration order.
const std::vector<std::string>& run_config_keys();
std::string help_for(std::string_view key);

// Flat key=value file; '#' starts a comment. Unknown keys and malformed lines
// are ConfigErrors naming the line.
std::map<std::string, std::string> parse_config_text(std::string_view text,
                                                     const std::string& source);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// defaults < ALGAN_SEED < file < flags.
RunConfig resolve_run_config(const std::filesystem::path* file,
                             const std::map<std::string, std::string>& flags,
                             const char* env_seed);

// Keys whose canonical values differ between the two configs.
std::vector<std::string> config_differences(const RunConfig& a, const RunConfig& b);

}  // namespace algan
