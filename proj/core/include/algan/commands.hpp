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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "algan/evaluation.hpp"
#include "algan/gan.hpp"
#include "algan/run_config.hpp"
#include "algan/scoring.hpp"

namespace algan {

// Library side of the command-line tool. Each command reads its inputs and
// writes its artifacts as named by the RunConfig, prints a short summary to
// `out`, and reports failures through the errors.hpp hierarchy.

struct TrainSummary {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  EpochLog final_epoch;
  std::string config_hash;
};

// Writes <checkpoint> and <out_dir>/train_log.csv.
TrainSummary cmd_train(const RunConfig& config, std::ostream& out);

// Writes <scores> and its JSON sidecar (same stem, .json).
ScoreSeries cmd_score(const RunConfig& config, std::ostream& out);

// Reads <scores>, labels it, writes <out_dir>/report.json and appends to
// <out_dir>/reports.csv.
EvalReport cmd_eval(const RunConfig& config, std::ostream& out);

struct CompareRow {
  std::string variant;
  std::string config_hash;
  std::string shared_hash;  // hash of the config with the variant left out
  EvalReport report;
};

// Trains, scores and evaluates variant=alstm under `config` and
// variant=plain_lstm under `against` (default: `config`). Configs differing in
// anything but the variant are refused unless `force`. Writes
// <out_dir>/comparison.csv.
std::vector<CompareRow> cmd_compare(const RunConfig& config, const RunConfig* against,
                                    bool force, std::ostream& out);

struct SynthOutputs {
  std::filesystem::path series;
  std::filesystem::path labels;
};

// Writes <out_dir>/synth.csv (with a label column) and <out_dir>/synth_labels.json.
SynthOutputs cmd_synth(const RunConfig& config, std::ostream& out);

}  // namespace algan
