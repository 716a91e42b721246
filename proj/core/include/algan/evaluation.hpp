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
#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

namespace algan {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double cohen_kappa = 0.0;
  double auc = 0.0;
  double threshold = 0.0;
  ConfusionCounts counts;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& doc);
};

// A point is predicted anomalous iff its score is strictly above the threshold.
ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold);

// Accuracy, precision, recall, F1 and Cohen's kappa; zero-denominator ratios
// are reported as 0. Leaves auc and threshold untouched.
EvalReport metrics(const ConfusionCounts& counts);

// Mann-Whitney form of the ROC area with average ranks for ties.
double auc(std::span<const double> scores, std::span<const int> labels);

// Full report at a fixed threshold.
EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold);

// Appends one CSV row; writes the header first when the file is new.
void append_report_csv(const std::filesystem::path& path, const EvalReport& report,
                       const std::string& run_label, const std::string& config_hash);
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report, const std::string& run_label,
                           const std::string& config_hash);

}  // namespace algan
