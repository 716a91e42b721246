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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "algan/matrix.hpp"

namespace algan {

// Integer timestamps are kept as-is; ISO-8601 timestamps become milliseconds
// since the Unix epoch (UTC).
using Timestamp = std::int64_t;

Timestamp parse_timestamp(std::string_view text);

enum class CsvSchema {
  kUnivariate,    // timestamp, value
  kMultivariate,  // timestamp, feature_1, ..., feature_k
};

CsvSchema csv_schema_from_string(std::string_view name);

struct RawSeries {
  std::vector<Timestamp> timestamps;
  std::vector<std::string> timestamp_text;  // as read, for writing outputs back
  Matrix values;                            // length x feature_dim
  std::vector<std::string> feature_names;

  std::size_t length() const { return values.rows(); }
  std::size_t feature_dim() const { return values.cols(); }
};

struct LoadedCsv {
  RawSeries series;
  // Present when the file has a 0/1 column named "label".
  std::optional<std::vector<int>> point_labels;
};

// Reads an RFC-4180 CSV with a header row. The first column is the
// timestamp; a column named "label" is split off as per-point labels.
// Throws DataError (with the line number) on unreadable files, empty data,
// unparseable or missing values and non-increasing timestamps.
LoadedCsv load_csv(const std::filesystem::path& path, CsvSchema schema);

// Splits one CSV record into fields, honouring double quotes.
std::vector<std::string> split_csv_record(std::string_view line);

struct LabelInterval {
  Timestamp start = 0;
  Timestamp end = 0;
};

// Anomaly periods, kept sorted and non-overlapping.
class LabelIntervals {
 public:
  LabelIntervals() = default;
  explicit LabelIntervals(std::vector<LabelInterval> intervals);

  const std::vector<LabelInterval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  bool contains(Timestamp t) const;
  // True when [start, end] shares at least one instant with an interval.
  bool intersects(Timestamp start, Timestamp end) const;

 private:
  std::vector<LabelInterval> intervals_;
};

// Label file: {"<dataset>": [["start", "end"], ...], ...}. With an empty
// dataset name the file must hold exactly one entry.
LabelIntervals load_label_intervals(const std::filesystem::path& path,
                                    const std::string& dataset = "");
nlohmann::json label_intervals_to_json(const LabelIntervals& labels,
                                       const std::string& dataset);
// Runs of consecutive 1s become intervals.
LabelIntervals intervals_from_point_labels(const std::vector<Timestamp>& timestamps,
                                           const std::vector<int>& labels);
std::vector<int> point_labels(const std::vector<Timestamp>& timestamps,
                              const LabelIntervals& labels);

struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;

  nlohmann::json to_json() const;
  static NormalizationParams from_json(const nlohmann::json& doc);
};

struct NormalizedSeries {
  RawSeries series;
  NormalizationParams params;
  std::vector<std::string> warnings;
};

// Per-feature min-max scaling onto [-1, 1]. Constant features map to 0 and
// produce a warning.
NormalizedSeries normalize(const RawSeries& series);
RawSeries apply_normalization(const RawSeries& series, const NormalizationParams& params);
RawSeries denormalize(const RawSeries& series, const NormalizationParams& params);

struct Window {
  std::size_t start = 0;
  Matrix values;  // window_len x feature_dim
};

// Window values only. This is everything the training code sees.
struct WindowSet {
  std::size_t window_len = 0;
  std::size_t shift = 1;
  std::size_t feature_dim = 0;
  std::vector<Window> windows;

  std::size_t size() const { return windows.size(); }
};

std::size_t window_count(std::size_t length, std::size_t window_len, std::size_t shift);
WindowSet slice_windows(const RawSeries& series, std::size_t window_len, std::size_t shift);

// Windows plus per-window anomaly flags. A window is flagged when its
// timestamp span overlaps any labelled interval. Flags are reachable only
// through this class, never through the WindowSet handed to training.
class WindowedDataset {
 public:
  WindowedDataset(WindowSet windows, std::vector<bool> flags, NormalizationParams params);

  const WindowSet& training_view() const { return windows_; }
  const std::vector<bool>& flags() const { return flags_; }
  const NormalizationParams& normalization() const { return params_; }
  std::size_t size() const { return windows_.size(); }

 private:
  WindowSet windows_;
  std::vector<bool> flags_;
  NormalizationParams params_;
};

WindowedDataset make_windows(const RawSeries& series, const LabelIntervals& labels,
                             std::size_t window_len = 60, std::size_t shift = 1,
                             NormalizationParams params = {});

enum class SynthKind { kSineSpike, kSineLevelShift };

SynthKind synth_kind_from_string(std::string_view name);
std::string_view to_string(SynthKind kind);

struct SynthOptions {
  double period = 50.0;
  double amplitude = 1.0;
  double noise_sigma = 0.05;
};

struct SynthData {
  RawSeries series;
  LabelIntervals labels;
  std::vector<double> clean;  // noiseless base signal
};

// Sine base signal plus Gaussian noise with injected anomalies; spikes add
// +-(3..5) * amplitude at single instants, level shifts add 1.5 * amplitude
// over 20-40 steps. Requires length >= 600.
SynthData synth_generate(SynthKind kind, std::size_t length, std::size_t anomaly_count,
                         std::uint64_t seed, const SynthOptions& options = {});

void write_series_csv(const std::filesystem::path& path, const RawSeries& series,
                      const std::vector<int>* labels = nullptr);

}  // namespace algan
