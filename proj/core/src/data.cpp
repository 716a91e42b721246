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

#include "algan/data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "algan/errors.hpp"
#include "algan/random.hpp"

namespace algan {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  out = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
  }
  return true;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Timestamp parse_timestamp(std::string_view raw) {
  const std::string text = trim(raw);
  std::int64_t integer = 0;
  if (parse_int(text, integer)) return integer;

  // YYYY-MM-DD[( |T)HH:MM[:SS[.fff]]][Z]
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  auto bad = [&]() { return DataError("unparseable timestamp '" + text + "'"); };
  if (!parse_fixed(text, 0, 4, y) || text.size() < 10 || text[4] != '-' ||
      !parse_fixed(text, 5, 2, mo) || text[7] != '-' || !parse_fixed(text, 8, 2, d)) {
    throw bad();
  }
  std::size_t pos = 10;
  std::int64_t millis = 0;
  if (pos < text.size() && (text[pos] == ' ' || text[pos] == 'T')) {
    if (!parse_fixed(text, pos + 1, 2, h) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
        !parse_fixed(text, pos + 4, 2, mi)) {
      throw bad();
    }
    pos += 6;
    if (pos < text.size() && text[pos] == ':') {
      if (!parse_fixed(text, pos + 1, 2, s)) throw bad();
      pos += 3;
      if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
          if (digits < 3) millis = millis * 10 + (text[pos] - '0');
          ++digits;
          ++pos;
        }
        if (digits == 0) throw bad();
        for (; digits < 3; ++digits) millis *= 10;
      }
    }
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) throw bad();

  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{
                                            static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw bad();
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return ((static_cast<std::int64_t>(days) * 24 + h) * 60 + mi) * 60000 +
         static_cast<std::int64_t>(s) * 1000 + millis;
}

CsvSchema csv_schema_from_string(std::string_view name) {
  if (name == "univariate") return CsvSchema::kUnivariate;
  if (name == "multivariate") return CsvSchema::kMultivariate;
  throw ConfigError("unknown CSV schema '" + std::string(name) + "'");
}

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r' && c != '\n') {
      field += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

LoadedCsv load_csv(const std::filesystem::path& path, CsvSchema schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_record(line);
      break;
    }
  }
  if (header.empty()) throw DataError("'" + path.string() + "' has no header row");
  if (header.size() < 2) {
    throw DataError("'" + path.string() + "' line " + std::to_string(line_no) +
                    ": need a timestamp column and at least one value column");
  }

  std::optional<std::size_t> label_col;
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (lower(name) == "label" && !label_col) {
      label_col = c;
    } else {
      feature_cols.push_back(c);
      feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) throw DataError("'" + path.string() + "' has no value columns");
  if (schema == CsvSchema::kUnivariate && feature_cols.size() != 1) {
    throw DataError("'" + path.string() + "' has " + std::to_string(feature_cols.size()) +
                    " value columns; the univariate schema expects exactly one");
  }

  LoadedCsv out;
  out.series.feature_names = feature_names;
  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "'" + path.string() + "' line " + std::to_string(line_no);
    std::vector<std::string> fields;
    try {
      fields = split_csv_record(line);
    } catch (const DataError& ex) {
      throw DataError(where + ": " + ex.what());
    }
    if (fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    Timestamp ts = 0;
    try {
      ts = parse_timestamp(fields[0]);
    } catch (const DataError& ex) {
      throw DataError(where + ": " + ex.what());
    }
    if (!out.series.timestamps.empty() && ts <= out.series.timestamps.back()) {
      throw DataError(where + ": timestamp '" + trim(fields[0]) +
                      "' is not after the previous row");
    }
    out.series.timestamps.push_back(ts);
    out.series.timestamp_text.push_back(trim(fields[0]));
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      double v = 0.0;
      const std::string f = trim(fields[feature_cols[k]]);
      if (!parse_double(f, v)) {
        throw DataError(where + ": cannot parse value '" + f + "' in column '" +
                        feature_names[k] + "'");
      }
      values.push_back(v);
    }
    if (label_col) {
      const std::string f = trim(fields[*label_col]);
      if (f != "0" && f != "1") throw DataError(where + ": label must be 0 or 1, got '" + f + "'");
      labels.push_back(f == "1" ? 1 : 0);
    }
  }
  if (out.series.timestamps.empty()) {
    throw DataError("'" + path.string() + "' contains a header but no data rows");
  }
  out.series.values =
      Matrix(out.series.timestamps.size(), feature_cols.size(), std::move(values));
  if (label_col) out.point_labels = std::move(labels);
  return out;
}

LabelIntervals::LabelIntervals(std::vector<LabelInterval> intervals) {
  for (const auto& iv : intervals) {
    if (iv.start > iv.end) {
      throw DataError("label interval starts after it ends (" + std::to_string(iv.start) +
                      " > " + std::to_string(iv.end) + ")");
    }
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const LabelInterval& a, const LabelInterval& b) { return a.start < b.start; });
  for (const auto& iv : intervals) {
    if (!intervals_.empty() && iv.start <= intervals_.back().end) {
      intervals_.back().end = std::max(intervals_.back().end, iv.end);
    } else {
      intervals_.push_back(iv);
    }
  }
}

bool LabelIntervals::contains(Timestamp t) const { return intersects(t, t); }

bool LabelIntervals::intersects(Timestamp start, Timestamp end) const {
  // First interval that ends at or after `start`.
  auto it = std::lower_bound(intervals_.begin(), intervals_.end(), start,
                             [](const LabelInterval& iv, Timestamp s) { return iv.end < s; });
  return it != intervals_.end() && it->start <= end;
}

LabelIntervals load_label_intervals(const std::filesystem::path& path,
                                    const std::string& dataset) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("label file '" + path.string() + "': " + ex.what());
  }
  if (!doc.is_object() || doc.empty()) {
    throw DataError("label file '" + path.string() + "' must be a non-empty JSON object");
  }
  const nlohmann::json* entry = nullptr;
  if (dataset.empty()) {
    if (doc.size() != 1) {
      throw DataError("label file '" + path.string() +
                      "' holds several datasets; name the one to use");
    }
    entry = &doc.begin().value();
  } else {
    auto it = doc.find(dataset);
    if (it == doc.end()) {
      throw DataError("label file '" + path.string() + "' has no entry '" + dataset + "'");
    }
    entry = &it.value();
  }
  std::vector<LabelInterval> intervals;
  for (const auto& pair : *entry) {
    if (!pair.is_array() || pair.size() != 2) {
      throw DataError("label file '" + path.string() + "': intervals must be [start, end]");
    }
    auto ts = [](const nlohmann::json& v) {
      return v.is_number_integer() ? v.get<Timestamp>() : parse_timestamp(v.get<std::string>());
    };
    intervals.push_back({ts(pair[0]), ts(pair[1])});
  }
  return LabelIntervals(std::move(intervals));
}

nlohmann::json label_intervals_to_json(const LabelIntervals& labels, const std::string& dataset) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& iv : labels.intervals()) {
    list.push_back({std::to_string(iv.start), std::to_string(iv.end)});
  }
  return {{dataset, list}};
}

LabelIntervals intervals_from_point_labels(const std::vector<Timestamp>& timestamps,
                                           const std::vector<int>& labels) {
  if (timestamps.size() != labels.size()) {
    throw ContractError("point labels and timestamps differ in length");
  }
  std::vector<LabelInterval> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) continue;
    if (i > 0 && labels[i - 1] != 0) {
      out.back().end = timestamps[i];
    } else {
      out.push_back({timestamps[i], timestamps[i]});
    }
  }
  return LabelIntervals(std::move(out));
}

std::vector<int> point_labels(const std::vector<Timestamp>& timestamps,
                              const LabelIntervals& labels) {
  std::vector<int> out(timestamps.size());
  for (std::size_t i = 0; i < timestamps.size(); ++i) out[i] = labels.contains(timestamps[i]);
  return out;
}

nlohmann::json NormalizationParams::to_json() const { return {{"min", min}, {"max", max}}; }

NormalizationParams NormalizationParams::from_json(const nlohmann::json& doc) {
  try {
    NormalizationParams p{doc.at("min").get<std::vector<double>>(),
                          doc.at("max").get<std::vector<double>>()};
    if (p.min.size() != p.max.size()) throw DataError("normalization min/max lengths differ");
    return p;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed normalization parameters: ") + ex.what());
  }
}

NormalizedSeries normalize(const RawSeries& series) {
  NormalizedSeries out;
  const std::size_t f = series.feature_dim();
  out.params.min.assign(f, 0.0);
  out.params.max.assign(f, 0.0);
  for (std::size_t c = 0; c < f; ++c) {
    double lo = series.values(0, c), hi = lo;
    for (std::size_t r = 1; r < series.length(); ++r) {
      lo = std::min(lo, series.values(r, c));
      hi = std::max(hi, series.values(r, c));
    }
    out.params.min[c] = lo;
    out.params.max[c] = hi;
    if (!(hi > lo)) {
      const std::string name =
          c < series.feature_names.size() ? series.feature_names[c] : std::to_string(c);
      out.warnings.push_back("feature '" + name + "' is constant; mapped to 0");
    }
  }
  out.series = apply_normalization(series, out.params);
  return out;
}

RawSeries apply_normalization(const RawSeries& series, const NormalizationParams& params) {
  if (params.min.size() != series.feature_dim()) {
    throw DimensionError("normalization has " + std::to_string(params.min.size()) +
                         " features, series has " + std::to_string(series.feature_dim()));
  }
  RawSeries out = series;
  for (std::size_t r = 0; r < out.length(); ++r) {
    for (std::size_t c = 0; c < out.feature_dim(); ++c) {
      const double lo = params.min[c], hi = params.max[c];
      out.values(r, c) = hi > lo ? 2.0 * (series.values(r, c) - lo) / (hi - lo) - 1.0 : 0.0;
    }
  }
  return out;
}

RawSeries denormalize(const RawSeries& series, const NormalizationParams& params) {
  if (params.min.size() != series.feature_dim()) {
    throw DimensionError("normalization has " + std::to_string(params.min.size()) +
                         " features, series has " + std::to_string(series.feature_dim()));
  }
  RawSeries out = series;
  for (std::size_t r = 0; r < out.length(); ++r) {
    for (std::size_t c = 0; c < out.feature_dim(); ++c) {
      const double lo = params.min[c], hi = params.max[c];
      out.values(r, c) = hi > lo ? (series.values(r, c) + 1.0) * 0.5 * (hi - lo) + lo : lo;
    }
  }
  return out;
}

std::size_t window_count(std::size_t length, std::size_t window_len, std::size_t shift) {
  if (window_len == 0 || shift == 0) throw ContractError("window length and shift must be positive");
  if (length < window_len) {
    throw ContractError("series of length " + std::to_string(length) +
                        " is shorter than one window (" + std::to_string(window_len) + ")");
  }
  return (length - window_len) / shift + 1;
}

WindowSet slice_windows(const RawSeries& series, std::size_t window_len, std::size_t shift) {
  const std::size_t n = window_count(series.length(), window_len, shift);
  WindowSet set;
  set.window_len = window_len;
  set.shift = shift;
  set.feature_dim = series.feature_dim();
  set.windows.reserve(n);
  const std::size_t f = series.feature_dim();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t start = k * shift;
    const auto src = series.values.data().subspan(start * f, window_len * f);
    set.windows.push_back({start, Matrix(window_len, f, std::vector<double>(src.begin(), src.end()))});
  }
  return set;
}

WindowedDataset::WindowedDataset(WindowSet windows, std::vector<bool> flags,
                                 NormalizationParams params)
    : windows_(std::move(windows)), flags_(std::move(flags)), params_(std::move(params)) {
  if (flags_.size() != windows_.size()) throw ContractError("one flag per window required");
}

WindowedDataset make_windows(const RawSeries& series, const LabelIntervals& labels,
                             std::size_t window_len, std::size_t shift,
                             NormalizationParams params) {
  WindowSet set = slice_windows(series, window_len, shift);
  std::vector<bool> flags(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) {
    const std::size_t start = set.windows[k].start;
    flags[k] = labels.intersects(series.timestamps[start], series.timestamps[start + window_len - 1]);
  }
  return WindowedDataset(std::move(set), std::move(flags), std::move(params));
}

SynthKind synth_kind_from_string(std::string_view name) {
  if (name == "sine_spike") return SynthKind::kSineSpike;
  if (name == "sine_levelshift") return SynthKind::kSineLevelShift;
  throw ConfigError("unknown synthetic kind '" + std::string(name) + "'");
}

std::string_view to_string(SynthKind kind) {
  return kind == SynthKind::kSineSpike ? "sine_spike" : "sine_levelshift";
}

SynthData synth_generate(SynthKind kind, std::size_t length, std::size_t anomaly_count,
                         std::uint64_t seed, const SynthOptions& options) {
  constexpr std::size_t kMinLength = 600;  // ten default windows
  if (length < kMinLength) {
    throw ContractError("synthetic series needs length >= " + std::to_string(kMinLength));
  }
  auto rng = make_stream(seed, fnv1a64(to_string(kind)));
  std::normal_distribution<double> noise(0.0, options.noise_sigma);

  SynthData out;
  out.clean.resize(length);
  out.series.values = Matrix(length, 1);
  out.series.feature_names = {"value"};
  for (std::size_t t = 0; t < length; ++t) {
    out.clean[t] = options.amplitude *
                   std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / options.period);
    out.series.values(t, 0) = out.clean[t] + noise(rng);
    out.series.timestamps.push_back(static_cast<Timestamp>(t));
    out.series.timestamp_text.push_back(std::to_string(t));
  }

  // Anomalies are placed one by one, rejecting candidates that come within
  // `gap` steps of an earlier one.
  constexpr std::size_t kGap = 10;
  std::vector<LabelInterval> placed;
  std::uniform_real_distribution<double> magnitude(3.0, 5.0);
  std::uniform_int_distribution<std::size_t> span_len(20, 40);
  std::bernoulli_distribution positive(0.5);
  for (std::size_t a = 0; a < anomaly_count; ++a) {
    const std::size_t span = kind == SynthKind::kSineSpike ? 1 : span_len(rng);
    std::uniform_int_distribution<std::size_t> where(kGap, length - span - 1);
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      const auto start = static_cast<Timestamp>(where(rng));
      const auto end = start + static_cast<Timestamp>(span) - 1;
      ok = std::none_of(placed.begin(), placed.end(), [&](const LabelInterval& iv) {
        return start <= iv.end + static_cast<Timestamp>(kGap) &&
               iv.start <= end + static_cast<Timestamp>(kGap);
      });
      if (!ok) continue;
      placed.push_back({start, end});
      if (kind == SynthKind::kSineSpike) {
        const double m = magnitude(rng) * options.amplitude;
        out.series.values(static_cast<std::size_t>(start), 0) += positive(rng) ? m : -m;
      } else {
        for (auto t = start; t <= end; ++t) {
          out.series.values(static_cast<std::size_t>(t), 0) += 1.5 * options.amplitude;
        }
      }
    }
    if (!ok) throw ContractError("cannot place " + std::to_string(anomaly_count) +
                                 " anomalies in a series of length " + std::to_string(length));
  }
  out.labels = LabelIntervals(std::move(placed));
  return out;
}

void write_series_csv(const std::filesystem::path& path, const RawSeries& series,
                      const std::vector<int>* labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "timestamp";
  for (const auto& name : series.feature_names) out << ',' << name;
  if (labels) out << ",label";
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < series.length(); ++r) {
    out << series.timestamp_text[r];
    for (std::size_t c = 0; c < series.feature_dim(); ++c) out << ',' << series.values(r, c);
    if (labels) out << ',' << (*labels)[r];
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace algan
