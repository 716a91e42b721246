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
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "algan/data.hpp"
#include "algan/errors.hpp"
#include "test_support.hpp"

namespace algan {
namespace {

using test::Rng;
using test::TempDir;

std::string univariate_csv(std::size_t rows) {
  std::ostringstream out;
  out << "timestamp,value\n";
  for (std::size_t i = 0; i < rows; ++i) out << i << ',' << std::sin(0.1 * i) << '\n';
  return out.str();
}

RawSeries integer_series(std::vector<double> values) {
  RawSeries s;
  s.values = Matrix(values.size(), 1, values);
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.timestamps.push_back(static_cast<Timestamp>(i));
    s.timestamp_text.push_back(std::to_string(i));
  }
  s.feature_names = {"value"};
  return s;
}

TEST(Timestamps, IntegersAndIsoForms) {
  EXPECT_EQ(parse_timestamp("1234"), 1234);
  EXPECT_EQ(parse_timestamp("-5"), -5);
  EXPECT_EQ(parse_timestamp("1970-01-01 00:00:00"), 0);
  EXPECT_EQ(parse_timestamp("1970-01-02T00:00:01Z"), 86401000);
  EXPECT_EQ(parse_timestamp("2014-04-10 07:15:00"), parse_timestamp("2014-04-10T07:15"));
  EXPECT_EQ(parse_timestamp("1970-01-01 00:00:00.250"), 250);
  EXPECT_THROW(parse_timestamp("yesterday"), DataError);
  EXPECT_THROW(parse_timestamp("2014-13-01 00:00:00"), DataError);
}

TEST(LoadCsv, UnivariateHundredRows) {
  TempDir dir("csv");
  const auto loaded = load_csv(dir.write("a.csv", univariate_csv(100)), CsvSchema::kUnivariate);
  EXPECT_EQ(loaded.series.length(), 100u);
  EXPECT_EQ(loaded.series.feature_dim(), 1u);
  EXPECT_FALSE(loaded.point_labels.has_value());
  EXPECT_EQ(loaded.series.timestamps[99], 99);
}

TEST(LoadCsv, NabStyleIsoTimestampsAndQuotes) {
  TempDir dir("csv");
  const auto path = dir.write("nab.csv",
                              "timestamp,value\n"
                              "\"2014-04-10 07:15:00\",1.5\n"
                              "2014-04-10 07:20:00,\"2.5\"\n");
  const auto loaded = load_csv(path, CsvSchema::kUnivariate);
  EXPECT_EQ(loaded.series.timestamps[1] - loaded.series.timestamps[0], 300000);
  EXPECT_EQ(loaded.series.timestamp_text[0], "2014-04-10 07:15:00");
  EXPECT_EQ(loaded.series.values(1, 0), 2.5);
}

TEST(LoadCsv, FiftyOneFeatureMultivariate) {
  TempDir dir("csv");
  std::ostringstream out;
  out << "Timestamp";
  for (int f = 0; f < 51; ++f) out << ",sensor_" << f;
  out << ",label\n";
  for (int r = 0; r < 20; ++r) {
    out << r;
    for (int f = 0; f < 51; ++f) out << ',' << r * 0.5 + f;
    out << ',' << (r == 7 ? 1 : 0) << '\n';
  }
  const auto loaded = load_csv(dir.write("swat.csv", out.str()), CsvSchema::kMultivariate);
  EXPECT_EQ(loaded.series.feature_dim(), 51u);
  EXPECT_EQ(loaded.series.length(), 20u);
  EXPECT_EQ(loaded.series.feature_names[50], "sensor_50");
  ASSERT_TRUE(loaded.point_labels.has_value());
  EXPECT_EQ((*loaded.point_labels)[7], 1);
  EXPECT_THROW(load_csv(dir.file("swat.csv"), CsvSchema::kUnivariate), DataError);
}

TEST(LoadCsv, ErrorsNameTheProblem) {
  TempDir dir("csv");
  const auto expect_error = [&](const std::string& text, const std::string& fragment) {
    const auto path = dir.write("bad.csv", text);
    try {
      load_csv(path, CsvSchema::kUnivariate);
      ADD_FAILURE() << "no error for: " << text;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error("timestamp,value\n", "no data rows");
  expect_error("", "no header");
  expect_error("timestamp,value\n0,1\n1,\n", "line 3");
  expect_error("timestamp,value\n0,1\n0,2\n", "line 3");
  expect_error("timestamp,value\n0,1\n1,abc\n", "abc");
  expect_error("timestamp,value\n0,1,2\n", "line 2");
  try {
    load_csv(dir.file("missing.csv"), CsvSchema::kUnivariate);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
  }
}

TEST(Labels, IntervalsMergeAndQuery) {
  const LabelIntervals labels({{10, 12}, {1, 3}, {2, 5}, {20, 20}});
  ASSERT_EQ(labels.intervals().size(), 3u);
  EXPECT_EQ(labels.intervals()[0].start, 1);
  EXPECT_EQ(labels.intervals()[0].end, 5);
  EXPECT_TRUE(labels.contains(20));
  EXPECT_FALSE(labels.contains(6));
  EXPECT_TRUE(labels.intersects(6, 10));
  EXPECT_FALSE(labels.intersects(6, 9));
  EXPECT_THROW(LabelIntervals({{5, 4}}), DataError);
}

TEST(Labels, JsonFileRoundTrip) {
  TempDir dir("labels");
  const auto path = dir.write(
      "labels.json",
      R"({"realKnownCause/a.csv": [["2014-04-10 07:15:00", "2014-04-10 08:15:00"]],
          "b.csv": [[3, 7], [10, 11]]})");
  const auto a = load_label_intervals(path, "realKnownCause/a.csv");
  EXPECT_EQ(a.intervals()[0].end - a.intervals()[0].start, 3600000);
  const auto b = load_label_intervals(path, "b.csv");
  EXPECT_EQ(b.intervals().size(), 2u);
  EXPECT_THROW(load_label_intervals(path), DataError);  // two entries, no name
  EXPECT_THROW(load_label_intervals(path, "c.csv"), DataError);
  const auto j = label_intervals_to_json(b, "b");
  const auto back = dir.write("b.json", j.dump());
  const auto b2 = load_label_intervals(back);
  EXPECT_EQ(b2.intervals().size(), 2u);
  EXPECT_EQ(b2.intervals()[1].start, 10);
}

TEST(Labels, PointLabelsAndRunsAgree) {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Timestamp> ts;
    std::vector<int> labels;
    Timestamp t = 0;
    for (std::size_t i = 0; i < 40; ++i) {
      t += static_cast<Timestamp>(test::uniform_size(rng, 1, 3));
      ts.push_back(t);
      labels.push_back(test::uniform_size(rng, 0, 3) == 0);
    }
    EXPECT_EQ(point_labels(ts, intervals_from_point_labels(ts, labels)), labels);
  }
}

TEST(Normalize, Examples) {
  const auto n = normalize(integer_series({0, 5, 10}));
  EXPECT_EQ(n.series.values, Matrix(3, 1, std::vector<double>{-1, 0, 1}));
  EXPECT_TRUE(n.warnings.empty());
  const auto c = normalize(integer_series({7, 7, 7}));
  EXPECT_EQ(c.series.values, Matrix(3, 1));
  EXPECT_EQ(c.warnings.size(), 1u);
}

TEST(Normalize, OrderPreservingAndInvertible) {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = test::uniform_size(rng, 2, 30);
    RawSeries s = integer_series(std::vector<double>(n, 0.0));
    s.values = test::random_matrix(rng, n, 3, 100.0);
    const auto norm = normalize(s);
    const auto back = denormalize(norm.series, norm.params);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      EXPECT_NEAR(back.values[i], s.values[i], 1e-12 * std::max(1.0, std::abs(s.values[i])));
      EXPECT_GE(norm.series.values[i], -1.0);
      EXPECT_LE(norm.series.values[i], 1.0);
    }
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (s.values(i, c) < s.values(j, c)) {
            EXPECT_LE(norm.series.values(i, c), norm.series.values(j, c));
          }
        }
      }
    }
    EXPECT_EQ(apply_normalization(s, norm.params).values, norm.series.values);
  }
}

TEST(Normalize, ParamsJsonRoundTripAndDimensionCheck) {
  const auto n = normalize(integer_series({1, 4, 2}));
  const auto p = NormalizationParams::from_json(n.params.to_json());
  EXPECT_EQ(p.min, n.params.min);
  EXPECT_EQ(p.max, n.params.max);
  RawSeries two = integer_series({1, 2});
  two.values = Matrix(2, 2, 1.0);
  EXPECT_THROW(apply_normalization(two, p), DimensionError);
}

TEST(Windows, CountsAndSlices) {
  EXPECT_EQ(window_count(100, 60, 1), 41u);
  EXPECT_THROW(window_count(59, 60, 1), ContractError);
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t len = test::uniform_size(rng, 1, 20), shift = test::uniform_size(rng, 1, 7);
    const std::size_t t = len + test::uniform_size(rng, 0, 50);
    std::size_t brute = 0;
    for (std::size_t s = 0; s + len <= t; s += shift) ++brute;
    EXPECT_EQ(window_count(t, len, shift), brute);
  }
  const auto s = integer_series({0, 1, 2, 3, 4, 5, 6});
  const auto w = slice_windows(s, 3, 2);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w.windows[2].start, 4u);
  EXPECT_EQ(w.windows[2].values(2, 0), 6.0);
}

TEST(Windows, OverlapRuleExamples) {
  std::vector<double> v(100, 0.0);
  const auto s = integer_series(v);
  const auto flagged = make_windows(s, LabelIntervals({{59, 59}}), 60, 1);
  EXPECT_TRUE(flagged.flags()[0]);
  EXPECT_TRUE(flagged.flags()[40]);  // spans 40..99
  const auto none = make_windows(s, LabelIntervals(), 60, 1);
  for (bool f : none.flags()) EXPECT_FALSE(f);
  const auto late = make_windows(s, LabelIntervals({{60, 60}}), 60, 1);
  EXPECT_FALSE(late.flags()[0]);
  EXPECT_TRUE(late.flags()[1]);
}

TEST(Synth, Examples) {
  const auto none = synth_generate(SynthKind::kSineSpike, 600, 0, 1);
  EXPECT_TRUE(none.labels.empty());
  EXPECT_EQ(none.series.length(), 600u);
  const auto a = synth_generate(SynthKind::kSineSpike, 1000, 5, 7);
  const auto b = synth_generate(SynthKind::kSineSpike, 1000, 5, 7);
  EXPECT_EQ(a.series.values, b.series.values);
  EXPECT_EQ(a.labels.intervals().size(), 5u);
  EXPECT_THROW(synth_generate(SynthKind::kSineSpike, 599, 1, 1), ContractError);
}

TEST(Synth, SpikesStandOutOfTheNoise) {
  const SynthOptions opts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = synth_generate(SynthKind::kSineSpike, 3000, 8, seed, opts);
    ASSERT_EQ(d.labels.intervals().size(), 8u);
    for (const auto& iv : d.labels.intervals()) {
      EXPECT_EQ(iv.start, iv.end);
      const auto t = static_cast<std::size_t>(iv.start);
      EXPECT_GT(std::abs(d.series.values(t, 0) - d.clean[t]), 3.0 * opts.noise_sigma);
    }
  }
}

TEST(Synth, LevelShiftsAreLabelledRuns) {
  const auto d = synth_generate(SynthKind::kSineLevelShift, 2000, 4, 3);
  ASSERT_EQ(d.labels.intervals().size(), 4u);
  for (const auto& iv : d.labels.intervals()) {
    const auto len = iv.end - iv.start + 1;
    EXPECT_GE(len, 20);
    EXPECT_LE(len, 40);
  }
  EXPECT_EQ(synth_kind_from_string("sine_levelshift"), SynthKind::kSineLevelShift);
  EXPECT_THROW(synth_kind_from_string("square"), ConfigError);
}

TEST(Synth, CsvRoundTripKeepsLabels) {
  TempDir dir("synth");
  const auto d = synth_generate(SynthKind::kSineSpike, 700, 3, 2);
  const auto labels = point_labels(d.series.timestamps, d.labels);
  write_series_csv(dir.file("s.csv"), d.series, &labels);
  const auto loaded = load_csv(dir.file("s.csv"), CsvSchema::kUnivariate);
  EXPECT_EQ(loaded.series.values, d.series.values);
  ASSERT_TRUE(loaded.point_labels.has_value());
  EXPECT_EQ(*loaded.point_labels, labels);
}

}  // namespace
}  // namespace algan
