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

#include "algan/commands.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "algan/data.hpp"
#include "algan/errors.hpp"

namespace algan {
namespace {

void ensure_parent(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw DataError("cannot create directory '" + parent.string() + "': " + ec.message());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << doc.dump(1) << '\n';
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

LoadedCsv load_input(const RunConfig& config) {
  if (config.data.empty()) throw ConfigError("no input series given (set data)");
  return load_csv(config.data, csv_schema_from_string(config.schema));
}

std::optional<std::vector<int>> labels_for(const RunConfig& config,
                                           const std::vector<Timestamp>& timestamps,
                                           const std::optional<std::vector<int>>& column) {
  if (!config.labels.empty()) {
    return point_labels(timestamps, load_label_intervals(config.labels, config.dataset));
  }
  if (column) {
    if (column->size() != timestamps.size()) {
      throw DataError("label column has " + std::to_string(column->size()) + " rows for " +
                      std::to_string(timestamps.size()) + " timestamps");
    }
    return column;
  }
  return std::nullopt;
}

std::vector<int> require_labels(const std::optional<std::vector<int>>& labels,
                                const char* command) {
  if (!labels) {
    throw ConfigError(std::string(command) +
                      " needs labels: set labels or use a data file with a label column");
  }
  return *labels;
}

// Hashed config fields as a JSON object, in key order.
nlohmann::json canonical_json(const RunConfig& config) {
  nlohmann::json doc = nlohmann::json::object();
  std::istringstream in(config.canonical());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    doc[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return doc;
}

struct Trained {
  TrainResult result;
  NormalizationParams normalization;
};

Trained train_models(const RunConfig& config, const RawSeries& raw, std::ostream& out) {
  NormalizedSeries norm = normalize(raw);
  for (const auto& w : norm.warnings) out << "warning: " << w << '\n';
  const WindowSet windows = slice_windows(norm.series, config.window_len, config.shift);
  const TrainConfig tc = config.train_config(raw.feature_dim());
  EpochObserver observer;
  if (config.log_every > 0) {
    observer = [&](const EpochLog& e, const GeneratorModel&, const DiscriminatorModel&) {
      if (e.epoch % config.log_every == 0) {
        out << "epoch " << e.epoch << "  d_loss " << e.d_loss << "  g_loss " << e.g_loss << '\n';
      }
    };
  }
  return {adversarial_train(windows, tc, observer), std::move(norm.params)};
}

ScoreSeries score_models(const RunConfig& config, const GeneratorModel& generator,
                         const DiscriminatorModel& discriminator, const RawSeries& raw,
                         const NormalizationParams& normalization,
                         const std::optional<std::vector<int>>& labels) {
  const ThresholdStrategy strategy = config.threshold();
  if (strategy.needs_labels() && !labels) {
    throw ConfigError("threshold_strategy " + strategy.to_string() +
                      " needs labels; set labels or use percentile:<p>");
  }
  const RawSeries scaled = apply_normalization(raw, normalization);
  const WindowSet windows =
      slice_windows(scaled, generator.config().window_len, config.shift);
  const GanInversionTarget target(generator, discriminator);
  ScoreSeries scores = score_series(windows, raw.length(), target, config.scoring_config());
  scores.threshold = select_threshold(
      scores.point_scores, labels ? std::span<const int>(*labels) : std::span<const int>{},
      strategy);
  return scores;
}

void print_report(std::ostream& out, const EvalReport& r) {
  out << "accuracy " << r.accuracy << "  precision " << r.precision << "  recall " << r.recall
      << "  f1 " << r.f1 << "  kappa " << r.cohen_kappa << "  auc " << r.auc << "  threshold "
      << r.threshold << '\n';
}

}  // namespace

TrainSummary cmd_train(const RunConfig& config, std::ostream& out) {
  config.validate();
  const LoadedCsv loaded = load_input(config);
  Trained trained = train_models(config, loaded.series, out);

  TrainSummary summary;
  summary.config_hash = config.hash();
  summary.checkpoint = config.checkpoint_path();
  summary.log = config.out_path("train_log.csv");
  summary.final_epoch = trained.result.log.back();

  Checkpoint cp;
  cp.config = config.train_config(loaded.series.feature_dim());
  cp.epoch = trained.result.log.size();
  cp.generator = trained.result.generator.params();
  cp.discriminator = trained.result.discriminator.params();
  cp.extra = {{"normalization", trained.normalization.to_json()},
              {"config", canonical_json(config)},
              {"config_hash", summary.config_hash}};
  ensure_parent(summary.checkpoint);
  cp.save(summary.checkpoint);
  ensure_parent(summary.log);
  write_training_log(summary.log, trained.result.log, summary.config_hash);

  const EpochLog& e = summary.final_epoch;
  out << "trained " << cp.epoch << " epochs  d_loss " << e.d_loss << "  g_loss " << e.g_loss
      << "  D(real) " << e.d_real_mean << "  D(fake) " << e.d_fake_mean << '\n';
  out << "checkpoint " << summary.checkpoint.string() << '\n';
  return summary;
}

ScoreSeries cmd_score(const RunConfig& config, std::ostream& out) {
  config.validate();
  const Checkpoint cp = Checkpoint::load(config.checkpoint_path());
  const LoadedCsv loaded = load_input(config);
  const RawSeries& raw = loaded.series;

  const ModelConfig& trained = cp.config.model;
  if (trained.feature_dim != raw.feature_dim()) {
    throw ConfigError("checkpoint expects " + std::to_string(trained.feature_dim) +
                      " feature(s), data has " + std::to_string(raw.feature_dim()));
  }
  const auto wanted = config.train_config(raw.feature_dim()).model.to_json();
  const auto have = trained.to_json();
  std::vector<std::string> mismatched;
  for (const auto& [key, value] : wanted.items()) {
    if (!have.contains(key) || have.at(key) != value) mismatched.push_back(key);
  }
  if (!mismatched.empty()) {
    std::string keys;
    for (const auto& k : mismatched) keys += (keys.empty() ? "" : ", ") + k;
    throw ConfigError("checkpoint model differs from the config in: " + keys);
  }
  if (!cp.extra.contains("normalization")) {
    throw DataError("checkpoint has no normalization parameters");
  }
  const NormalizationParams normalization =
      NormalizationParams::from_json(cp.extra.at("normalization"));

  const GeneratorModel generator(trained, cp.generator);
  const DiscriminatorModel discriminator(trained, cp.discriminator);
  const auto labels = labels_for(config, raw.timestamps, loaded.point_labels);
  ScoreSeries scores =
      score_models(config, generator, discriminator, raw, normalization, labels);

  const std::string hash = config.hash();
  const auto path = config.scores_path();
  ensure_parent(path);
  write_score_csv(path, raw, scores, hash);
  auto sidecar = path;
  sidecar.replace_extension(".json");
  write_json(sidecar, {{"gamma", scores.gamma},
                       {"lambda_steps", scores.lambda_steps},
                       {"threshold", scores.threshold},
                       {"seed", config.seed},
                       {"aggregation", to_string(scores.aggregation)},
                       {"threshold_strategy", config.threshold_strategy},
                       {"config", canonical_json(config)},
                       {"config_hash", hash}});

  const auto flags = scores.flags();
  out << "scored " << scores.window_scores.size() << " windows, "
      << std::count(flags.begin(), flags.end(), 1) << " of " << flags.size()
      << " points flagged (threshold " << scores.threshold << ")\n";
  out << "scores " << path.string() << '\n';
  return scores;
}

EvalReport cmd_eval(const RunConfig& config, std::ostream& out) {
  config.validate();
  const ScoreCsv scores = read_score_csv(config.scores_path());
  std::optional<std::vector<int>> column;
  if (config.labels.empty() && !config.data.empty()) column = load_input(config).point_labels;
  const std::vector<int> labels =
      require_labels(labels_for(config, scores.timestamps, column), "eval");
  if (labels.size() != scores.point_scores.size()) {
    throw DataError("labels cover " + std::to_string(labels.size()) + " points, scores " +
                    std::to_string(scores.point_scores.size()));
  }
  // Single-class labels fail here with the auc message.
  auc(scores.point_scores, labels);
  const double threshold = select_threshold(scores.point_scores, labels, config.threshold());
  const EvalReport report = evaluate(scores.point_scores, labels, threshold);

  const std::string hash = config.hash();
  nlohmann::json doc = report.to_json();
  doc["config_hash"] = hash;
  doc["threshold_strategy"] = config.threshold_strategy;
  write_json(config.out_path("report.json"), doc);
  append_report_csv(config.out_path("reports.csv"), report,
                    config.scores_path().stem().string(), hash);
  print_report(out, report);
  return report;
}

std::vector<CompareRow> cmd_compare(const RunConfig& config, const RunConfig* against,
                                    bool force, std::ostream& out) {
  RunConfig runs[2] = {config, against ? *against : config};
  runs[0].variant = std::string(to_string(CellVariant::kAlstm));
  runs[1].variant = std::string(to_string(CellVariant::kPlainLstm));
  for (const auto& r : runs) r.validate();
  auto diffs = config_differences(runs[0], runs[1]);
  std::erase(diffs, "variant");
  if (!diffs.empty() && !force) {
    std::string keys;
    for (const auto& k : diffs) keys += (keys.empty() ? "" : ", ") + k;
    throw ConfigError("compared configs differ beyond the variant (" + keys +
                      "); pass --force to compare anyway");
  }

  std::vector<CompareRow> rows;
  for (const RunConfig& run : runs) {
    out << "variant " << run.variant << '\n';
    const LoadedCsv loaded = load_input(run);
    const std::vector<int> labels = require_labels(
        labels_for(run, loaded.series.timestamps, loaded.point_labels), "compare");
    const Trained trained = train_models(run, loaded.series, out);
    const ScoreSeries scores =
        score_models(run, trained.result.generator, trained.result.discriminator,
                     loaded.series, trained.normalization, labels);
    CompareRow row;
    row.variant = run.variant;
    row.config_hash = run.hash();
    RunConfig shared = run;
    shared.variant.clear();
    row.shared_hash = shared.hash();
    row.report = evaluate(scores.point_scores, labels, scores.threshold);
    print_report(out, row.report);
    rows.push_back(std::move(row));
  }

  const auto path = config.out_path("comparison.csv");
  ensure_parent(path);
  std::ofstream csv(path);
  if (!csv) throw DataError("cannot write '" + path.string() + "'");
  csv << report_csv_header() << ",shared_hash\n";
  for (const auto& r : rows) {
    csv << report_csv_row(r.report, r.variant, r.config_hash) << ',' << r.shared_hash << '\n';
  }
  if (!csv) throw DataError("failed writing '" + path.string() + "'");
  out << "comparison " << path.string() << '\n';
  return rows;
}

SynthOutputs cmd_synth(const RunConfig& config, std::ostream& out) {
  config.validate();
  const SynthData data = synth_generate(synth_kind_from_string(config.synth_kind),
                                        config.synth_length, config.synth_anomalies,
                                        config.seed);
  const auto labels = point_labels(data.series.timestamps, data.labels);
  SynthOutputs paths{config.out_path("synth.csv"), config.out_path("synth_labels.json")};
  ensure_parent(paths.series);
  write_series_csv(paths.series, data.series, &labels);
  write_json(paths.labels, label_intervals_to_json(data.labels, "synth"));
  write_json(config.out_path("synth_meta.json"),
             {{"config", canonical_json(config)}, {"config_hash", config.hash()}});
  out << "wrote " << data.series.length() << " points with " << data.labels.intervals().size()
      << " anomalies to " << paths.series.string() << '\n';
  return paths;
}

}  // namespace algan
