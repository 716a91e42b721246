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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "algan/data.hpp"
#include "algan/gan.hpp"

namespace algan {

// Frozen generator/feature pair that latent inversion runs against. Both
// calls must only read model state so several threads can share one target.
class InversionTarget {
 public:
  virtual ~InversionTarget() = default;
  virtual std::size_t latent_dim() const = 0;
  // z: (steps * batch) x latent_dim -> (steps * batch) x feature_dim
  virtual Var generate(Graph& graph, Var z, std::size_t batch) const = 0;
  // The f(.) feature tap; only called when gamma > 0.
  virtual Var features(Graph& graph, Var x, std::size_t batch) const = 0;
};

// Adapter over a trained generator and discriminator. f(.) is the
// discriminator's final stack output (one hidden row per step).
class GanInversionTarget final : public InversionTarget {
 public:
  GanInversionTarget(const GeneratorModel& generator, const DiscriminatorModel& discriminator)
      : generator_(generator), discriminator_(discriminator) {}

  std::size_t latent_dim() const override { return generator_.config().latent_dim; }
  Var generate(Graph& graph, Var z, std::size_t batch) const override;
  Var features(Graph& graph, Var x, std::size_t batch) const override;

 private:
  const GeneratorModel& generator_;
  const DiscriminatorModel& discriminator_;
};

// sum |x - g| over all steps and features.
Var residual_loss(Var x, Var g);
// sum |f(x) - f(g)| with f(.) the discriminator feature tap.
Var discrimination_loss(Var x, Var g, const DiscriminatorModel& discriminator);

struct InversionConfig {
  double gamma = 0.1;
  std::size_t lambda_steps = 50;
  double step_size = 0.01;
  double grad_clip = 10.0;  // per-window L2 bound on the z gradient; <= 0 disables

  void validate() const;
};

struct LatentCode {
  Matrix z;  // steps x latent_dim after the last update
  std::vector<double> loss_trajectory;  // L(z_1) .. L(z_Lambda)
  double step_size = 0.0;
};

struct InversionResult {
  LatentCode latent;
  double final_loss = 0.0;      // L(z_Lambda)
  double residual = 0.0;        // R(x) at z_Lambda
  double discrimination = 0.0;  // D(x) at z_Lambda (0 when gamma == 0)
  double gamma = 0.0;
  // Per-step share of the final loss at z_Lambda; sums to final_loss.
  std::vector<double> step_contributions;
  std::size_t updates = 0;
};

// Gradient descent on z with the models frozen:
//   L(z) = (1 - gamma) * R + gamma * D,  z <- z - step_size * clip(grad_z L)
// z_1 is drawn from the standard-normal prior seeded by `seed` unless
// `initial_z` is given. Throws DivergenceError naming the step on a
// non-finite loss.
InversionResult invert_window(const Matrix& x, const InversionTarget& target,
                              const InversionConfig& config, std::uint64_t seed,
                              const std::optional<Matrix>& initial_z = std::nullopt);

// Same as invert_window for several windows in one graph; every window's
// result is bit-identical to inverting it alone. `ids` label windows in
// error messages.
std::vector<InversionResult> invert_batch(std::span<const Matrix* const> windows,
                                          const InversionTarget& target,
                                          const InversionConfig& config,
                                          std::span<const std::uint64_t> seeds,
                                          std::span<const std::size_t> ids,
                                          std::span<const Matrix> initial_z = {});

// A(x) = (1 - gamma) * R(x) + gamma * D(x) at z_Lambda.
double anomaly_score(double gamma, double residual, double discrimination);
double anomaly_score(const InversionResult& result);

enum class PointAggregation {
  // Each window's per-step loss share is averaged over the windows covering
  // a point (per feature).
  kStepMean,
  // Max over covering windows of the window score divided by its element count.
  kWindowMax,
};

std::string_view to_string(PointAggregation aggregation);
PointAggregation point_aggregation_from_string(std::string_view name);

struct ScoringConfig {
  InversionConfig inversion;
  std::uint64_t seed = 42;
  std::size_t batch_size = 32;  // windows per inversion graph
  std::size_t threads = 1;      // 0 picks std::thread::hardware_concurrency()
  PointAggregation aggregation = PointAggregation::kStepMean;

  void validate() const;
};

struct ScoreSeries {
  std::vector<double> window_scores;
  std::vector<double> point_scores;
  double threshold = 0.0;
  double gamma = 0.0;
  std::size_t lambda_steps = 0;
  PointAggregation aggregation = PointAggregation::kStepMean;

  // point_score > threshold
  std::vector<int> flags() const;
};

// Seed of window `index` under global `seed`; independent of scoring order.
std::uint64_t window_seed(std::uint64_t seed, std::size_t index);

// Inverts every window (in the order given by `order`, default ascending)
// and aggregates window results onto the `series_length` original points.
// Uncovered trailing points inherit the last covered point's score.
ScoreSeries score_series(const WindowSet& windows, std::size_t series_length,
                         const InversionTarget& target, const ScoringConfig& config,
                         std::span<const std::size_t> order = {});

// Aggregation step on its own, for already inverted windows.
std::vector<double> aggregate_points(const WindowSet& windows, std::size_t series_length,
                                     std::span<const double> window_scores,
                                     std::span<const std::vector<double>> step_contributions,
                                     PointAggregation aggregation);

struct ThresholdStrategy {
  enum class Kind { kBestF1, kPercentile };
  Kind kind = Kind::kBestF1;
  double percentile = 99.0;

  static ThresholdStrategy parse(std::string_view text);  // "best_f1" | "percentile:<p>"
  std::string to_string() const;
  bool needs_labels() const { return kind == Kind::kBestF1; }
};

// best_f1: the midpoint between consecutive distinct scores with the highest
// F1 (lowest such midpoint on ties); needs both label classes and at least two
// distinct scores. percentile: linear-interpolated percentile of the scores.
double select_threshold(std::span<const double> scores, std::span<const int> labels,
                        const ThresholdStrategy& strategy);

// CSV: timestamp, value column(s), point_score, flagged, config_hash.
void write_score_csv(const std::filesystem::path& path, const RawSeries& series,
                     const ScoreSeries& scores, const std::string& config_hash);

struct ScoreCsv {
  std::vector<Timestamp> timestamps;
  std::vector<double> point_scores;
  std::vector<int> flagged;
};
ScoreCsv read_score_csv(const std::filesystem::path& path);

}  // namespace algan
