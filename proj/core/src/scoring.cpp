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

#include "algan/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "algan/errors.hpp"
#include "algan/evaluation.hpp"
#include "algan/random.hpp"

namespace algan {

Var GanInversionTarget::generate(Graph& graph, Var z, std::size_t batch) const {
  return generator_.forward(graph, z, batch);
}

Var GanInversionTarget::features(Graph& graph, Var x, std::size_t batch) const {
  return discriminator_.forward(graph, x, batch).features;
}

Var residual_loss(Var x, Var g) {
  require_same_shape(x.value(), g.value(), "residual_loss");
  return sum(abs(sub(x, g)));
}

Var discrimination_loss(Var x, Var g, const DiscriminatorModel& discriminator) {
  require_same_shape(x.value(), g.value(), "discrimination_loss");
  const std::size_t window_len = discriminator.config().window_len;
  if (x.rows() % window_len != 0) {
    throw DimensionError("discrimination_loss: " + x.shape_string() +
                         " is not a batch of windows of length " + std::to_string(window_len));
  }
  const std::size_t batch = x.rows() / window_len;
  Graph& graph = *x.graph();
  const Var fx = discriminator.forward(graph, x, batch).features;
  const Var fg = discriminator.forward(graph, g, batch).features;
  return sum(abs(sub(fx, fg)));
}

void InversionConfig::validate() const {
  if (lambda_steps == 0) throw ContractError("inversion needs at least one step");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractError("gamma must lie in [0, 1]");
  if (!(step_size > 0.0)) throw ContractError("inversion step size must be positive");
}

namespace {

// Sum of each row of `m`, accumulated into the owning window r % batch.
void row_sums_by_window(const Matrix& m, std::size_t batch, std::vector<double>& per_window,
                        std::vector<std::vector<double>>* per_step) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (double v : m.row(r)) acc += v;
    per_window[r % batch] += acc;
    if (per_step) (*per_step)[r % batch][r / batch] = acc;
  }
}

}  // namespace

std::vector<InversionResult> invert_batch(std::span<const Matrix* const> windows,
                                          const InversionTarget& target,
                                          const InversionConfig& config,
                                          std::span<const std::uint64_t> seeds,
                                          std::span<const std::size_t> ids,
                                          std::span<const Matrix> initial_z) {
  config.validate();
  const std::size_t batch = windows.size();
  if (batch == 0) throw ContractError("invert_batch: no windows");
  if (seeds.size() != batch || ids.size() != batch) {
    throw ContractError("invert_batch: need one seed and one id per window");
  }
  if (!initial_z.empty() && initial_z.size() != batch) {
    throw ContractError("invert_batch: need one initial z per window");
  }
  const std::size_t steps = windows.front()->rows();
  const std::size_t latent = target.latent_dim();
  const double gamma = config.gamma;
  const Matrix x = to_time_major(windows);

  Matrix z(steps * batch, latent);
  for (std::size_t b = 0; b < batch; ++b) {
    if (!initial_z.empty()) {
      if (initial_z[b].rows() != steps || initial_z[b].cols() != latent) {
        throw DimensionError("initial z " + initial_z[b].shape_string() + ", expected " +
                             std::to_string(steps) + "x" + std::to_string(latent));
      }
      for (std::size_t t = 0; t < steps; ++t) {
        std::copy_n(initial_z[b].row(t).begin(), latent, z.row(t * batch + b).begin());
      }
    } else {
      auto rng = make_stream(seeds[b], fnv1a64("latent"));
      std::normal_distribution<double> prior(0.0, 1.0);
      for (std::size_t t = 0; t < steps; ++t) {
        for (double& v : z.row(t * batch + b)) v = prior(rng);
      }
    }
  }

  Matrix fx;
  if (gamma > 0.0) {
    Graph g;
    fx = target.features(g, g.constant(x), batch).value();
  }

  std::vector<InversionResult> results(batch);
  for (auto& r : results) {
    r.gamma = gamma;
    r.latent.step_size = config.step_size;
    r.latent.loss_trajectory.reserve(config.lambda_steps);
  }

  for (std::size_t lambda = 0; lambda < config.lambda_steps; ++lambda) {
    const bool last = lambda + 1 == config.lambda_steps;
    Graph g;
    const Var zv = g.variable(z);
    const Var generated = target.generate(g, zv, batch);
    if (!generated.value().same_shape(x)) {
      throw DimensionError("generator produced " + generated.shape_string() +
                           " for windows packed as " + x.shape_string());
    }
    const Var residual_terms = abs(sub(g.constant(x), generated));
    Var root = scale(sum(residual_terms), 1.0 - gamma);
    std::optional<Var> feature_terms;
    if (gamma > 0.0) {
      feature_terms = abs(sub(g.constant(fx), target.features(g, generated, batch)));
      root = add(root, scale(sum(*feature_terms), gamma));
    }

    std::vector<double> residual(batch, 0.0), discrimination(batch, 0.0);
    std::vector<std::vector<double>> res_steps, disc_steps;
    if (last) {
      res_steps.assign(batch, std::vector<double>(steps, 0.0));
      disc_steps.assign(batch, std::vector<double>(steps, 0.0));
    }
    row_sums_by_window(residual_terms.value(), batch, residual, last ? &res_steps : nullptr);
    if (feature_terms) {
      row_sums_by_window(feature_terms->value(), batch, discrimination,
                         last ? &disc_steps : nullptr);
    }
    for (std::size_t b = 0; b < batch; ++b) {
      const double loss = anomaly_score(gamma, residual[b], discrimination[b]);
      if (!std::isfinite(loss)) {
        throw DivergenceError("window " + std::to_string(ids[b]) + ": inversion loss is " +
                              std::to_string(loss) + " at step " + std::to_string(lambda + 1));
      }
      InversionResult& r = results[b];
      r.latent.loss_trajectory.push_back(loss);
      if (last) {
        r.final_loss = loss;
        r.residual = residual[b];
        r.discrimination = discrimination[b];
        r.step_contributions.resize(steps);
        for (std::size_t t = 0; t < steps; ++t) {
          r.step_contributions[t] = anomaly_score(gamma, res_steps[b][t], disc_steps[b][t]);
        }
      }
    }

    g.backward(root);
    const Matrix& grad = zv.grad();
    std::vector<double> norm_sq(batch, 0.0);
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      for (double v : grad.row(r)) norm_sq[r % batch] += v * v;
    }
    for (std::size_t b = 0; b < batch; ++b) {
      if (!std::isfinite(norm_sq[b])) {
        throw DivergenceError("window " + std::to_string(ids[b]) +
                              ": non-finite latent gradient at step " +
                              std::to_string(lambda + 1));
      }
    }
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      const std::size_t b = r % batch;
      const double norm = std::sqrt(norm_sq[b]);
      const double factor =
          config.grad_clip > 0.0 && norm > config.grad_clip ? config.grad_clip / norm : 1.0;
      const auto gr = grad.row(r);
      auto zr = z.row(r);
      for (std::size_t c = 0; c < zr.size(); ++c) zr[c] -= config.step_size * (factor * gr[c]);
    }
    for (auto& res : results) ++res.updates;
  }

  const std::vector<Matrix> final_z = from_time_major(z, batch);
  for (std::size_t b = 0; b < batch; ++b) results[b].latent.z = final_z[b];
  return results;
}

InversionResult invert_window(const Matrix& x, const InversionTarget& target,
                              const InversionConfig& config, std::uint64_t seed,
                              const std::optional<Matrix>& initial_z) {
  const Matrix* windows[] = {&x};
  const std::uint64_t seeds[] = {seed};
  const std::size_t ids[] = {0};
  if (initial_z) {
    return invert_batch(windows, target, config, seeds, ids, std::span(&*initial_z, 1)).front();
  }
  return invert_batch(windows, target, config, seeds, ids).front();
}

double anomaly_score(double gamma, double residual, double discrimination) {
  return (1.0 - gamma) * residual + gamma * discrimination;
}

double anomaly_score(const InversionResult& result) {
  return anomaly_score(result.gamma, result.residual, result.discrimination);
}

std::string_view to_string(PointAggregation aggregation) {
  return aggregation == PointAggregation::kStepMean ? "step_mean" : "window_max";
}

PointAggregation point_aggregation_from_string(std::string_view name) {
  if (name == "step_mean") return PointAggregation::kStepMean;
  if (name == "window_max") return PointAggregation::kWindowMax;
  throw ConfigError("unknown point aggregation '" + std::string(name) + "'");
}

void ScoringConfig::validate() const {
  inversion.validate();
  if (batch_size == 0) throw ConfigError("scoring batch size must be positive");
}

std::vector<int> ScoreSeries::flags() const {
  std::vector<int> out(point_scores.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = point_scores[i] > threshold;
  return out;
}

std::uint64_t window_seed(std::uint64_t seed, std::size_t index) {
  return make_stream(seed, static_cast<std::uint64_t>(index))();
}

std::vector<double> aggregate_points(const WindowSet& windows, std::size_t series_length,
                                     std::span<const double> window_scores,
                                     std::span<const std::vector<double>> step_contributions,
                                     PointAggregation aggregation) {
  if (window_scores.size() != windows.size()) {
    throw ContractError("aggregate_points: one score per window required");
  }
  const std::size_t len = windows.window_len;
  const double features = static_cast<double>(std::max<std::size_t>(windows.feature_dim, 1));
  std::vector<double> points(series_length, 0.0);
  std::vector<std::size_t> cover(series_length, 0);
  if (aggregation == PointAggregation::kWindowMax) {
    const double elements = static_cast<double>(len) * features;
    std::fill(points.begin(), points.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < windows.size(); ++k) {
      const double s = window_scores[k] / elements;
      for (std::size_t t = windows.windows[k].start; t < windows.windows[k].start + len; ++t) {
        points[t] = std::max(points[t], s);
        ++cover[t];
      }
    }
  } else {
    if (step_contributions.size() != windows.size()) {
      throw ContractError("aggregate_points: step contributions missing");
    }
    for (std::size_t k = 0; k < windows.size(); ++k) {
      if (step_contributions[k].size() != len) {
        throw ContractError("aggregate_points: window " + std::to_string(k) +
                            " has the wrong number of step contributions");
      }
      for (std::size_t t = 0; t < len; ++t) {
        points[windows.windows[k].start + t] += step_contributions[k][t] / features;
        ++cover[windows.windows[k].start + t];
      }
    }
    for (std::size_t t = 0; t < series_length; ++t) {
      if (cover[t] > 0) points[t] /= static_cast<double>(cover[t]);
    }
  }
  for (std::size_t t = 1; t < series_length; ++t) {
    if (cover[t] == 0) points[t] = points[t - 1];
  }
  return points;
}

ScoreSeries score_series(const WindowSet& windows, std::size_t series_length,
                         const InversionTarget& target, const ScoringConfig& config,
                         std::span<const std::size_t> order) {
  config.validate();
  if (windows.size() == 0) throw ContractError("score_series: no windows to score");
  const std::size_t last_end = windows.windows.back().start + windows.window_len;
  if (series_length < last_end) {
    throw ContractError("score_series: series length " + std::to_string(series_length) +
                        " is shorter than the windows it came from");
  }
  std::vector<std::size_t> sequence;
  if (order.empty()) {
    sequence.resize(windows.size());
    std::iota(sequence.begin(), sequence.end(), std::size_t{0});
  } else {
    sequence.assign(order.begin(), order.end());
    std::vector<std::size_t> check = sequence;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < check.size(); ++i) {
      if (check[i] != i || check.size() != windows.size()) {
        throw ContractError("score_series: order must be a permutation of the window indices");
      }
    }
  }

  const std::size_t chunk = config.batch_size;
  const std::size_t n_chunks = (sequence.size() + chunk - 1) / chunk;
  std::vector<InversionResult> results(windows.size());
  std::vector<std::exception_ptr> errors(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    try {
      const std::size_t begin = c * chunk;
      const std::size_t end = std::min(sequence.size(), begin + chunk);
      std::vector<const Matrix*> xs;
      std::vector<std::uint64_t> seeds;
      std::vector<std::size_t> ids;
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t k = sequence[i];
        xs.push_back(&windows.windows[k].values);
        seeds.push_back(window_seed(config.seed, k));
        ids.push_back(k);
      }
      auto batch = invert_batch(xs, target, config.inversion, seeds, ids);
      for (std::size_t i = 0; i < batch.size(); ++i) results[ids[i]] = std::move(batch[i]);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  std::size_t threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::clamp<std::size_t>(threads, 1, n_chunks);
  if (threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < n_chunks; c = next++) run_chunk(c);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ScoreSeries out;
  out.gamma = config.inversion.gamma;
  out.lambda_steps = config.inversion.lambda_steps;
  out.aggregation = config.aggregation;
  out.window_scores.reserve(results.size());
  std::vector<std::vector<double>> contributions;
  contributions.reserve(results.size());
  for (auto& r : results) {
    out.window_scores.push_back(anomaly_score(r));
    contributions.push_back(std::move(r.step_contributions));
  }
  out.point_scores = aggregate_points(windows, series_length, out.window_scores, contributions,
                                      config.aggregation);
  out.threshold = std::numeric_limits<double>::infinity();
  return out;
}

ThresholdStrategy ThresholdStrategy::parse(std::string_view text) {
  ThresholdStrategy s;
  if (text == "best_f1") {
    s.kind = Kind::kBestF1;
    return s;
  }
  constexpr std::string_view prefix = "percentile:";
  if (text.starts_with(prefix)) {
    const std::string number(text.substr(prefix.size()));
    char* end = nullptr;
    const double p = std::strtod(number.c_str(), &end);
    if (!number.empty() && end == number.c_str() + number.size() && p >= 0.0 && p <= 100.0) {
      s.kind = Kind::kPercentile;
      s.percentile = p;
      return s;
    }
  }
  throw ConfigError("unknown threshold strategy '" + std::string(text) +
                    "' (expected best_f1 or percentile:<0-100>)");
}

std::string ThresholdStrategy::to_string() const {
  if (kind == Kind::kBestF1) return "best_f1";
  std::ostringstream out;
  out << "percentile:" << percentile;
  return out.str();
}

double select_threshold(std::span<const double> scores, std::span<const int> labels,
                        const ThresholdStrategy& strategy) {
  if (scores.empty()) throw ContractError("select_threshold: no scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());

  if (strategy.kind == ThresholdStrategy::Kind::kPercentile) {
    const double pos = strategy.percentile / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return frac == 0.0 ? sorted[lo] : sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }

  if (labels.size() != scores.size()) {
    throw ContractError("select_threshold: scores and labels differ in length");
  }
  const std::size_t positives =
      static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
  if (positives == 0 || positives == labels.size()) {
    throw ContractError("select_threshold: best_f1 needs both positive and negative labels");
  }
  // Distinct scores with their positive/negative counts, ascending.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  struct Level {
    double score;
    std::size_t pos = 0, neg = 0;
  };
  std::vector<Level> levels;
  for (std::size_t i : order) {
    if (levels.empty() || levels.back().score != scores[i]) levels.push_back({scores[i]});
    (labels[i] != 0 ? levels.back().pos : levels.back().neg)++;
  }
  if (levels.size() < 2) {
    throw ContractError("select_threshold: best_f1 needs at least two distinct scores");
  }
  // Counts of points strictly above each midpoint, from the top down.
  std::vector<std::size_t> pos_above(levels.size(), 0), neg_above(levels.size(), 0);
  for (std::size_t i = levels.size() - 1; i-- > 0;) {
    pos_above[i] = pos_above[i + 1] + levels[i + 1].pos;
    neg_above[i] = neg_above[i + 1] + levels[i + 1].neg;
  }
  const std::size_t negatives = labels.size() - positives;
  double best_f1 = -1.0;
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const ConfusionCounts c{pos_above[i], neg_above[i], negatives - neg_above[i],
                            positives - pos_above[i]};
    const double f1 = metrics(c).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best = 0.5 * (levels[i].score + levels[i + 1].score);
    }
  }
  return best;
}

void write_score_csv(const std::filesystem::path& path, const RawSeries& series,
                     const ScoreSeries& scores, const std::string& config_hash) {
  if (scores.point_scores.size() != series.length()) {
    throw ContractError("write_score_csv: scores do not cover the series");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.precision(17);
  out << "timestamp";
  for (std::size_t c = 0; c < series.feature_dim(); ++c) {
    out << ','
        << (series.feature_dim() == 1 ? std::string("value")
                                      : "value_" + (c < series.feature_names.size()
                                                        ? series.feature_names[c]
                                                        : std::to_string(c)));
  }
  out << ",point_score,flagged,config_hash\n";
  const auto flags = scores.flags();
  for (std::size_t r = 0; r < series.length(); ++r) {
    out << series.timestamp_text[r];
    for (std::size_t c = 0; c < series.feature_dim(); ++c) out << ',' << series.values(r, c);
    out << ',' << scores.point_scores[r] << ',' << flags[r] << ',' << config_hash << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ScoreCsv read_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  const auto header = split_csv_record(line);
  const auto find = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw DataError("'" + path.string() + "' has no '" + name + "' column");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t score_col = find("point_score");
  const std::size_t flag_col = find("flagged");
  ScoreCsv out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_record(line);
    if (fields.size() != header.size()) {
      throw DataError("'" + path.string() + "' line " + std::to_string(line_no) +
                      ": wrong field count");
    }
    try {
      out.timestamps.push_back(parse_timestamp(fields[0]));
      out.point_scores.push_back(std::stod(fields[score_col]));
      out.flagged.push_back(std::stoi(fields[flag_col]));
    } catch (const std::exception& ex) {
      throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + ": " +
                      ex.what());
    }
  }
  return out;
}

}  // namespace algan
