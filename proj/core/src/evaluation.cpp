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

#include "algan/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "algan/errors.hpp"

namespace algan {

nlohmann::json EvalReport::to_json() const {
  return {{"accuracy", accuracy},
          {"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"cohen_kappa", cohen_kappa},
          {"auc", auc},
          {"threshold", threshold},
          {"counts", {{"tp", counts.tp}, {"fp", counts.fp}, {"tn", counts.tn}, {"fn", counts.fn}}}};
}

EvalReport EvalReport::from_json(const nlohmann::json& doc) {
  EvalReport r;
  r.accuracy = doc.at("accuracy").get<double>();
  r.precision = doc.at("precision").get<double>();
  r.recall = doc.at("recall").get<double>();
  r.f1 = doc.at("f1").get<double>();
  r.cohen_kappa = doc.at("cohen_kappa").get<double>();
  r.auc = doc.at("auc").get<double>();
  r.threshold = doc.at("threshold").get<double>();
  const auto& c = doc.at("counts");
  r.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
              c.at("tn").get<std::size_t>(), c.at("fn").get<std::size_t>()};
  return r;
}

ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold) {
  if (scores.size() != labels.size()) {
    throw ContractError("confusion: " + std::to_string(scores.size()) + " scores but " +
                        std::to_string(labels.size()) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

EvalReport metrics(const ConfusionCounts& c) {
  const double total = static_cast<double>(c.total());
  if (c.total() == 0) throw ContractError("metrics: no evaluated points");
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  EvalReport r;
  r.counts = c;
  r.accuracy = (tp + tn) / total;
  r.precision = c.tp + c.fp > 0 ? tp / (tp + fp) : 0.0;
  r.recall = c.tp + c.fn > 0 ? tp / (tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  const double p_e = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (total * total);
  r.cohen_kappa = p_e == 1.0 ? 0.0 : (r.accuracy - p_e) / (1.0 - p_e);
  return r;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("auc: " + std::to_string(scores.size()) + " scores but " +
                        std::to_string(labels.size()) + " labels");
  }
  std::size_t n_pos = 0;
  for (int l : labels) n_pos += l != 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ContractError("auc: needs at least one positive and one negative label");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j+1 share their average.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold) {
  EvalReport r = metrics(confusion(scores, labels, threshold));
  r.auc = auc(scores, labels);
  r.threshold = threshold;
  return r;
}

std::string report_csv_header() {
  return "run,accuracy,precision,recall,f1,cohen_kappa,auc,threshold,tp,fp,tn,fn,config_hash";
}

std::string report_csv_row(const EvalReport& r, const std::string& run_label,
                           const std::string& config_hash) {
  std::ostringstream out;
  out.precision(17);
  out << run_label << ',' << r.accuracy << ',' << r.precision << ',' << r.recall << ',' << r.f1
      << ',' << r.cohen_kappa << ',' << r.auc << ',' << r.threshold << ',' << r.counts.tp << ','
      << r.counts.fp << ',' << r.counts.tn << ',' << r.counts.fn << ',' << config_hash;
  return out.str();
}

void append_report_csv(const std::filesystem::path& path, const EvalReport& report,
                       const std::string& run_label, const std::string& config_hash) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  if (fresh) out << report_csv_header() << '\n';
  out << report_csv_row(report, run_label, config_hash) << '\n';
}

}  // namespace algan
