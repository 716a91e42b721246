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

#include "algan/parameters.hpp"

#include <cmath>

#include "algan/errors.hpp"
#include "algan/random.hpp"

namespace algan {

std::string_view to_string(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::kXavierUniform: return "xavier_uniform";
    case InitScheme::kZeros: return "zeros";
  }
  return "unknown";
}

InitScheme init_scheme_from_string(std::string_view name) {
  if (name == "xavier_uniform") return InitScheme::kXavierUniform;
  if (name == "zeros") return InitScheme::kZeros;
  throw ConfigError("unknown init scheme '" + std::string(name) + "'");
}

Parameter& ParameterSet::add(const std::string& name, Matrix value) {
  if (entries_.contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  if (!value.all_finite()) throw ContractError("parameter '" + name + "' has non-finite values");
  Parameter p{name, std::move(value), Matrix()};
  p.grad = Matrix(p.value.rows(), p.value.cols());
  return entries_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterSet::add_weight(const std::string& name, std::size_t rows, std::size_t cols) {
  Matrix value(rows, cols);
  if (scheme_ == InitScheme::kXavierUniform) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    auto rng = make_stream(seed_, fnv1a64(name));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : value.data()) v = dist(rng);
  }
  return add(name, std::move(value));
}

Parameter& ParameterSet::add_zeros(const std::string& name, std::size_t rows, std::size_t cols) {
  return add(name, Matrix(rows, cols));
}

Parameter& ParameterSet::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("no parameter named '" + name + "'");
  return it->second;
}

const Parameter& ParameterSet::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("no parameter named '" + name + "'");
  return it->second;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : entries_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, p] : entries_) p.grad = Matrix(p.value.rows(), p.value.cols());
}

bool ParameterSet::values_equal(const ParameterSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [name, p] : entries_) {
    auto it = other.entries_.find(name);
    if (it == other.entries_.end() || !(it->second.value == p.value)) return false;
  }
  return true;
}

nlohmann::json ParameterSet::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [name, p] : entries_) {
    entries.push_back({{"name", name},
                       {"rows", p.value.rows()},
                       {"cols", p.value.cols()},
                       {"values", p.value.storage()}});
  }
  return {{"seed", seed_}, {"scheme", std::string(to_string(scheme_))}, {"entries", entries}};
}

ParameterSet ParameterSet::from_json(const nlohmann::json& doc) {
  try {
    ParameterSet set(doc.at("seed").get<std::uint64_t>(),
                     init_scheme_from_string(doc.at("scheme").get<std::string>()));
    for (const auto& e : doc.at("entries")) {
      set.add(e.at("name").get<std::string>(),
              Matrix(e.at("rows").get<std::size_t>(), e.at("cols").get<std::size_t>(),
                     e.at("values").get<std::vector<double>>()));
    }
    return set;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed parameter document: ") + ex.what());
  }
}

void sgd_step(ParameterSet& params, double learning_rate) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ContractError("sgd_step: learning rate must be positive");
  }
  for (const auto& [name, p] : params) {
    if (!p.grad.same_shape(p.value)) {
      throw DimensionError("sgd_step: gradient of '" + name + "' has shape " +
                           p.grad.shape_string() + ", expected " + p.value.shape_string());
    }
    if (!p.grad.all_finite()) {
      throw DivergenceError("sgd_step: non-finite gradient in parameter '" + name + "'");
    }
  }
  for (auto& [name, p] : params) {
    auto v = p.value.data();
    const auto g = p.grad.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
  }
  params.zero_grad();
}

}  // namespace algan
