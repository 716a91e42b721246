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

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "algan/autograd.hpp"

namespace algan {

enum class InitScheme {
  kXavierUniform,  // weights ~ U(-b, b), b = sqrt(6 / (fan_in + fan_out))
  kZeros,
};

std::string_view to_string(InitScheme scheme);
InitScheme init_scheme_from_string(std::string_view name);

// Named, fixed-shape learnable weights. Every weight is drawn from its own
// random stream derived from (seed, name), so the set is reproducible
// independently of the order in which entries are added.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(std::uint64_t seed, InitScheme scheme) : seed_(seed), scheme_(scheme) {}

  // Weight matrix initialised with the set's scheme.
  Parameter& add_weight(const std::string& name, std::size_t rows, std::size_t cols);
  // Bias row (or any tensor) initialised to zeros.
  Parameter& add_zeros(const std::string& name, std::size_t rows, std::size_t cols);
  // Explicit initial value, used by tests and deserialisation.
  Parameter& add(const std::string& name, Matrix value);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.contains(name); }

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  std::uint64_t seed() const { return seed_; }
  InitScheme scheme() const { return scheme_; }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  // True when names, shapes and values match bit for bit.
  bool values_equal(const ParameterSet& other) const;

  nlohmann::json to_json() const;
  static ParameterSet from_json(const nlohmann::json& doc);

 private:
  std::uint64_t seed_ = 0;
  InitScheme scheme_ = InitScheme::kXavierUniform;
  std::map<std::string, Parameter> entries_;
};

// p <- p - learning_rate * grad(p) for every entry, then clears gradients.
// Throws DivergenceError naming the first parameter with a non-finite
// gradient; no parameter is modified in that case.
void sgd_step(ParameterSet& params, double learning_rate);

}  // namespace algan
