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

// Frozen affine generator G(z) = z A + b (row-wise), used to check latent
// inversion against closed-form gradients.

#include <cmath>
#include <vector>

#include "algan/scoring.hpp"
#include "test_support.hpp"

namespace algan::test {

class AffineTarget final : public InversionTarget {
 public:
  AffineTarget(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {}

  std::size_t latent_dim() const override { return a_.rows(); }
  Var generate(Graph& graph, Var z, std::size_t) const override {
    return add_row(matmul(z, graph.constant(a_)), graph.constant(b_));
  }
  Var features(Graph&, Var x, std::size_t) const override { return x; }

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }

 private:
  Matrix a_;
  Matrix b_;
};

struct AffineCase {
  Matrix a, b, x, z0;
};

// x sits at least `margin` away from G(z) in every entry along the whole
// descent, so the L1 objective is linear on the path and every step must
// lower it by step * |grad|^2.
inline AffineCase affine_case(Rng& rng, std::size_t steps, std::size_t latent,
                              std::size_t features) {
  AffineCase c;
  c.a = uniform_matrix(rng, latent, features, -0.3, 0.3);
  c.b = random_matrix(rng, 1, features);
  const Matrix z_true = random_matrix(rng, steps, latent);
  c.z0 = z_true;
  std::normal_distribution<double> jitter(0.0, 0.3);
  for (double& v : c.z0.data()) v += jitter(rng);
  c.x = matmul(z_true, c.a);
  std::uniform_real_distribution<double> off(2.0, 3.0);
  std::bernoulli_distribution sign(0.5);
  for (std::size_t r = 0; r < c.x.rows(); ++r) {
    for (std::size_t col = 0; col < features; ++col) {
      c.x(r, col) += c.b(0, col) + (sign(rng) ? off(rng) : -off(rng));
    }
  }
  return c;
}

// Closed-form replay of the descent for gamma = 0: grad_z = -sign(r) A^T,
// clipped to `clip` in L2 over the window.
inline std::vector<double> affine_trajectory(const AffineCase& c, std::size_t lambda,
                                             double step, double clip) {
  Matrix z = c.z0;
  std::vector<double> losses;
  for (std::size_t it = 0; it < lambda; ++it) {
    Matrix sgn(c.x.rows(), c.x.cols());
    double loss = 0.0;
    for (std::size_t r = 0; r < c.x.rows(); ++r) {
      for (std::size_t col = 0; col < c.x.cols(); ++col) {
        double g = c.b(0, col);
        for (std::size_t k = 0; k < c.a.rows(); ++k) g += z(r, k) * c.a(k, col);
        const double res = c.x(r, col) - g;
        loss += std::abs(res);
        sgn(r, col) = res > 0 ? 1.0 : (res < 0 ? -1.0 : 0.0);
      }
    }
    losses.push_back(loss);
    Matrix grad(z.rows(), z.cols());
    double norm_sq = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) {
      for (std::size_t k = 0; k < z.cols(); ++k) {
        double acc = 0.0;
        for (std::size_t col = 0; col < c.x.cols(); ++col) acc -= sgn(r, col) * c.a(k, col);
        grad(r, k) = acc;
        norm_sq += acc * acc;
      }
    }
    const double norm = std::sqrt(norm_sq);
    const double factor = norm > clip ? clip / norm : 1.0;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= step * factor * grad[i];
  }
  return losses;
}

}  // namespace algan::test
