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

#include "algan/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "algan/errors.hpp"

namespace algan {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged initializer for Matrix");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape_string() +
                         " vs " + b.shape_string());
  }
}

namespace {

void prepare_out(Matrix& out, std::size_t rows, std::size_t cols, bool accumulate) {
  if (accumulate) {
    if (out.rows() != rows || out.cols() != cols) {
      throw DimensionError("accumulation target has shape " + out.shape_string() +
                           ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  } else {
    if (out.rows() != rows || out.cols() != cols) {
      out = Matrix(rows, cols);
    } else {
      out.fill(0.0);
    }
  }
}

// i-k-j order: the inner loop runs over contiguous output columns and the
// reduction over k happens in a fixed order for every element.
void gemm_rows(const double* a, std::size_t a_rows, std::size_t inner, const double* b,
               std::size_t b_cols, double* out) {
  for (std::size_t i = 0; i < a_rows; ++i) {
    double* out_row = out + i * b_cols;
    const double* a_row = a + i * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a_row[k];
      const double* b_row = b + k * b_cols;
      for (std::size_t j = 0; j < b_cols; ++j) out_row[j] += aik * b_row[j];
    }
  }
}

}  // namespace

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape_string() + " by " +
                         b.shape_string());
  }
  prepare_out(out, a.rows(), b.cols(), accumulate);
  gemm_rows(a.data().data(), a.rows(), a.cols(), b.data().data(), b.cols(),
            out.data().data());
}

void matmul_bt_into(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul: cannot multiply " + a.shape_string() + " by transpose of " +
                         b.shape_string());
  }
  prepare_out(out, a.rows(), b.rows(), accumulate);
  const Matrix bt = b.transposed();
  gemm_rows(a.data().data(), a.rows(), a.cols(), bt.data().data(), bt.cols(),
            out.data().data());
}

void matmul_at_into(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul: cannot multiply transpose of " + a.shape_string() + " by " +
                         b.shape_string());
  }
  prepare_out(out, a.cols(), b.cols(), accumulate);
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  const std::size_t p = b.cols();
  double* o = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const auto a_row = a.row(i);
    const auto b_row = b.row(i);
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = a_row[k];
      double* out_row = o + k * p;
      for (std::size_t j = 0; j < p; ++j) out_row[j] += aik * b_row[j];
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_into(a, b, out, false);
  return out;
}

}  // namespace algan
