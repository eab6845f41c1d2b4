// Copyright 2026 The Bisec-BiO Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bisecbio/kernels.h"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bisecbio::kernels {

DenseMatrix::DenseMatrix(int rows, int cols, double fill)
    : rows_(rows),
      cols_(cols),
      data_(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill) {
  if (rows < 0 || cols < 0) throw ParameterError("negative matrix shape");
}

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows < 0 || cols < 0) throw ParameterError("negative matrix shape");
  if (data_.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
    throw DimensionError("matrix data size does not match shape");
  }
}

DenseMatrix DenseMatrix::Transposed() const {
  DenseMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

void DenseMatrix::Scale(double factor) {
  for (double& v : data_) v *= factor;
}

namespace {

void CheckMatVec(const DenseMatrix& a, std::span<const double> x,
                 std::span<double> y) {
  if (static_cast<int64_t>(x.size()) != a.cols() ||
      static_cast<int64_t>(y.size()) != a.rows()) {
    throw DimensionError("MatVec: shape mismatch");
  }
}

void CheckMatTVec(const DenseMatrix& a, std::span<const double> r,
                  std::span<double> y) {
  if (static_cast<int64_t>(r.size()) != a.rows() ||
      static_cast<int64_t>(y.size()) != a.cols()) {
    throw DimensionError("MatTVec: shape mismatch");
  }
}

void CheckLogistic(std::span<const double> ax, std::span<const double> labels,
                   std::span<double> loss, std::span<double> weight) {
  if (labels.size() != ax.size() || loss.size() != ax.size() ||
      weight.size() != ax.size()) {
    throw DimensionError("LogisticTerms: length mismatch");
  }
}

double RowDot(std::span<const double> row, std::span<const double> x) {
  double acc = 0.0;
  for (size_t j = 0; j < row.size(); ++j) acc += row[j] * x[j];
  return acc;
}

// log(1 + exp(t)) without overflow.
double Softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double Sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void LogisticTerm(double ax, double label, double& loss, double& weight) {
  const double t = -label * ax;
  loss = Softplus(t);
  weight = -label * Sigmoid(t);
}

bool WorthThreading(const DenseMatrix& a) {
  return static_cast<int64_t>(a.rows()) * a.cols() >= kParallelWorkThreshold;
}

}  // namespace

namespace serial {

void MatVec(const DenseMatrix& a, std::span<const double> x,
            std::span<double> y) {
  CheckMatVec(a, x, y);
  for (int i = 0; i < a.rows(); ++i) y[i] = RowDot(a.Row(i), x);
}

void MatTVec(const DenseMatrix& a, std::span<const double> r,
             std::span<double> y) {
  CheckMatTVec(a, r, y);
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const auto row = a.Row(i);
    const double ri = r[i];
    for (int j = 0; j < a.cols(); ++j) y[j] += ri * row[j];
  }
}

DenseMatrix Gram(const DenseMatrix& a) {
  const int n = a.cols();
  DenseMatrix g(n, n);
  for (int i = 0; i < a.rows(); ++i) {
    const auto row = a.Row(i);
    for (int p = 0; p < n; ++p) {
      const double rp = row[p];
      for (int q = 0; q < n; ++q) g(p, q) += rp * row[q];
    }
  }
  return g;
}

void LogisticTerms(std::span<const double> ax, std::span<const double> labels,
                   std::span<double> loss, std::span<double> weight) {
  CheckLogistic(ax, labels, loss, weight);
  for (size_t i = 0; i < ax.size(); ++i) {
    LogisticTerm(ax[i], labels[i], loss[i], weight[i]);
  }
}

}  // namespace serial

namespace parallel {

void MatVec(const DenseMatrix& a, std::span<const double> x,
            std::span<double> y) {
  CheckMatVec(a, x, y);
  const int rows = a.rows();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) y[i] = RowDot(a.Row(i), x);
}

// Columns are partitioned across threads; each thread walks the rows in
// order, so y_j sees the same summation order as the serial kernel.
void MatTVec(const DenseMatrix& a, std::span<const double> r,
             std::span<double> y) {
  CheckMatTVec(a, r, y);
  const int rows = a.rows();
  const int cols = a.cols();
#pragma omp parallel
  {
#ifdef _OPENMP
    const int nthreads = omp_get_num_threads();
    const int tid = omp_get_thread_num();
#else
    const int nthreads = 1;
    const int tid = 0;
#endif
    const int chunk = (cols + nthreads - 1) / nthreads;
    const int begin = std::min(cols, tid * chunk);
    const int end = std::min(cols, begin + chunk);
    for (int j = begin; j < end; ++j) y[j] = 0.0;
    for (int i = 0; i < rows; ++i) {
      const auto row = a.Row(i);
      const double ri = r[i];
      for (int j = begin; j < end; ++j) y[j] += ri * row[j];
    }
  }
}

DenseMatrix Gram(const DenseMatrix& a) {
  const int n = a.cols();
  const int rows = a.rows();
  DenseMatrix g(n, n);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) {
    for (int i = 0; i < rows; ++i) {
      const auto row = a.Row(i);
      const double rp = row[p];
      for (int q = 0; q < n; ++q) g(p, q) += rp * row[q];
    }
  }
  return g;
}

void LogisticTerms(std::span<const double> ax, std::span<const double> labels,
                   std::span<double> loss, std::span<double> weight) {
  CheckLogistic(ax, labels, loss, weight);
  const int64_t m = static_cast<int64_t>(ax.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m; ++i) {
    LogisticTerm(ax[i], labels[i], loss[i], weight[i]);
  }
}

}  // namespace parallel

void MatVec(const DenseMatrix& a, std::span<const double> x,
            std::span<double> y) {
  if (WorthThreading(a)) {
    parallel::MatVec(a, x, y);
  } else {
    serial::MatVec(a, x, y);
  }
}

void MatTVec(const DenseMatrix& a, std::span<const double> r,
             std::span<double> y) {
  if (WorthThreading(a)) {
    parallel::MatTVec(a, r, y);
  } else {
    serial::MatTVec(a, r, y);
  }
}

DenseMatrix Gram(const DenseMatrix& a) {
  return WorthThreading(a) ? parallel::Gram(a) : serial::Gram(a);
}

void LogisticTerms(std::span<const double> ax, std::span<const double> labels,
                   std::span<double> loss, std::span<double> weight) {
  if (static_cast<int64_t>(ax.size()) >= kParallelWorkThreshold / 8) {
    parallel::LogisticTerms(ax, labels, loss, weight);
  } else {
    serial::LogisticTerms(ax, labels, loss, weight);
  }
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("Dot: length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double SquaredNorm(std::span<const double> a) { return Dot(a, a); }

double Norm2(std::span<const double> a) { return std::sqrt(SquaredNorm(a)); }

double Norm1(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += std::abs(v);
  return acc;
}

double NormInf(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc = std::max(acc, std::abs(v));
  return acc;
}

double Sum(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

Vector Subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("Subtract: length mismatch");
  Vector out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("Axpy: length mismatch");
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double Distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("Distance: length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace bisecbio::kernels
