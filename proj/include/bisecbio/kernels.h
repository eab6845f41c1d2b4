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

// Dense linear-algebra kernels used by the data-fitting objectives.
//
// Every data-parallel kernel exists twice: `serial::` is the reference
// implementation and `parallel::` the OpenMP one. The parallel versions split
// work so that each output entry is accumulated by exactly one thread in the
// same order as the serial loop, which makes them bit-for-bit identical to
// the reference (traces stay reproducible across thread counts). Reductions
// to a scalar are never done with an OpenMP reduction clause: per-row terms
// are written to a buffer in parallel and summed serially.
//
// The unqualified entry points dispatch to the parallel kernel once the
// matrix is large enough for threading to pay off.

#ifndef BISECBIO_KERNELS_H_
#define BISECBIO_KERNELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "bisecbio/core.h"

namespace bisecbio::kernels {

// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols, double fill = 0.0);
  DenseMatrix(int rows, int cols, std::vector<double> row_major);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  std::span<const double> Row(int i) const {
    return {data_.data() + static_cast<size_t>(i) * cols_,
            static_cast<size_t>(cols_)};
  }
  std::span<double> Row(int i) {
    return {data_.data() + static_cast<size_t>(i) * cols_,
            static_cast<size_t>(cols_)};
  }
  const std::vector<double>& data() const { return data_; }

  DenseMatrix Transposed() const;
  void Scale(double factor);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Work (rows * cols) above which the dispatching entry points go parallel.
inline constexpr int64_t kParallelWorkThreshold = 1 << 15;

namespace serial {

// y = A x
void MatVec(const DenseMatrix& a, std::span<const double> x,
            std::span<double> y);
// y = A^T r
void MatTVec(const DenseMatrix& a, std::span<const double> r,
             std::span<double> y);
// G = A^T A
DenseMatrix Gram(const DenseMatrix& a);
// Per-row logistic terms for margins z_i = labels_i * (A x)_i:
//   loss_i   = log(1 + exp(-z_i))
//   weight_i = -labels_i * sigmoid(-z_i)   (d loss_i / d (A x)_i)
void LogisticTerms(std::span<const double> ax, std::span<const double> labels,
                   std::span<double> loss, std::span<double> weight);

}  // namespace serial

namespace parallel {

void MatVec(const DenseMatrix& a, std::span<const double> x,
            std::span<double> y);
void MatTVec(const DenseMatrix& a, std::span<const double> r,
             std::span<double> y);
DenseMatrix Gram(const DenseMatrix& a);
void LogisticTerms(std::span<const double> ax, std::span<const double> labels,
                   std::span<double> loss, std::span<double> weight);

}  // namespace parallel

void MatVec(const DenseMatrix& a, std::span<const double> x,
            std::span<double> y);
void MatTVec(const DenseMatrix& a, std::span<const double> r,
             std::span<double> y);
DenseMatrix Gram(const DenseMatrix& a);
void LogisticTerms(std::span<const double> ax, std::span<const double> labels,
                   std::span<double> loss, std::span<double> weight);

// Small vector helpers (always serial; the vectors here are short).
double Dot(std::span<const double> a, std::span<const double> b);
double Norm2(std::span<const double> a);
double SquaredNorm(std::span<const double> a);
double Norm1(std::span<const double> a);
double NormInf(std::span<const double> a);
// Serial left-to-right sum.
double Sum(std::span<const double> a);
// a - b
Vector Subtract(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
double Distance(std::span<const double> a, std::span<const double> b);

}  // namespace bisecbio::kernels

#endif  // BISECBIO_KERNELS_H_
