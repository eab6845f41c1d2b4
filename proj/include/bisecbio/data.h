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

// Dataset ingestion (LIBSVM, CSV), preprocessing, Lipschitz estimates and
// synthetic instances with known optimal values.
//
// Random numbers come from std::mt19937_64 (its output sequence is fixed by
// the C++ standard) mapped to doubles by hand, so every generated instance is
// identical across platforms and standard libraries:
//   uniform  = (next >> 11) * 2^-53
//   normal   = Box-Muller on two uniforms, cosine branch first
//   index    = rejection sampling on next() for an unbiased range

#ifndef BISECBIO_DATA_H_
#define BISECBIO_DATA_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bisecbio/core.h"
#include "bisecbio/kernels.h"

namespace bisecbio {

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  double Normal();
  // Uniform on {0, ..., n - 1}; n >= 1.
  uint64_t Index(uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

struct SparseEntry {
  int index = 0;  // 0-based column
  double value = 0.0;
  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};
using SparseRow = std::vector<SparseEntry>;

struct DesignMatrix {
  int64_t rows = 0;
  int cols = 0;
  bool is_sparse = false;
  std::vector<SparseRow> sparse;  // when is_sparse
  kernels::DenseMatrix dense;     // when !is_sparse
  Vector labels;

  kernels::DenseMatrix ToDense() const;
  static DesignMatrix FromDense(kernels::DenseMatrix a, Vector labels);
};

// "label idx:val idx:val ..." per line, 1-based strictly increasing indices.
// Blank lines are skipped. Throws ParseError with the 1-based line number.
DesignMatrix ParseLibsvm(std::istream& in);
// Canonical form: %.17g for labels and values, single spaces, '\n' endings.
std::string SerializeLibsvm(const DesignMatrix& dm);

// Rectangular numeric CSV without quoting; column label_col holds the label.
// A first row with a non-numeric field is taken as a header and skipped.
DesignMatrix ParseCsvDense(std::istream& in, int label_col);

// "-" reads standard input. Format picked from the extension: ".csv" is
// CSV (label in column 0), anything else LIBSVM.
DesignMatrix LoadDesignMatrix(const std::string& path, int csv_label_col = 0);

struct SubsampleSpec {
  int64_t count = 0;
  uint64_t seed = 0;
};

struct PreprocessSpec {
  bool minmax_scale = false;
  bool add_intercept = false;
  int colinear_copies = 0;
  std::optional<SubsampleSpec> subsample;
};

// Applied in this order: row subsample (uniform without replacement, rows
// kept in their original order), min-max scaling per column (constant
// columns become 0), all-ones intercept column, copies of the first
// colinear_copies original columns. Output is dense.
DesignMatrix Preprocess(const DesignMatrix& dm, const PreprocessSpec& spec);

// Largest eigenvalue of A^T A by power iteration (relative tolerance 1e-8).
// Returns 0 with a warning for a zero matrix.
double LipschitzLsq(const kernels::DenseMatrix& a);
double LipschitzLsq(const DesignMatrix& dm);
// LipschitzLsq / (4 m) for the averaged logistic loss.
double LipschitzLogistic(const DesignMatrix& dm);

struct SymmetricEigen {
  Vector values;                // ascending
  kernels::DenseMatrix vectors;  // column j pairs with values[j]
};
// Cyclic Jacobi rotations.
SymmetricEigen JacobiEigen(const kernels::DenseMatrix& symmetric);

// Least-norm solution of min |Ax - b| through a pseudo-inverse of the
// smaller Gram matrix (AA^T when m <= n, else A^T A), dropping eigenvalues
// below 1e-10 * lambda_max.
Vector LeastNormSolution(const kernels::DenseMatrix& a,
                         std::span<const double> b);

struct SynthMnp {
  DesignMatrix design;  // A and labels b = A x_generator
  Vector x_generator;
  Vector x_least_norm;
  double p_star = 0.0;  // |A^+ b|^2 / 2
  double g_star = 0.0;
};

// A = U diag(s) V^T with orthonormal U (m x rank), V (n x rank), s uniform
// in [0.5, 1]; x_generator ~ N(0, I). Requires 1 <= rank <= min(m, n) and
// rank < n.
SynthMnp SynthesizeMnp(int m, int n, int rank, uint64_t seed);

// Sparse binary features in the style of a1a: base_cols columns set with
// probability density, followed by duplicate_cols copies of the first
// columns; labels are the sign of a noisy linear score.
DesignMatrix SynthesizeClassification(int m, int base_cols, int duplicate_cols,
                                      double density, uint64_t seed);

}  // namespace bisecbio

#endif  // BISECBIO_DATA_H_
