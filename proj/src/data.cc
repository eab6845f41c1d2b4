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

#include "bisecbio/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string_view>

namespace bisecbio {

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  if (spare_normal_.has_value()) {
    const double out = *spare_normal_;
    spare_normal_.reset();
    return out;
  }
  double u1 = Uniform();
  while (u1 == 0.0) u1 = Uniform();
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

uint64_t Rng::Index(uint64_t n) {
  if (n == 0) throw ParameterError("Rng::Index needs n >= 1");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return draw % n;
}

kernels::DenseMatrix DesignMatrix::ToDense() const {
  if (!is_sparse) return dense;
  kernels::DenseMatrix out(static_cast<int>(rows), cols);
  for (int64_t i = 0; i < rows; ++i) {
    for (const SparseEntry& e : sparse[i]) {
      out(static_cast<int>(i), e.index) = e.value;
    }
  }
  return out;
}

DesignMatrix DesignMatrix::FromDense(kernels::DenseMatrix a, Vector labels) {
  if (static_cast<int64_t>(labels.size()) != a.rows()) {
    throw DimensionError("labels length differs from row count");
  }
  DesignMatrix dm;
  dm.rows = a.rows();
  dm.cols = a.cols();
  dm.is_sparse = false;
  dm.dense = std::move(a);
  dm.labels = std::move(labels);
  return dm;
}

namespace {

bool ParseDouble(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool ParseInt(std::string_view token, int64_t& out) {
  if (token.empty()) return false;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSpace(line[i])) ++i;
    const size_t start = i;
    while (i < line.size() && !IsSpace(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

std::string FormatG17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

DesignMatrix ParseLibsvm(std::istream& in) {
  DesignMatrix dm;
  dm.is_sparse = true;
  std::string line;
  int64_t line_no = 0;
  int64_t max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = SplitWhitespace(line);
    if (tokens.empty()) continue;
    double label = 0.0;
    if (!ParseDouble(tokens[0], label)) {
      throw ParseError("bad label '" + std::string(tokens[0]) + "'", line_no);
    }
    SparseRow row;
    int64_t previous = 0;
    for (size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view token = tokens[t];
      const size_t colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected index:value, got '" + std::string(token) +
                             "'",
                         line_no);
      }
      int64_t index = 0;
      double value = 0.0;
      if (!ParseInt(token.substr(0, colon), index) || index < 1 ||
          index > INT32_MAX) {
        throw ParseError("bad feature index in '" + std::string(token) + "'",
                         line_no);
      }
      if (!ParseDouble(token.substr(colon + 1), value)) {
        throw ParseError("bad feature value in '" + std::string(token) + "'",
                         line_no);
      }
      if (index <= previous) {
        throw ParseError("feature indices must be strictly increasing",
                         line_no);
      }
      previous = index;
      max_index = std::max(max_index, index);
      row.push_back({static_cast<int>(index - 1), value});
    }
    dm.sparse.push_back(std::move(row));
    dm.labels.push_back(label);
  }
  dm.rows = static_cast<int64_t>(dm.sparse.size());
  dm.cols = static_cast<int>(max_index);
  return dm;
}

std::string SerializeLibsvm(const DesignMatrix& dm) {
  std::string out;
  for (int64_t i = 0; i < dm.rows; ++i) {
    out += FormatG17(dm.labels[i]);
    if (dm.is_sparse) {
      for (const SparseEntry& e : dm.sparse[i]) {
        out += ' ' + std::to_string(e.index + 1) + ':' + FormatG17(e.value);
      }
    } else {
      const auto row = dm.dense.Row(static_cast<int>(i));
      for (int j = 0; j < dm.cols; ++j) {
        if (row[j] == 0.0) continue;
        out += ' ' + std::to_string(j + 1) + ':' + FormatG17(row[j]);
      }
    }
    out += '\n';
  }
  return out;
}

DesignMatrix ParseCsvDense(std::istream& in, int label_col) {
  if (label_col < 0) throw ParameterError("label column must be >= 0");
  std::vector<double> values;
  Vector labels;
  std::string line;
  int64_t line_no = 0;
  int64_t width = -1;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<double> fields;
    std::string_view rest(line);
    bool header = false;
    while (true) {
      const size_t comma = rest.find(',');
      const std::string_view field = Trim(rest.substr(0, comma));
      double v = 0.0;
      if (!ParseDouble(field, v)) {
        // a non-numeric first row is a header
        if (width < 0 && !seen_header) {
          header = true;
          break;
        }
        throw ParseError("non-numeric field '" + std::string(field) + "'",
                         line_no);
      }
      fields.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (header) {
      seen_header = true;
      continue;
    }
    if (width < 0) {
      width = static_cast<int64_t>(fields.size());
      if (label_col >= width) {
        throw ParseError("label column " + std::to_string(label_col) +
                             " out of range",
                         line_no);
      }
    } else if (static_cast<int64_t>(fields.size()) != width) {
      throw ParseError("ragged row: expected " + std::to_string(width) +
                           " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    for (int64_t j = 0; j < width; ++j) {
      if (j == label_col) {
        labels.push_back(fields[j]);
      } else {
        values.push_back(fields[j]);
      }
    }
  }
  const int rows = static_cast<int>(labels.size());
  const int cols = width < 0 ? 0 : static_cast<int>(width - 1);
  return DesignMatrix::FromDense(
      kernels::DenseMatrix(rows, cols, std::move(values)), std::move(labels));
}

DesignMatrix LoadDesignMatrix(const std::string& path, int csv_label_col) {
  const bool csv =
      path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  if (path == "-") return ParseLibsvm(std::cin);
  std::ifstream file(path);
  if (!file) throw ParameterError("cannot open data file: " + path);
  return csv ? ParseCsvDense(file, csv_label_col) : ParseLibsvm(file);
}

DesignMatrix Preprocess(const DesignMatrix& dm, const PreprocessSpec& spec) {
  if (spec.colinear_copies < 0 || spec.colinear_copies > dm.cols) {
    throw ParameterError("colinear_copies must lie in [0, n]");
  }
  kernels::DenseMatrix a = dm.ToDense();
  Vector labels = dm.labels;

  if (spec.subsample.has_value()) {
    const SubsampleSpec& sub = *spec.subsample;
    if (sub.count < 0 || sub.count > dm.rows) {
      throw ParameterError("subsample count exceeds the number of rows");
    }
    std::vector<int64_t> order(dm.rows);
    for (int64_t i = 0; i < dm.rows; ++i) order[i] = i;
    Rng rng(sub.seed);
    for (int64_t i = 0; i < sub.count; ++i) {
      const int64_t j =
          i + static_cast<int64_t>(rng.Index(static_cast<uint64_t>(dm.rows - i)));
      std::swap(order[i], order[j]);
    }
    order.resize(sub.count);
    std::sort(order.begin(), order.end());
    kernels::DenseMatrix picked(static_cast<int>(sub.count), a.cols());
    Vector picked_labels(sub.count);
    for (int64_t r = 0; r < sub.count; ++r) {
      const auto src = a.Row(static_cast<int>(order[r]));
      std::copy(src.begin(), src.end(), picked.Row(static_cast<int>(r)).begin());
      picked_labels[r] = labels[order[r]];
    }
    a = std::move(picked);
    labels = std::move(picked_labels);
  }

  const int n = a.cols();
  const int m = a.rows();
  if (spec.minmax_scale) {
    for (int j = 0; j < n; ++j) {
      double lo = 0.0;
      double hi = 0.0;
      for (int i = 0; i < m; ++i) {
        const double v = a(i, j);
        if (!std::isfinite(v)) {
          throw ParameterError("min-max scaling needs finite columns");
        }
        lo = i == 0 ? v : std::min(lo, v);
        hi = i == 0 ? v : std::max(hi, v);
      }
      const double range = hi - lo;
      for (int i = 0; i < m; ++i) {
        a(i, j) = range > 0.0 ? (a(i, j) - lo) / range : 0.0;
      }
    }
  }

  const int extra = (spec.add_intercept ? 1 : 0) + spec.colinear_copies;
  if (extra > 0) {
    kernels::DenseMatrix wide(m, n + extra);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) wide(i, j) = a(i, j);
      int next = n;
      if (spec.add_intercept) wide(i, next++) = 1.0;
      for (int j = 0; j < spec.colinear_copies; ++j) wide(i, next++) = a(i, j);
    }
    a = std::move(wide);
  }
  return DesignMatrix::FromDense(std::move(a), std::move(labels));
}

double LipschitzLsq(const kernels::DenseMatrix& a) {
  const int n = a.cols();
  const int m = a.rows();
  if (n == 0 || m == 0) {
    LogWarning("LipschitzLsq: empty matrix, returning 0");
    return 0.0;
  }
  // A fixed, dense start vector avoids starting orthogonal to the top
  // eigenvector for structured matrices.
  Rng rng(0x5EED5EEDULL);
  Vector v(n);
  for (double& x : v) x = 1.0 + 0.1 * rng.Uniform();
  double norm = kernels::Norm2(v);
  for (double& x : v) x /= norm;

  Vector av(m);
  Vector w(n);
  double lambda = 0.0;
  constexpr int kMaxIters = 100000;
  // The per-step change understates the remaining error when the spectral
  // gap is small, so it is held well below the 1e-8 accuracy target.
  constexpr double kStepTolerance = 1e-12;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    kernels::MatVec(a, v, av);
    kernels::MatTVec(a, av, w);
    const double next = kernels::Dot(v, w);
    norm = kernels::Norm2(w);
    if (norm == 0.0) {
      LogWarning("LipschitzLsq: power iteration stagnated (zero matrix)");
      return 0.0;
    }
    for (int j = 0; j < n; ++j) v[j] = w[j] / norm;
    if (iter > 0 && std::abs(next - lambda) <= kStepTolerance * next) {
      return next;
    }
    lambda = next;
  }
  LogWarning("LipschitzLsq: power iteration hit its iteration cap");
  return lambda;
}

double LipschitzLsq(const DesignMatrix& dm) { return LipschitzLsq(dm.ToDense()); }

double LipschitzLogistic(const DesignMatrix& dm) {
  if (dm.rows == 0) throw ParameterError("logistic loss needs m >= 1");
  return LipschitzLsq(dm) / (4.0 * static_cast<double>(dm.rows));
}

SymmetricEigen JacobiEigen(const kernels::DenseMatrix& symmetric) {
  const int n = symmetric.rows();
  if (symmetric.cols() != n) throw DimensionError("JacobiEigen: not square");
  kernels::DenseMatrix a = symmetric;
  kernels::DenseMatrix v(n, n);
  for (int i = 0; i < n; ++i) v(i, i) = 1.0;

  double scale = 0.0;
  for (double x : a.data()) scale += x * x;
  scale = std::sqrt(scale);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= 1e-15 * scale || off == 0.0) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return a(x, x) < a(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = kernels::DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

namespace {

// G^+ r for symmetric positive semidefinite G.
Vector PseudoInverseApply(const kernels::DenseMatrix& g,
                          std::span<const double> r) {
  const SymmetricEigen eig = JacobiEigen(g);
  const int n = g.rows();
  const double top = eig.values.empty() ? 0.0 : eig.values.back();
  const double cutoff = 1e-10 * std::max(top, 0.0);
  Vector out(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double lambda = eig.values[j];
    if (!(lambda > cutoff)) continue;
    double coef = 0.0;
    for (int i = 0; i < n; ++i) coef += eig.vectors(i, j) * r[i];
    coef /= lambda;
    for (int i = 0; i < n; ++i) out[i] += coef * eig.vectors(i, j);
  }
  return out;
}

kernels::DenseMatrix OrthonormalColumns(int rows, int cols, Rng& rng) {
  kernels::DenseMatrix q(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) q(i, j) = rng.Normal();
  }
  // Modified Gram-Schmidt, twice for numerical orthogonality.
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < cols; ++j) {
      for (int k = 0; k < j; ++k) {
        double dot = 0.0;
        for (int i = 0; i < rows; ++i) dot += q(i, k) * q(i, j);
        for (int i = 0; i < rows; ++i) q(i, j) -= dot * q(i, k);
      }
      double norm = 0.0;
      for (int i = 0; i < rows; ++i) norm += q(i, j) * q(i, j);
      norm = std::sqrt(norm);
      if (norm == 0.0) throw InternalLogicError("degenerate random basis");
      for (int i = 0; i < rows; ++i) q(i, j) /= norm;
    }
  }
  return q;
}

}  // namespace

Vector LeastNormSolution(const kernels::DenseMatrix& a,
                         std::span<const double> b) {
  const int m = a.rows();
  const int n = a.cols();
  if (static_cast<int>(b.size()) != m) {
    throw DimensionError("LeastNormSolution: b has the wrong length");
  }
  Vector x(n);
  if (m <= n) {
    const kernels::DenseMatrix aat = kernels::Gram(a.Transposed());
    const Vector y = PseudoInverseApply(aat, b);
    kernels::MatTVec(a, y, x);
  } else {
    const kernels::DenseMatrix ata = kernels::Gram(a);
    Vector atb(n);
    kernels::MatTVec(a, b, atb);
    x = PseudoInverseApply(ata, atb);
  }
  return x;
}

SynthMnp SynthesizeMnp(int m, int n, int rank, uint64_t seed) {
  if (m < 1 || n < 1) throw ParameterError("m and n must be >= 1");
  if (rank < 1 || rank > std::min(m, n)) {
    throw ParameterError("rank must lie in [1, min(m, n)]");
  }
  if (rank >= n) {
    throw ParameterError(
        "rank must be < n so the lower level has many solutions");
  }
  Rng rng(seed);
  const kernels::DenseMatrix u = OrthonormalColumns(m, rank, rng);
  const kernels::DenseMatrix v = OrthonormalColumns(n, rank, rng);
  Vector s(rank);
  for (double& x : s) x = rng.Uniform(0.5, 1.0);

  kernels::DenseMatrix a(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < rank; ++k) acc += u(i, k) * s[k] * v(j, k);
      a(i, j) = acc;
    }
  }
  SynthMnp out;
  out.x_generator.resize(n);
  for (double& x : out.x_generator) x = rng.Normal();
  Vector b(m);
  kernels::MatVec(a, out.x_generator, b);
  out.x_least_norm = LeastNormSolution(a, b);
  out.p_star = 0.5 * kernels::SquaredNorm(out.x_least_norm);
  out.g_star = 0.0;
  out.design = DesignMatrix::FromDense(std::move(a), std::move(b));
  return out;
}

DesignMatrix SynthesizeClassification(int m, int base_cols, int duplicate_cols,
                                      double density, uint64_t seed) {
  if (m < 1 || base_cols < 1) throw ParameterError("m, base_cols must be >= 1");
  if (duplicate_cols < 0 || duplicate_cols > base_cols) {
    throw ParameterError("duplicate_cols must lie in [0, base_cols]");
  }
  if (!(density > 0.0 && density <= 1.0)) {
    throw ParameterError("density must lie in (0, 1]");
  }
  Rng rng(seed);
  Vector weights(base_cols);
  for (double& w : weights) w = rng.Normal();
  DesignMatrix dm;
  dm.is_sparse = true;
  dm.rows = m;
  dm.cols = base_cols + duplicate_cols;
  for (int i = 0; i < m; ++i) {
    SparseRow row;
    double score = 0.0;
    for (int j = 0; j < base_cols; ++j) {
      if (rng.Uniform() < density) {
        row.push_back({j, 1.0});
        score += weights[j];
      }
    }
    const size_t base_entries = row.size();
    for (size_t e = 0; e < base_entries; ++e) {
      if (row[e].index < duplicate_cols) {
        row.push_back({base_cols + row[e].index, 1.0});
      }
    }
    score += 0.5 * rng.Normal();
    dm.sparse.push_back(std::move(row));
    dm.labels.push_back(score >= 0.0 ? 1.0 : -1.0);
  }
  return dm;
}

}  // namespace bisecbio
