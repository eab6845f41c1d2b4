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
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "bisecbio/kernels.h"

namespace bisecbio {
namespace {

Eigen::MatrixXd ToEigen(const kernels::DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  }
  return m;
}

kernels::DenseMatrix RandomMatrix(int m, int n, Rng& rng) {
  kernels::DenseMatrix a(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = rng.Normal();
  }
  return a;
}

DesignMatrix Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseLibsvm(in);
}

int ParseErrorLine(const std::string& text) {
  try {
    Parse(text);
  } catch (const ParseError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

TEST(RngTest, UniformUsesTheTop53Bits) {
  Rng rng(42);
  std::mt19937_64 engine(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(rng.Uniform(), static_cast<double>(engine() >> 11) / 9007199254740992.0);
  }
}

TEST(RngTest, NormalMomentsAndDeterminism) {
  Rng a(7), b(7);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = a.Normal();
    EXPECT_EQ(x, b.Normal());
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(RngTest, IndexIsInRangeAndCoversAll) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const uint64_t k = rng.Index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_THROW(rng.Index(0), ParameterError);
}

TEST(LibsvmTest, ParsesRowsLabelsAndBlankLines) {
  const DesignMatrix dm = Parse("+1 1:0.5 3:2\n\n-1 2:-1.5\n1\n");
  EXPECT_TRUE(dm.is_sparse);
  EXPECT_EQ(dm.rows, 3);
  EXPECT_EQ(dm.cols, 3);
  EXPECT_EQ(dm.labels, (Vector{1.0, -1.0, 1.0}));
  EXPECT_EQ(dm.sparse[0], (SparseRow{{0, 0.5}, {2, 2.0}}));
  EXPECT_TRUE(dm.sparse[2].empty());
  const kernels::DenseMatrix a = dm.ToDense();
  EXPECT_EQ(a(1, 1), -1.5);
  EXPECT_EQ(a(2, 2), 0.0);
}

TEST(LibsvmTest, ErrorsCarryLineNumbers) {
  EXPECT_EQ(ParseErrorLine("1 1:1\nx 1:1\n"), 2);
  EXPECT_EQ(ParseErrorLine("1 1:1\n\n1 3:1 2:1\n"), 3);
  EXPECT_EQ(ParseErrorLine("1 0:1\n"), 1);
  EXPECT_EQ(ParseErrorLine("1 1:abc\n"), 1);
  EXPECT_EQ(ParseErrorLine("1 1-2\n"), 1);
  EXPECT_EQ(ParseErrorLine("1 2:1 2:3\n"), 1);
}

TEST(LibsvmTest, SerializeRoundTrips) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    std::string text;
    const int rows = 1 + static_cast<int>(rng.Index(6));
    for (int i = 0; i < rows; ++i) {
      text += rng.Uniform() < 0.5 ? "-1" : "+1";
      int col = 0;
      while (true) {
        col += 1 + static_cast<int>(rng.Index(4));
        if (col > 12) break;
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %d:%.17g", col, rng.Normal());
        text += buf;
      }
      text += '\n';
    }
    const DesignMatrix first = Parse(text);
    const std::string canonical = SerializeLibsvm(first);
    const DesignMatrix second = Parse(canonical);
    EXPECT_EQ(second.labels, first.labels);
    EXPECT_EQ(second.sparse, first.sparse);
    EXPECT_EQ(SerializeLibsvm(second), canonical);
  }
}

TEST(CsvTest, HeaderLabelColumnAndRaggedRows) {
  std::istringstream in("y,a,b\n1,2,3\n4,5,6\n");
  const DesignMatrix dm = ParseCsvDense(in, 0);
  EXPECT_EQ(dm.rows, 2);
  EXPECT_EQ(dm.cols, 2);
  EXPECT_EQ(dm.labels, (Vector{1.0, 4.0}));
  EXPECT_EQ(dm.dense(1, 1), 6.0);

  std::istringstream last("1,2,3\n4,5,6\n");
  EXPECT_EQ(ParseCsvDense(last, 2).labels, (Vector{3.0, 6.0}));

  std::istringstream ragged("1,2,3\n4,5\n");
  EXPECT_THROW(ParseCsvDense(ragged, 0), ParseError);
  std::istringstream junk("1,2\n3,x\n");
  EXPECT_THROW(ParseCsvDense(junk, 0), ParseError);
  std::istringstream out_of_range("1,2\n");
  EXPECT_THROW(ParseCsvDense(out_of_range, 5), ParseError);
}

TEST(LoadTest, MissingFileThrows) {
  EXPECT_THROW(LoadDesignMatrix("/nonexistent/file.libsvm"), ParameterError);
}

TEST(PreprocessTest, ScalingInterceptAndCopies) {
  const DesignMatrix dm = DesignMatrix::FromDense(
      kernels::DenseMatrix(3, 3, Vector{1, 10, 5, 3, 20, 5, 2, 30, 5}),
      Vector{1, -1, 1});
  PreprocessSpec spec;
  spec.minmax_scale = true;
  spec.add_intercept = true;
  spec.colinear_copies = 2;
  const DesignMatrix out = Preprocess(dm, spec);
  ASSERT_EQ(out.cols, 6);
  const kernels::DenseMatrix& a = out.dense;
  // Row 1 (3, 20, 5) -> (1, 0.5, 0) then intercept, then copies of columns 0, 1.
  const Vector row1(a.Row(1).begin(), a.Row(1).end());
  EXPECT_EQ(row1, (Vector{1.0, 0.5, 0.0, 1.0, 1.0, 0.5}));
  EXPECT_EQ(out.labels, dm.labels);
  spec.colinear_copies = 4;
  EXPECT_THROW(Preprocess(dm, spec), ParameterError);
}

TEST(PreprocessTest, SubsampleKeepsOrderAndIsSeeded) {
  kernels::DenseMatrix a(50, 1);
  Vector labels(50);
  for (int i = 0; i < 50; ++i) {
    a(i, 0) = i;
    labels[i] = i;
  }
  const DesignMatrix dm = DesignMatrix::FromDense(a, labels);
  PreprocessSpec spec;
  spec.subsample = SubsampleSpec{10, 99};
  const DesignMatrix s1 = Preprocess(dm, spec);
  const DesignMatrix s2 = Preprocess(dm, spec);
  ASSERT_EQ(s1.rows, 10);
  EXPECT_EQ(s1.labels, s2.labels);
  EXPECT_TRUE(std::is_sorted(s1.labels.begin(), s1.labels.end()));
  EXPECT_EQ(std::set<double>(s1.labels.begin(), s1.labels.end()).size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(s1.dense(i, 0), s1.labels[i]);
  spec.subsample = SubsampleSpec{10, 100};
  EXPECT_NE(Preprocess(dm, spec).labels, s1.labels);
  spec.subsample = SubsampleSpec{51, 0};
  EXPECT_THROW(Preprocess(dm, spec), ParameterError);
}

TEST(LinearAlgebraTest, LipschitzMatchesEigen) {
  Rng rng(12);
  for (auto [m, n] : std::vector<std::pair<int, int>>{{5, 3}, {20, 50}, {60, 8}}) {
    const kernels::DenseMatrix a = RandomMatrix(m, n, rng);
    const Eigen::MatrixXd e = ToEigen(a);
    const double ref =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e.transpose() * e)
            .eigenvalues()
            .maxCoeff();
    EXPECT_NEAR(LipschitzLsq(a), ref, 1e-6 * ref);
  }
  const DesignMatrix dm =
      DesignMatrix::FromDense(RandomMatrix(40, 6, rng), Vector(40, 1.0));
  EXPECT_NEAR(LipschitzLogistic(dm), LipschitzLsq(dm) / 160.0, 1e-15);
}

TEST(LinearAlgebraTest, JacobiMatchesEigen) {
  Rng rng(13);
  for (int n : {1, 2, 5, 12}) {
    const kernels::DenseMatrix b = RandomMatrix(n + 3, n, rng);
    const kernels::DenseMatrix s = kernels::Gram(b);
    const SymmetricEigen mine = JacobiEigen(s);
    const Eigen::VectorXd ref =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ToEigen(s)).eigenvalues();
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(mine.values[i], ref(i), 1e-10 * (1 + std::abs(ref(i))));
    }
    // S v = lambda v for every pair.
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        double sv = 0.0;
        for (int k = 0; k < n; ++k) sv += s(i, k) * mine.vectors(k, j);
        EXPECT_NEAR(sv, mine.values[j] * mine.vectors(i, j), 1e-9 * (1 + ref(n - 1)));
      }
    }
  }
}

TEST(LinearAlgebraTest, LeastNormMatchesPseudoinverse) {
  Rng rng(14);
  for (auto [m, n, r] : std::vector<std::tuple<int, int, int>>{
           {4, 7, 4}, {9, 5, 5}, {10, 10, 3}, {20, 50, 10}}) {
    // Rank-r product of Gaussian factors.
    const Eigen::MatrixXd e =
        ToEigen(RandomMatrix(m, r, rng)) * ToEigen(RandomMatrix(r, n, rng));
    kernels::DenseMatrix a(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = e(i, j);
    }
    Vector b(m);
    for (double& v : b) v = rng.Normal();
    const Vector x = LeastNormSolution(a, b);
    const Eigen::VectorXd ref =
        e.completeOrthogonalDecomposition().solve(
            Eigen::Map<const Eigen::VectorXd>(b.data(), m));
    for (int j = 0; j < n; ++j) EXPECT_NEAR(x[j], ref(j), 1e-7 * (1 + ref.norm()));
  }
}

TEST(SynthTest, MnpStructure) {
  const SynthMnp s = SynthesizeMnp(20, 50, 10, 1);
  EXPECT_EQ(s.design.rows, 20);
  EXPECT_EQ(s.design.cols, 50);
  const Eigen::MatrixXd e = ToEigen(s.design.dense);
  const Eigen::VectorXd sv = e.jacobiSvd().singularValues();
  for (int i = 0; i < 10; ++i) {
    EXPECT_GE(sv(i), 0.5 - 1e-12);
    EXPECT_LE(sv(i), 1.0 + 1e-12);
  }
  for (int i = 10; i < 20; ++i) EXPECT_LT(sv(i), 1e-12);
  const Eigen::VectorXd x_gen =
      Eigen::Map<const Eigen::VectorXd>(s.x_generator.data(), 50);
  const Eigen::VectorXd b = e * x_gen;
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(s.design.labels[i], b(i), 1e-12);
  const Eigen::VectorXd pinv = e.completeOrthogonalDecomposition().solve(b);
  EXPECT_NEAR(s.p_star, 0.5 * pinv.squaredNorm(), 1e-9);
  EXPECT_NEAR(s.g_star, 0.0, 1e-20);
  // Same seed, same instance.
  EXPECT_EQ(SynthesizeMnp(20, 50, 10, 1).design.dense.data(),
            s.design.dense.data());
  EXPECT_THROW(SynthesizeMnp(5, 5, 5, 0), ParameterError);
}

TEST(SynthTest, ClassificationStructure) {
  const DesignMatrix dm = SynthesizeClassification(100, 20, 5, 0.2, 3);
  EXPECT_EQ(dm.rows, 100);
  EXPECT_EQ(dm.cols, 25);
  const kernels::DenseMatrix a = dm.ToDense();
  for (int i = 0; i < 100; ++i) {
    EXPECT_TRUE(dm.labels[i] == 1.0 || dm.labels[i] == -1.0);
    for (int j = 0; j < 5; ++j) EXPECT_EQ(a(i, 20 + j), a(i, j));
    for (int j = 0; j < 25; ++j) EXPECT_TRUE(a(i, j) == 0.0 || a(i, j) == 1.0);
  }
}

}  // namespace
}  // namespace bisecbio
