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

#include "bisecbio/problems.h"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace bisecbio {

SmoothPart LeastSquaresPart(std::shared_ptr<const kernels::DenseMatrix> a,
                            Vector b) {
  if (static_cast<int>(b.size()) != a->rows()) {
    throw DimensionError("least squares: b length differs from rows of A");
  }
  auto shared_b = std::make_shared<const Vector>(std::move(b));
  SmoothPart part;
  part.value = [a, shared_b](std::span<const double> x) {
    Vector r(a->rows());
    kernels::MatVec(*a, x, r);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= (*shared_b)[i];
    return 0.5 * kernels::SquaredNorm(r);
  };
  part.gradient = [a, shared_b](std::span<const double> x) {
    Vector r(a->rows());
    kernels::MatVec(*a, x, r);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= (*shared_b)[i];
    Vector g(a->cols());
    kernels::MatTVec(*a, r, g);
    return g;
  };
  return part;
}

SmoothPart LogisticPart(std::shared_ptr<const kernels::DenseMatrix> a,
                        Vector labels) {
  if (static_cast<int>(labels.size()) != a->rows()) {
    throw DimensionError("logistic: labels length differs from rows of A");
  }
  if (a->rows() == 0) throw ParameterError("logistic loss needs m >= 1");
  auto shared = std::make_shared<const Vector>(std::move(labels));
  const double inv_m = 1.0 / static_cast<double>(a->rows());
  SmoothPart part;
  part.value = [a, shared, inv_m](std::span<const double> x) {
    const int m = a->rows();
    Vector ax(m), loss(m), weight(m);
    kernels::MatVec(*a, x, ax);
    kernels::LogisticTerms(ax, *shared, loss, weight);
    return inv_m * kernels::Sum(loss);
  };
  part.gradient = [a, shared, inv_m](std::span<const double> x) {
    const int m = a->rows();
    Vector ax(m), loss(m), weight(m);
    kernels::MatVec(*a, x, ax);
    kernels::LogisticTerms(ax, *shared, loss, weight);
    for (double& w : weight) w *= inv_m;
    Vector g(a->cols());
    kernels::MatTVec(*a, weight, g);
    return g;
  };
  return part;
}

SmoothPart ScaledSquaredNormPart(double weight) {
  SmoothPart part;
  part.value = [weight](std::span<const double> x) {
    return 0.5 * weight * kernels::SquaredNorm(x);
  };
  part.gradient = [weight](std::span<const double> x) {
    Vector g(x.begin(), x.end());
    for (double& v : g) v *= weight;
    return g;
  };
  return part;
}

SmoothPart ZeroSmoothPart() {
  SmoothPart part;
  part.value = [](std::span<const double>) { return 0.0; };
  part.gradient = [](std::span<const double> x) {
    return Vector(x.size(), 0.0);
  };
  return part;
}

BilevelProblem MakeProblem(const ProblemSpec& spec,
                           const kernels::DenseMatrix& a,
                           const Vector& labels) {
  if (a.cols() < 1) throw ParameterError("design matrix has no columns");
  const int n = a.cols();
  auto shared_a = std::make_shared<const kernels::DenseMatrix>(a);

  BilevelProblem problem;
  problem.dimension = n;
  problem.upper.dimension = n;
  problem.lower.dimension = n;

  switch (spec.kind) {
    case LevelSetKind::kMnpFree:
    case LevelSetKind::kMnpNonneg:
    case LevelSetKind::kMnpL1Ball:
      problem.lower.smooth = LeastSquaresPart(shared_a, labels);
      problem.lower.lipschitz = LipschitzLsq(a);
      break;
    case LevelSetKind::kLrpL1Ball: {
      problem.lower.smooth = LogisticPart(shared_a, labels);
      problem.lower.lipschitz =
          LipschitzLsq(a) / (4.0 * static_cast<double>(a.rows()));
      break;
    }
    case LevelSetKind::kSspElasticNet:
      problem.lower.smooth = LeastSquaresPart(shared_a, labels);
      problem.lower.lipschitz = LipschitzLsq(a);
      break;
    case LevelSetKind::kToy:
      throw ParameterError("the toy problem has no data; use MakeToyProblem");
  }

  switch (spec.kind) {
    case LevelSetKind::kMnpNonneg:
      problem.lower.nonsmooth = NonnegIndicatorPart();
      break;
    case LevelSetKind::kMnpL1Ball:
    case LevelSetKind::kLrpL1Ball:
      problem.lower.nonsmooth = L1BallIndicatorPart(spec.params.lambda);
      break;
    default:
      problem.lower.nonsmooth = ZeroNonsmoothPart();
  }

  if (spec.kind == LevelSetKind::kSspElasticNet) {
    if (!(spec.params.alpha > 0.0)) {
      throw ParameterError("elastic-net alpha must be > 0");
    }
    problem.upper.smooth = ScaledSquaredNormPart(spec.params.alpha);
    problem.upper.lipschitz = spec.params.alpha;
    problem.upper.nonsmooth = L1NormPart(1.0);
  } else {
    problem.upper.smooth = ScaledSquaredNormPart(1.0);
    problem.upper.lipschitz = 1.0;
    problem.upper.nonsmooth = ZeroNonsmoothPart();
  }

  const LevelSetKind kind = spec.kind;
  const LevelSetParams params = spec.params;
  problem.level_set_prox = [kind, params](double c) {
    return MakeLevelSetProx(kind, params, c);
  };
  return problem;
}

BilevelProblem MakeProblem(const ProblemSpec& spec, const DesignMatrix& dm) {
  return MakeProblem(spec, dm.ToDense(), dm.labels);
}

BilevelProblem MakeToyProblem() {
  BilevelProblem problem;
  problem.dimension = 2;
  problem.upper.dimension = 2;
  problem.upper.smooth = ZeroSmoothPart();
  problem.upper.lipschitz = 1.0;
  problem.upper.nonsmooth = L1NormPart(1.0);

  problem.lower.dimension = 2;
  problem.lower.smooth.value = [](std::span<const double> x) {
    const double d = x[0] - 1.0;
    return d * d;
  };
  problem.lower.smooth.gradient = [](std::span<const double> x) {
    return Vector{2.0 * (x[0] - 1.0), 0.0};
  };
  problem.lower.lipschitz = 2.0;
  problem.lower.nonsmooth = ZeroNonsmoothPart();

  problem.level_set_prox = [](double c) {
    return MakeLevelSetProx(LevelSetKind::kToy, LevelSetParams{}, c);
  };
  return problem;
}

CustomProblem LoadCustomProblem(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParameterError("cannot open problem file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(file);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("problem file " + path + ": " + e.what());
  }
  CustomProblem out;
  try {
    out.spec.kind = ParseLevelSetKind(doc.at("kind").get<std::string>());
    if (out.spec.kind == LevelSetKind::kToy) {
      throw ParameterError("custom problems must be data-driven");
    }
    out.spec.params.lambda = doc.value("lambda", out.spec.params.lambda);
    out.spec.params.alpha = doc.value("alpha", out.spec.params.alpha);
    const auto rows = doc.at("A").get<std::vector<std::vector<double>>>();
    out.b = doc.at("b").get<Vector>();
    if (rows.empty()) throw ParameterError("custom problem: A has no rows");
    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(rows.front().size());
    std::vector<double> flat;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != n) {
        throw DimensionError("custom problem: A is ragged");
      }
      flat.insert(flat.end(), row.begin(), row.end());
    }
    out.a = kernels::DenseMatrix(m, n, std::move(flat));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("problem file " + path + ": " + e.what());
  }
  if (static_cast<int>(out.b.size()) != out.a.rows()) {
    throw DimensionError("custom problem: b length differs from rows of A");
  }
  return out;
}

}  // namespace bisecbio
