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

// Builders for the bilevel problem families:
//
//   mnp-*           min |x|^2/2            s.t. x in argmin |Az - b|^2/2 + I_C(z)
//                   with C = R^n, the nonnegative orthant, or an l1 ball
//   lrp-l1ball      min |x|^2/2            s.t. x in argmin logistic(z) + I_C(z)
//   ssp-elasticnet  min |x|_1 + a|x|^2/2   s.t. x in argmin |Az - b|^2/2
//   toy             min |x1| + |x2|        s.t. x in argmin (z1 - 1)^2

#ifndef BISECBIO_PROBLEMS_H_
#define BISECBIO_PROBLEMS_H_

#include <memory>
#include <string>

#include "bisecbio/bilevel.h"
#include "bisecbio/data.h"
#include "bisecbio/kernels.h"
#include "bisecbio/prox.h"

namespace bisecbio {

// |Ax - b|^2 / 2.
SmoothPart LeastSquaresPart(std::shared_ptr<const kernels::DenseMatrix> a,
                            Vector b);
// (1/m) sum_i log(1 + exp(-labels_i a_i^T x)).
SmoothPart LogisticPart(std::shared_ptr<const kernels::DenseMatrix> a,
                        Vector labels);
// weight * |x|^2 / 2.
SmoothPart ScaledSquaredNormPart(double weight);
SmoothPart ZeroSmoothPart();

struct ProblemSpec {
  LevelSetKind kind = LevelSetKind::kMnpFree;
  LevelSetParams params;
};

// Builds one of the data-driven families. labels are b for least squares
// and the +-1 classes for logistic regression.
BilevelProblem MakeProblem(const ProblemSpec& spec,
                           const kernels::DenseMatrix& a, const Vector& labels);
BilevelProblem MakeProblem(const ProblemSpec& spec, const DesignMatrix& dm);

// f = |x1| + |x2|, g = (x1 - 1)^2 on R^2. f1 = 0 carries Lipschitz constant
// 1 (any positive value is valid) so the APG budget stays positive.
BilevelProblem MakeToyProblem();

// A problem described by a JSON file:
//   {"kind": "mnp-l1ball", "A": [[...], ...], "b": [...],
//    "lambda": 10, "alpha": 0.02}
// "kind" is any data-driven family; "lambda"/"alpha" are optional.
struct CustomProblem {
  ProblemSpec spec;
  kernels::DenseMatrix a;
  Vector b;
};
CustomProblem LoadCustomProblem(const std::string& path);

}  // namespace bisecbio

#endif  // BISECBIO_PROBLEMS_H_
