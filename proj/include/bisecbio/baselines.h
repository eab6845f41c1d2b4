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

// Two comparison methods for simple bilevel problems, counted on the same
// oracle basis as the bisection solver:
//
//  a-IRG    x+ = prox_{g2, gamma_k}(x - gamma_k (grad g1(x) + eta_k s_f(x)))
//           gamma_k = gamma0 / (k+1)^step_exponent, eta_k = eta0 / (k+1)^b,
//           reporting the running average of the iterates;
//  BiG-SAM  y = prox_{g2, s_g}(x - s_g grad g1(x)), z = x - s_f grad f1(x),
//           x+ = alpha_{k+1} z + (1 - alpha_{k+1}) y, for f2 == 0.

#ifndef BISECBIO_BASELINES_H_
#define BISECBIO_BASELINES_H_

#include <cstdint>
#include <functional>
#include <span>

#include "bisecbio/bilevel.h"
#include "bisecbio/core.h"

namespace bisecbio {

struct AirgConfig {
  double gamma0 = 1.0;
  double eta0 = 1.0;
  double exponent_b = 0.25;
  double step_exponent = 0.5;
  int64_t max_iters = 1'000'000;
};

void ValidateAirgConfig(const AirgConfig& config);

// min{1, 2/k}; k >= 1.
double DefaultBigSamAlpha(int64_t k);

struct BigSamConfig {
  double step_g = 1.0;
  double step_f = 1.0;
  std::function<double(int64_t)> alpha_sequence = DefaultBigSamAlpha;
  int64_t max_iters = 1'000'000;
};

void ValidateBigSamConfig(const BigSamConfig& config);

// Defaults used by the experiment harness: gamma0 = 1/L_g1 (BiG-SAM step_g
// the same), step_f = 1/L_f1.
AirgConfig DefaultAirgConfig(const BilevelProblem& problem);
BigSamConfig DefaultBigSamConfig(const BilevelProblem& problem);

// One a-IRG step from x_k (k >= 0). Costs one grad of g1, one grad of f1,
// one subgradient of f2 (skipped when f2 == 0) and one prox of g2.
Vector AirgStep(const BilevelProblem& problem, std::span<const double> x,
                int64_t k, const AirgConfig& config, OracleTally& tally);

// One BiG-SAM step from x_k (k >= 0), using alpha_{k+1}. Costs two gradients
// and one prox. Throws UnsupportedProblemError when f2 is not identically 0.
Vector BigSamStep(const BilevelProblem& problem, std::span<const double> x,
                  int64_t k, const BigSamConfig& config, OracleTally& tally);

struct BaselineIterate {
  int64_t k = 0;
  // The reported iterate: the running average for a-IRG, x_k for BiG-SAM.
  std::span<const double> x;
  const OracleTally* tally = nullptr;
};
// Return false to stop the run early.
using BaselineObserver = std::function<bool(const BaselineIterate&)>;

struct BaselineResult {
  Vector point;
  Vector last_iterate;
  int64_t iters = 0;
  OracleTally tally;
};

BaselineResult RunAirg(const BilevelProblem& problem,
                       std::span<const double> x0, const AirgConfig& config,
                       const BaselineObserver& observer = nullptr);
BaselineResult RunBigSam(const BilevelProblem& problem,
                         std::span<const double> x0, const BigSamConfig& config,
                         const BaselineObserver& observer = nullptr);

}  // namespace bisecbio

#endif  // BISECBIO_BASELINES_H_
