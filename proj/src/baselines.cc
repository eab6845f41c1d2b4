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

#include "bisecbio/baselines.h"

#include <algorithm>
#include <cmath>

namespace bisecbio {

void ValidateAirgConfig(const AirgConfig& config) {
  if (!(config.gamma0 > 0.0)) throw ParameterError("gamma0 must be > 0");
  if (!(config.eta0 >= 0.0)) throw ParameterError("eta0 must be >= 0");
  if (!(config.exponent_b > 0.0 && config.exponent_b < 0.5)) {
    throw ParameterError("exponent_b must lie in (0, 0.5)");
  }
  if (!(config.step_exponent >= 0.0 && config.step_exponent <= 1.0)) {
    throw ParameterError("step_exponent must lie in [0, 1]");
  }
  if (config.max_iters < 1) throw ParameterError("max_iters must be >= 1");
}

double DefaultBigSamAlpha(int64_t k) {
  if (k < 1) throw ParameterError("alpha sequence is indexed from 1");
  return std::min(1.0, 2.0 / static_cast<double>(k));
}

void ValidateBigSamConfig(const BigSamConfig& config) {
  if (!(config.step_g > 0.0)) throw ParameterError("step_g must be > 0");
  if (!(config.step_f > 0.0)) throw ParameterError("step_f must be > 0");
  if (!config.alpha_sequence) throw ParameterError("alpha_sequence unset");
  if (config.max_iters < 1) throw ParameterError("max_iters must be >= 1");
}

AirgConfig DefaultAirgConfig(const BilevelProblem& problem) {
  AirgConfig config;
  if (problem.lower.lipschitz > 0.0) {
    config.gamma0 = 1.0 / problem.lower.lipschitz;
  }
  return config;
}

BigSamConfig DefaultBigSamConfig(const BilevelProblem& problem) {
  BigSamConfig config;
  if (problem.lower.lipschitz > 0.0) {
    config.step_g = 1.0 / problem.lower.lipschitz;
  }
  if (problem.upper.lipschitz > 0.0) {
    config.step_f = 1.0 / problem.upper.lipschitz;
  }
  return config;
}

Vector AirgStep(const BilevelProblem& problem, std::span<const double> x,
                int64_t k, const AirgConfig& config, OracleTally& tally) {
  if (k < 0) throw ParameterError("iteration index must be >= 0");
  const double base = static_cast<double>(k + 1);
  const double gamma = config.gamma0 / std::pow(base, config.step_exponent);
  const double eta = config.eta0 / std::pow(base, config.exponent_b);

  const Vector grad_g = EvaluateGradient(problem.lower, x, tally);
  const Vector grad_f = EvaluateGradient(problem.upper, x, tally);
  const Vector sub_f = EvaluateNonsmoothSubgradient(problem.upper, x, tally);
  Vector point(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    point[i] = x[i] - gamma * (grad_g[i] + eta * (grad_f[i] + sub_f[i]));
  }
  return EvaluateProx(problem.lower, point, gamma, tally);
}

Vector BigSamStep(const BilevelProblem& problem, std::span<const double> x,
                  int64_t k, const BigSamConfig& config, OracleTally& tally) {
  if (!problem.upper.nonsmooth.is_zero) {
    throw UnsupportedProblemError(
        "BiG-SAM needs a smooth upper level (f2 == 0)");
  }
  if (k < 0) throw ParameterError("iteration index must be >= 0");
  const double alpha = config.alpha_sequence(k + 1);
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ParameterError("alpha_sequence must lie in (0, 1]");
  }

  const Vector grad_g = EvaluateGradient(problem.lower, x, tally);
  Vector point(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    point[i] = x[i] - config.step_g * grad_g[i];
  }
  const Vector y = EvaluateProx(problem.lower, point, config.step_g, tally);
  const Vector grad_f = EvaluateGradient(problem.upper, x, tally);
  Vector out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double z = x[i] - config.step_f * grad_f[i];
    out[i] = alpha * z + (1.0 - alpha) * y[i];
  }
  return out;
}

BaselineResult RunAirg(const BilevelProblem& problem,
                       std::span<const double> x0, const AirgConfig& config,
                       const BaselineObserver& observer) {
  ValidateProblem(problem);
  ValidateAirgConfig(config);
  CheckDimension(x0, problem.dimension, "RunAirg");
  BaselineResult result;
  Vector x(x0.begin(), x0.end());
  Vector average(x.size(), 0.0);
  for (int64_t k = 0; k < config.max_iters; ++k) {
    x = AirgStep(problem, x, k, config, result.tally);
    const double weight = 1.0 / static_cast<double>(k + 1);
    for (size_t i = 0; i < x.size(); ++i) {
      average[i] += weight * (x[i] - average[i]);
    }
    result.iters = k + 1;
    if (observer && !observer({k + 1, average, &result.tally})) break;
  }
  result.point = std::move(average);
  result.last_iterate = std::move(x);
  return result;
}

BaselineResult RunBigSam(const BilevelProblem& problem,
                         std::span<const double> x0, const BigSamConfig& config,
                         const BaselineObserver& observer) {
  ValidateProblem(problem);
  ValidateBigSamConfig(config);
  CheckDimension(x0, problem.dimension, "RunBigSam");
  if (!problem.upper.nonsmooth.is_zero) {
    throw UnsupportedProblemError(
        "BiG-SAM needs a smooth upper level (f2 == 0)");
  }
  BaselineResult result;
  Vector x(x0.begin(), x0.end());
  for (int64_t k = 0; k < config.max_iters; ++k) {
    x = BigSamStep(problem, x, k, config, result.tally);
    result.iters = k + 1;
    if (observer && !observer({k + 1, x, &result.tally})) break;
  }
  result.point = x;
  result.last_iterate = std::move(x);
  return result;
}

}  // namespace bisecbio
