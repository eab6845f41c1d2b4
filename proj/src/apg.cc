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

#include "bisecbio/apg.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bisecbio/kernels.h"

namespace bisecbio {

using kernels::Distance;
using kernels::Dot;

std::string_view FistaModeName(FistaMode mode) {
  switch (mode) {
    case FistaMode::kConstant:
      return "constant";
    case FistaMode::kBacktracking:
      return "backtracking";
    case FistaMode::kGreedy:
      return "greedy";
  }
  throw InternalLogicError("unknown FISTA mode");
}

FistaMode ParseFistaMode(std::string_view name) {
  for (FistaMode mode :
       {FistaMode::kConstant, FistaMode::kBacktracking, FistaMode::kGreedy}) {
    if (FistaModeName(mode) == name) return mode;
  }
  throw ParameterError("unknown FISTA mode: " + std::string(name));
}

void ValidateFistaConfig(const FistaConfig& config) {
  if (!(config.eta > 1.0)) throw ParameterError("eta must be > 1");
  if (config.max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (std::isnan(config.radius_bound)) {
    throw ParameterError("radius_bound is NaN");
  }
  if (!(config.residual_stop >= 0.0)) {
    throw ParameterError("residual_stop must be >= 0");
  }
  if (config.mode == FistaMode::kBacktracking && !(config.l0 > 0.0)) {
    throw ParameterError("l0 must be > 0");
  }
}

Vector ProxGradStep(const CompositeFunction& phi, std::span<const double> y,
                    double l, OracleTally& tally) {
  if (!(l > 0.0)) throw ParameterError("step constant L must be > 0");
  Vector point = EvaluateGradient(phi, y, tally);
  for (size_t i = 0; i < point.size(); ++i) point[i] = y[i] - point[i] / l;
  return EvaluateProx(phi, point, 1.0 / l, tally);
}

double MomentumUpdate(double t) {
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
}

BacktrackResult BacktrackStep(const CompositeFunction& phi,
                              std::span<const double> y, double l_prev,
                              double eta, OracleTally& tally) {
  if (!(l_prev > 0.0)) throw ParameterError("l_prev must be > 0");
  if (!(eta > 1.0)) throw ParameterError("eta must be > 1");
  const Vector grad = EvaluateGradient(phi, y, tally);
  const double value_y = EvaluateSmooth(phi, y, tally);
  const double slack = 1e-12 * std::max(1.0, std::abs(value_y));
  double l = l_prev;
  Vector point(y.size());
  for (int trial = 0; trial <= kMaxBacktrackDoublings; ++trial) {
    for (size_t i = 0; i < y.size(); ++i) point[i] = y[i] - grad[i] / l;
    Vector x = EvaluateProx(phi, point, 1.0 / l, tally);
    const Vector step = kernels::Subtract(x, y);
    const double model =
        value_y + Dot(grad, step) + 0.5 * l * kernels::SquaredNorm(step);
    if (EvaluateSmooth(phi, x, tally) <= model + slack) {
      return {l, std::move(x), trial + 1};
    }
    l *= eta;
  }
  throw LineSearchError("backtracking exceeded " +
                        std::to_string(kMaxBacktrackDoublings) +
                        " increases of L; check the gradient and L0");
}

int64_t IterationBudget(double rate_alpha, double lipschitz, double radius,
                        double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  if (!(rate_alpha > 0.0) || !(lipschitz >= 0.0) || !(radius >= 0.0)) {
    throw ParameterError("budget inputs must be nonnegative");
  }
  const double raw =
      std::ceil(std::sqrt(2.0 * rate_alpha * lipschitz * radius * radius /
                          epsilon));
  if (raw < 1.0) {
    throw ParameterError("iteration budget is 0 (is the Lipschitz constant 0?)");
  }
  if (!(raw < 9.0e18)) return INT64_MAX;
  return static_cast<int64_t>(raw);
}

ApgResult FistaSolve(const CompositeFunction& phi, std::span<const double> x0,
                     double epsilon, const FistaConfig& config,
                     const FistaObserver& observer) {
  ValidateFistaConfig(config);
  CheckDimension(x0, phi.dimension, "FistaSolve");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");

  const bool backtracking = config.mode == FistaMode::kBacktracking;
  const double radius = config.radius_bound > 0.0
                            ? config.radius_bound
                            : 10.0 + kernels::Norm2(x0);
  const double rate_alpha = backtracking ? config.eta : 1.0;
  double l = backtracking ? config.l0 : phi.lipschitz;
  if (!backtracking && !(phi.lipschitz > 0.0)) {
    throw ParameterError("constant-step FISTA needs a positive Lipschitz "
                         "constant");
  }

  ApgResult result;
  result.budget = IterationBudget(rate_alpha, l, radius, epsilon);
  bool warned = false;
  auto capped = [&](int64_t budget) {
    if (budget > config.max_iters) {
      if (!warned && config.warn_on_cap) {
        LogWarning("FISTA budget " + std::to_string(budget) +
                   " capped at max_iters=" + std::to_string(config.max_iters));
        warned = true;
      }
      return config.max_iters;
    }
    return budget;
  };
  int64_t limit = capped(result.budget);

  Vector x_prev(x0.begin(), x0.end());
  Vector y = x_prev;
  Vector x = x_prev;
  double t = 1.0;
  int64_t k = 0;
  while (k < limit) {
    ++k;
    if (backtracking) {
      BacktrackResult step = BacktrackStep(phi, y, l, config.eta, result.tally);
      l = step.l;
      x = std::move(step.x);
      result.budget =
          std::max(result.budget, IterationBudget(rate_alpha, l, radius, epsilon));
      limit = capped(result.budget);
    } else {
      x = ProxGradStep(phi, y, l, result.tally);
    }
    if (observer) observer({k, x, l, &result.tally});
    if (config.residual_stop > 0.0 &&
        l * Distance(x, y) <= config.residual_stop) {
      break;
    }

    double t_next = MomentumUpdate(t);
    double beta = (t - 1.0) / t_next;
    if (config.mode == FistaMode::kGreedy) {
      double restart = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        restart += (y[i] - x[i]) * (x[i] - x_prev[i]);
      }
      if (restart > 0.0) {
        t_next = 1.0;
        beta = 0.0;
      }
    }
    for (size_t i = 0; i < x.size(); ++i) {
      y[i] = x[i] + beta * (x[i] - x_prev[i]);
    }
    x_prev = x;
    t = t_next;
  }

  result.iters = k;
  result.final_l = l;
  result.objective = EvaluateComposite(phi, x, result.tally).value();
  result.point = std::move(x);
  return result;
}

ApgResult ApgOracle(const SmoothPart& smooth, const NonsmoothPart& nonsmooth,
                    double lipschitz, std::span<const double> x0,
                    double epsilon, const FistaConfig& config,
                    const FistaObserver& observer) {
  CompositeFunction phi;
  phi.dimension = static_cast<int>(x0.size());
  phi.smooth = smooth;
  phi.lipschitz = lipschitz;
  phi.nonsmooth = nonsmooth;
  return FistaSolve(phi, x0, epsilon, config, observer);
}

}  // namespace bisecbio
