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

// Accelerated proximal gradient (FISTA) with a constant step, with
// backtracking, and with a greedy momentum restart.
//
// The solver cannot certify eps-optimality without the optimal value, so it
// runs the fixed budget
//
//   k_budget = ceil(sqrt(2 * rate_alpha * L * R^2 / eps))
//
// from the standard O(1/k^2) bound phi(x_k) - phi* <= 2 rate_alpha L R^2 /
// (k+1)^2, where R bounds |x0 - x*|. rate_alpha is 1 for the constant and
// greedy modes and eta for backtracking (with L the running estimate L_k,
// so the budget grows as the line search raises L_k). R defaults to
// 10 + |x0|, which is a heuristic: callers with a better bound should set it.

#ifndef BISECBIO_APG_H_
#define BISECBIO_APG_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

#include "bisecbio/core.h"

namespace bisecbio {

enum class FistaMode { kConstant, kBacktracking, kGreedy };

std::string_view FistaModeName(FistaMode mode);
FistaMode ParseFistaMode(std::string_view name);

struct FistaConfig {
  FistaMode mode = FistaMode::kConstant;
  // Initial L for backtracking.
  double l0 = 1.0;
  double eta = 2.0;
  int64_t max_iters = 1'000'000;
  // R in the budget; <= 0 selects 10 + |x0|.
  double radius_bound = 0.0;
  // Stop once L * |x_k - y_k| <= residual_stop. 0 disables.
  double residual_stop = 0.0;
  // Warn (once per solve) when max_iters truncates the budget.
  bool warn_on_cap = true;
};

void ValidateFistaConfig(const FistaConfig& config);

struct ApgResult {
  Vector point;
  double objective = 0.0;
  int64_t iters = 0;
  OracleTally tally;
  // Step constant of the last accepted step.
  double final_l = 0.0;
  // Number of iterations the budget rule asked for (before the max_iters cap).
  int64_t budget = 0;
};

struct FistaIterate {
  int64_t k = 0;
  std::span<const double> x;
  double l = 0.0;
  const OracleTally* tally = nullptr;
};
using FistaObserver = std::function<void(const FistaIterate&)>;

// p_L(y) = prox_{phi2, 1/L}(y - grad phi1(y) / L). One grad_eval and one
// prox_call.
Vector ProxGradStep(const CompositeFunction& phi, std::span<const double> y,
                    double l, OracleTally& tally);

// (1 + sqrt(1 + 4 t^2)) / 2.
double MomentumUpdate(double t);

struct BacktrackResult {
  double l = 0.0;
  Vector x;
  int trials = 0;
};

inline constexpr int kMaxBacktrackDoublings = 100;

// Smallest L = eta^i * l_prev (i >= 0) with
//   phi1(p_L(y)) <= phi1(y) + <grad phi1(y), p - y> + L/2 |p - y|^2
// (the nonsmooth part cancels on both sides). Costs one grad_eval, one
// fn_eval at y, and one prox_call plus one fn_eval per trial. Throws
// LineSearchError after kMaxBacktrackDoublings increases.
BacktrackResult BacktrackStep(const CompositeFunction& phi,
                              std::span<const double> y, double l_prev,
                              double eta, OracleTally& tally);

// Throws ParameterError when the budget rounds to 0.
int64_t IterationBudget(double rate_alpha, double lipschitz, double radius,
                        double epsilon);

ApgResult FistaSolve(const CompositeFunction& phi, std::span<const double> x0,
                     double epsilon, const FistaConfig& config,
                     const FistaObserver& observer = nullptr);

// APG(phi1, phi2, L, x0, eps).
ApgResult ApgOracle(const SmoothPart& smooth, const NonsmoothPart& nonsmooth,
                    double lipschitz, std::span<const double> x0,
                    double epsilon, const FistaConfig& config,
                    const FistaObserver& observer = nullptr);

}  // namespace bisecbio

#endif  // BISECBIO_APG_H_
