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

// Bisection on the optimal value for simple bilevel problems
//
//   min f(x) = f1(x) + f2(x)   s.t.   x in argmin g(z) = g1(z) + g2(z).
//
// The solver keeps an interval [l, u] around the bilevel optimum. Each round
// picks c = (l + u) / 2 and approximately minimizes g1 + h_c, where
// h_c = g2 + indicator{f <= c}. If the approximate minimizer x_c has
//
//   g(x_c) > g_ref + eps_g / 2
//
// no point of {f <= c} is lower-level optimal, so l = c; otherwise
// u = f(x_c) and x_c becomes the incumbent. The loop stops once
// u - l <= eps_f, after at most ceil(log2((u0 - l0) / eps_f)) rounds.

#ifndef BISECBIO_BILEVEL_H_
#define BISECBIO_BILEVEL_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bisecbio/apg.h"
#include "bisecbio/core.h"

namespace bisecbio {

// c -> prox of h_c = g2 + indicator{f <= c}.
using LevelSetProxFactory = std::function<ProxFn(double)>;

struct BilevelProblem {
  int dimension = 0;
  CompositeFunction upper;  // f
  CompositeFunction lower;  // g
  LevelSetProxFactory level_set_prox;
};

void ValidateProblem(const BilevelProblem& problem);

struct RoundLog {
  double c = 0.0;
  bool condition_fired = false;
  double g_at_candidate = 0.0;
  double f_at_candidate = 0.0;
  // Inner APG call plus the evaluations of g and f at its output.
  OracleTally inner_tally;
  int64_t inner_iterations = 0;
  double l_after = 0.0;
  double u_after = 0.0;
};

struct BisectionState {
  double l = 0.0;
  double u = 0.0;
  double g_tilde = 0.0;
  Vector incumbent;
  std::vector<RoundLog> rounds;
};

struct InitialBounds {
  double l = 0.0;
  double u = 0.0;
  double g_tilde = 0.0;
  Vector x_f;
  Vector x_g;
  OracleTally tally;
  int64_t inner_iterations = 0;
};

// Progress events for tracing. `tally` is cumulative over the run.
struct BisectionEvent {
  enum class Stage { kInitialBounds, kRound };
  Stage stage = Stage::kInitialBounds;
  int64_t round = 0;
  double l = 0.0;
  double u = 0.0;
  std::span<const double> incumbent;
  OracleTally tally;
};
using BisectionObserver = std::function<void(const BisectionEvent&)>;

struct BisectionConfig {
  FistaConfig apg;
  // Start each round's inner solve from the previous round's output.
  bool warm_start = true;
  BisectionObserver observer;
};

// x_f = APG(f1, f2, L_f1, x0_f, eps_f/2), x_g = APG(g1, g2, L_g1, x0_g,
// eps_g/2); l = f(x_f) - eps_f/2, u = f(x_g), g_tilde = g(x_g). Throws
// InconsistentOracleError when l > u.
InitialBounds ComputeInitialBounds(const BilevelProblem& problem, double eps_f,
                                   double eps_g, std::span<const double> x0_f,
                                   std::span<const double> x0_g,
                                   const FistaConfig& config);

// g_candidate > g_tilde + eps_g / 2, strictly.
bool CheckInfeasibilityCondition(double g_candidate, double g_tilde,
                                 double eps_g);

// The composite g1 + h_c used by a bisection round.
CompositeFunction LevelSetSubproblem(const BilevelProblem& problem, double c);

SolutionCertificate BisectionSolve(const BilevelProblem& problem, double eps_f,
                                   double eps_g, std::span<const double> x0,
                                   const BisectionConfig& config,
                                   BisectionState* state = nullptr);

struct CertificateCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = false;
};

struct VerificationReport {
  bool passed = true;
  double f_at_point = 0.0;
  double g_at_point = 0.0;
  std::vector<CertificateCheck> checks;

  std::string FailureSummary() const;
};

// Re-evaluates f and g at the certificate point and checks
//   u - l <= eps_f,
//   g(x) <= g_ref + eps_g/2,
//   f(x) == u (to 1e-12 relative),
//   rounds <= ceil(log2(initial_width / eps_f))_+,
// plus g(x) - g* <= eps_g and f(x) - p* <= eps_f when references are given.
VerificationReport VerifyCertificate(const BilevelProblem& problem,
                                     const SolutionCertificate& cert,
                                     std::optional<double> g_star,
                                     std::optional<double> p_star);

// ---------------------------------------------------------------------------
// Lower-bound diagnostics
// ---------------------------------------------------------------------------

// Lower-level error bound (alpha/r) dist(x, X_g*)^r <= g(x) - g* with
// upper-level constant B_f = B_f1 + l_f2.
struct HolderDiagnostics {
  double holder_alpha = 1.0;
  double holder_r = 1.0;
  double b_f = 1.0;
  double l_f2 = 0.0;
  double b_f1 = 0.0;
};

void ValidateHolderDiagnostics(const HolderDiagnostics& diag);

// -B_f (r eps_g / alpha)^(1/r).
double HolderLowerBound(const HolderDiagnostics& diag, double eps_g);
// (alpha / gamma) (eps_f / B_f)^r. With gamma = r this makes
// HolderLowerBound(diag, eps_g) == -eps_f.
double EpsGForFGap(const HolderDiagnostics& diag, double eps_f,
                      double gamma);
double EpsGForFGap(const HolderDiagnostics& diag, double eps_f);

// v(eps) = min f s.t. g <= g* + eps, with v(0) - v(eps) <= l_eps * eps.
struct ValueFunctionDiagnostics {
  double l_eps = 1.0;
  double v0 = 0.0;
  double v_eps = 0.0;
};

// -l_eps * eps_g.
double ValueFnLowerBound(const ValueFunctionDiagnostics& diag, double eps_g);

// v(eps) = 1 - sqrt(eps) for f = |z1| + |z2|, g = (z1 - 1)^2.
double ToyValueFunction(double eps);

}  // namespace bisecbio

#endif  // BISECBIO_BILEVEL_H_
