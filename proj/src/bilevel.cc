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

#include "bisecbio/bilevel.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace bisecbio {

namespace {

void RequireEpsilons(double eps_f, double eps_g) {
  if (!(eps_f > 0.0) || !std::isfinite(eps_f)) {
    throw ParameterError("eps_f must be positive");
  }
  if (!(eps_g > 0.0) || !std::isfinite(eps_g)) {
    throw ParameterError("eps_g must be positive");
  }
}

std::string Format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// f evaluated without touching any tally; used inside the indicator of the
// level set, which is part of h_c.
ExtendedReal UncountedValue(const CompositeFunction& fn,
                            std::span<const double> x) {
  return ExtendedReal(fn.smooth.value(x)) + fn.nonsmooth.value(x);
}

}  // namespace

void ValidateProblem(const BilevelProblem& problem) {
  if (problem.dimension <= 0) throw ParameterError("dimension must be > 0");
  if (problem.upper.dimension != problem.dimension ||
      problem.lower.dimension != problem.dimension) {
    throw DimensionError("upper/lower dimensions differ from the problem's");
  }
  if (!problem.level_set_prox) {
    throw ParameterError("problem has no level-set prox family");
  }
  if (!(problem.upper.lipschitz >= 0.0) || !(problem.lower.lipschitz >= 0.0)) {
    throw ParameterError("Lipschitz constants must be >= 0");
  }
}

InitialBounds ComputeInitialBounds(const BilevelProblem& problem, double eps_f,
                                   double eps_g, std::span<const double> x0_f,
                                   std::span<const double> x0_g,
                                   const FistaConfig& config) {
  ValidateProblem(problem);
  RequireEpsilons(eps_f, eps_g);
  CheckDimension(x0_f, problem.dimension, "ComputeInitialBounds");
  CheckDimension(x0_g, problem.dimension, "ComputeInitialBounds");

  InitialBounds out;
  ApgResult upper = FistaSolve(problem.upper, x0_f, 0.5 * eps_f, config);
  ApgResult lower = FistaSolve(problem.lower, x0_g, 0.5 * eps_g, config);
  out.tally = upper.tally + lower.tally;
  out.inner_iterations = upper.iters + lower.iters;

  out.l = EvaluateComposite(problem.upper, upper.point, out.tally).value() -
          0.5 * eps_f;
  out.u = EvaluateComposite(problem.upper, lower.point, out.tally).value();
  out.g_tilde =
      EvaluateComposite(problem.lower, lower.point, out.tally).value();
  if (!std::isfinite(out.u) || !std::isfinite(out.l) ||
      !std::isfinite(out.g_tilde)) {
    throw InconsistentOracleError("initial APG points left the domain");
  }
  if (out.l > out.u) {
    throw InconsistentOracleError(
        "initial bounds have l > u (l=" + Format(out.l) + ", u=" +
        Format(out.u) + "); the radius bound R is probably too small");
  }
  out.x_f = std::move(upper.point);
  out.x_g = std::move(lower.point);
  return out;
}

bool CheckInfeasibilityCondition(double g_candidate, double g_tilde,
                                 double eps_g) {
  return g_candidate > g_tilde + 0.5 * eps_g;
}

CompositeFunction LevelSetSubproblem(const BilevelProblem& problem, double c) {
  CompositeFunction sub = problem.lower;
  NonsmoothPart h;
  const NonsmoothPart g2 = problem.lower.nonsmooth;
  const CompositeFunction f = problem.upper;
  h.value = [g2, f, c](std::span<const double> x) {
    if (UncountedValue(f, x) > ExtendedReal(c + kFeasibilityTolerance)) {
      return ExtendedReal::Infinity();
    }
    return g2.value(x);
  };
  h.prox = problem.level_set_prox(c);
  sub.nonsmooth = std::move(h);
  return sub;
}

SolutionCertificate BisectionSolve(const BilevelProblem& problem, double eps_f,
                                   double eps_g, std::span<const double> x0,
                                   const BisectionConfig& config,
                                   BisectionState* state) {
  BisectionState local;
  BisectionState& s = state != nullptr ? *state : local;
  s = BisectionState();

  InitialBounds init =
      ComputeInitialBounds(problem, eps_f, eps_g, x0, x0, config.apg);
  SolutionCertificate cert;
  cert.epsilon_f = eps_f;
  cert.epsilon_g = eps_g;
  cert.tally = init.tally;
  cert.inner_iterations = init.inner_iterations;
  cert.initial_width = init.u - init.l;

  s.l = init.l;
  s.u = init.u;
  s.g_tilde = init.g_tilde;
  s.incumbent = init.x_g;

  if (config.observer) {
    config.observer({BisectionEvent::Stage::kInitialBounds, 0, s.l, s.u,
                     s.incumbent, cert.tally});
  }

  const int64_t max_rounds = MaxBisectionRounds(cert.initial_width, eps_f);
  Vector warm = init.x_g;
  while (s.u - s.l > eps_f) {
    if (static_cast<int64_t>(s.rounds.size()) >= max_rounds) {
      throw InternalLogicError("bisection exceeded its round-count bound");
    }
    RoundLog round;
    round.c = 0.5 * (s.l + s.u);
    const CompositeFunction sub = LevelSetSubproblem(problem, round.c);
    ApgResult inner = FistaSolve(sub, config.warm_start ? std::span(warm) : x0,
                                 0.5 * eps_g, config.apg);
    round.inner_tally = inner.tally;
    round.inner_iterations = inner.iters;
    round.g_at_candidate =
        EvaluateComposite(problem.lower, inner.point, round.inner_tally)
            .value();
    round.f_at_candidate =
        EvaluateComposite(problem.upper, inner.point, round.inner_tally)
            .value();
    round.condition_fired =
        CheckInfeasibilityCondition(round.g_at_candidate, s.g_tilde, eps_g);
    if (round.condition_fired) {
      s.l = round.c;
    } else {
      s.u = round.f_at_candidate;
      s.incumbent = inner.point;
    }
    round.l_after = s.l;
    round.u_after = s.u;
    cert.tally += round.inner_tally;
    cert.inner_iterations += round.inner_iterations;
    warm = std::move(inner.point);
    s.rounds.push_back(round);
    if (config.observer) {
      config.observer({BisectionEvent::Stage::kRound,
                       static_cast<int64_t>(s.rounds.size()), s.l, s.u,
                       s.incumbent, cert.tally});
    }
  }

  cert.point = s.incumbent;
  cert.upper_bound_u = s.u;
  cert.lower_bound_l = s.l;
  cert.g_reference = s.g_tilde;
  cert.bisection_rounds = static_cast<int64_t>(s.rounds.size());
  return cert;
}

std::string VerificationReport::FailureSummary() const {
  std::string out;
  for (const CertificateCheck& check : checks) {
    if (check.passed) continue;
    if (!out.empty()) out += "; ";
    out += check.name + " violated (" + Format(check.lhs) + " vs " +
           Format(check.rhs) + ")";
  }
  return out;
}

VerificationReport VerifyCertificate(const BilevelProblem& problem,
                                     const SolutionCertificate& cert,
                                     std::optional<double> g_star,
                                     std::optional<double> p_star) {
  ValidateProblem(problem);
  CheckDimension(cert.point, problem.dimension, "VerifyCertificate");
  VerificationReport report;
  OracleTally scratch;
  report.f_at_point =
      EvaluateComposite(problem.upper, cert.point, scratch).value();
  report.g_at_point =
      EvaluateComposite(problem.lower, cert.point, scratch).value();

  auto add = [&](std::string name, double lhs, double rhs) {
    const bool ok = lhs <= rhs;
    report.checks.push_back({std::move(name), lhs, rhs, ok});
    report.passed = report.passed && ok;
  };
  const double rel = 1e-12;
  add("u - l <= eps_f", cert.upper_bound_u - cert.lower_bound_l,
      cert.epsilon_f);
  add("g(x) <= g_ref + eps_g/2", report.g_at_point,
      cert.g_reference + 0.5 * cert.epsilon_g +
          rel * std::max(1.0, std::abs(cert.g_reference)));
  add("|f(x) - u| <= 1e-12", std::abs(report.f_at_point - cert.upper_bound_u),
      rel * std::max(1.0, std::abs(cert.upper_bound_u)));
  if (cert.epsilon_f > 0.0) {
    add("rounds <= ceil(log2(width0/eps_f))+",
        static_cast<double>(cert.bisection_rounds),
        static_cast<double>(
            MaxBisectionRounds(cert.initial_width, cert.epsilon_f)));
  }
  if (g_star.has_value()) {
    add("g(x) - g* <= eps_g", report.g_at_point - *g_star, cert.epsilon_g);
  }
  if (p_star.has_value()) {
    add("f(x) - p* <= eps_f", report.f_at_point - *p_star, cert.epsilon_f);
  }
  return report;
}

void ValidateHolderDiagnostics(const HolderDiagnostics& diag) {
  if (!(diag.holder_alpha > 0.0)) throw ParameterError("holder alpha <= 0");
  if (!(diag.holder_r >= 1.0)) throw ParameterError("holder r < 1");
  if (!(diag.b_f > 0.0)) throw ParameterError("B_f must be > 0");
}

double HolderLowerBound(const HolderDiagnostics& diag, double eps_g) {
  ValidateHolderDiagnostics(diag);
  if (!(eps_g >= 0.0)) throw ParameterError("eps_g must be >= 0");
  if (eps_g == 0.0) return 0.0;
  // Extended precision: the rounding of 1/r is amplified by |log| of the base.
  const long double r = diag.holder_r;
  return static_cast<double>(
      -static_cast<long double>(diag.b_f) *
      std::pow(r * eps_g / static_cast<long double>(diag.holder_alpha),
               1.0L / r));
}

double EpsGForFGap(const HolderDiagnostics& diag, double eps_f,
                      double gamma) {
  ValidateHolderDiagnostics(diag);
  if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
  if (!(eps_f > 0.0)) throw ParameterError("eps_f must be > 0");
  return static_cast<double>(
      static_cast<long double>(diag.holder_alpha) / gamma *
      std::pow(static_cast<long double>(eps_f) / diag.b_f,
               static_cast<long double>(diag.holder_r)));
}

double EpsGForFGap(const HolderDiagnostics& diag, double eps_f) {
  return EpsGForFGap(diag, eps_f, diag.holder_r);
}

double ValueFnLowerBound(const ValueFunctionDiagnostics& diag, double eps_g) {
  if (!(diag.l_eps >= 0.0)) throw ParameterError("L_eps must be >= 0");
  if (!(eps_g >= 0.0)) throw ParameterError("eps_g must be >= 0");
  return -diag.l_eps * eps_g;
}

double ToyValueFunction(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw ParameterError("toy value function needs eps in [0, 1)");
  }
  return 1.0 - std::sqrt(eps);
}

}  // namespace bisecbio
