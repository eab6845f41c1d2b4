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

// Problem-model abstractions shared by every solver in the library:
// composite objectives (smooth part + prox-friendly part), extended-real
// values, oracle-call accounting and the solution certificate returned by the
// bisection solver.
//
// The library does not check that the lower-level objective has a
// non-singleton solution set (i.e. is not strongly convex). That premise is
// the caller's responsibility; when it fails the bilevel problem degenerates
// to the lower-level problem and the solver still returns a valid point.

#ifndef BISECBIO_CORE_H_
#define BISECBIO_CORE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bisecbio {

using Vector = std::vector<double>;

// Absolute tolerance used when re-checking membership in level sets and
// constraint sets produced by exact projections.
inline constexpr double kFeasibilityTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or argument (non-positive tolerance, bad radius, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch between a vector and the problem it is used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN or infinity produced by a smooth part or a gradient.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

// An iterative subroutine ran out of budget. Carries the last iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Vector last_iterate)
      : Error(what), last_iterate_(std::move(last_iterate)) {}
  const Vector& last_iterate() const { return last_iterate_; }

 private:
  Vector last_iterate_;
};

class LineSearchError : public Error {
 public:
  using Error::Error;
};

// Initial bounds came out with l > u, which means an APG oracle missed its
// accuracy target (usually an underestimated radius bound).
class InconsistentOracleError : public Error {
 public:
  using Error::Error;
};

class EmptyLevelSetError : public Error {
 public:
  using Error::Error;
};

class InternalLogicError : public Error {
 public:
  using Error::Error;
};

class UnsupportedProblemError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int64_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int64_t line() const { return line_; }

 private:
  int64_t line_;
};

// ---------------------------------------------------------------------------
// Extended reals
// ---------------------------------------------------------------------------

// A real number or +infinity. Nonsmooth parts return this so that a point
// outside a domain compares as "greater than everything" without relying on
// IEEE infinities leaking into arithmetic.
class ExtendedReal {
 public:
  // Implicit on purpose: finite doubles are the common case. +inf maps to
  // the infinite tag, NaN and -inf throw NumericDomainError.
  ExtendedReal(double value);  // NOLINT

  static ExtendedReal Infinity() { return ExtendedReal(); }

  bool is_finite() const { return !infinite_; }
  // Returns +inf as an IEEE double when infinite.
  double value() const;

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b);
  friend bool operator==(ExtendedReal a, ExtendedReal b);
  friend bool operator<(ExtendedReal a, ExtendedReal b);
  friend bool operator<=(ExtendedReal a, ExtendedReal b) { return !(b < a); }
  friend bool operator>(ExtendedReal a, ExtendedReal b) { return b < a; }
  friend bool operator>=(ExtendedReal a, ExtendedReal b) { return !(a < b); }

 private:
  ExtendedReal() : value_(0.0), infinite_(true) {}

  double value_;
  bool infinite_;
};

std::string ToString(ExtendedReal x);

// ---------------------------------------------------------------------------
// Composite functions
// ---------------------------------------------------------------------------

using ValueFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<Vector(std::span<const double>)>;
using ExtendedValueFn = std::function<ExtendedReal(std::span<const double>)>;
// prox(point, scale) = argmin_x h(x) + 1/(2 scale) |x - point|^2.
using ProxFn = std::function<Vector(std::span<const double>, double)>;

struct SmoothPart {
  ValueFn value;
  GradientFn gradient;
};

struct NonsmoothPart {
  ExtendedValueFn value;
  ProxFn prox;
  // Optional. A deterministic element of the subdifferential on the domain;
  // only subgradient-type baselines need it.
  GradientFn subgradient;
  // True when the part is identically zero (some baselines require this).
  bool is_zero = false;
};

// phi(x) = smooth(x) + nonsmooth(x) with a lipschitz-continuous smooth
// gradient. All callables must be pure: the solvers call them from several
// threads when independent runs execute concurrently.
struct CompositeFunction {
  int dimension = 0;
  SmoothPart smooth;
  double lipschitz = 0.0;
  NonsmoothPart nonsmooth;
};

// The zero function on R^n as a nonsmooth part (prox is the identity).
NonsmoothPart ZeroNonsmoothPart();

// ---------------------------------------------------------------------------
// Oracle accounting
// ---------------------------------------------------------------------------

// Unit-operation counts: function evaluations (smooth or composite), gradient
// or subgradient evaluations, and proximal mapping calls.
struct OracleTally {
  int64_t fn_evals = 0;
  int64_t grad_evals = 0;
  int64_t prox_calls = 0;

  int64_t total() const { return fn_evals + grad_evals + prox_calls; }

  OracleTally& operator+=(const OracleTally& other) {
    fn_evals += other.fn_evals;
    grad_evals += other.grad_evals;
    prox_calls += other.prox_calls;
    return *this;
  }
  friend OracleTally operator+(OracleTally a, const OracleTally& b) {
    return a += b;
  }
  friend bool operator==(const OracleTally&, const OracleTally&) = default;
};

// Counted, dimension-checked access to a composite function. Every entry
// point validates |x| == fn.dimension and throws DimensionError otherwise.

// smooth(x) + nonsmooth(x); one fn_eval. Throws NumericDomainError when the
// smooth value is not finite.
ExtendedReal EvaluateComposite(const CompositeFunction& fn,
                               std::span<const double> x, OracleTally& tally);
// Smooth part only; one fn_eval.
double EvaluateSmooth(const CompositeFunction& fn, std::span<const double> x,
                      OracleTally& tally);
// One grad_eval. Throws NumericDomainError on a non-finite component.
Vector EvaluateGradient(const CompositeFunction& fn, std::span<const double> x,
                        OracleTally& tally);
// One prox_call.
Vector EvaluateProx(const CompositeFunction& fn, std::span<const double> point,
                    double scale, OracleTally& tally);
// A subgradient of the nonsmooth part; one grad_eval, none when the part is
// identically zero. Throws UnsupportedProblemError if no subgradient exists.
Vector EvaluateNonsmoothSubgradient(const CompositeFunction& fn,
                                    std::span<const double> x,
                                    OracleTally& tally);

// max_i |central difference_i - gradient_i| / (1 + |gradient_i|).
// Not counted against any tally (test support). Throws ParameterError when
// step <= 0.
double FiniteDifferenceCheck(const CompositeFunction& fn,
                             std::span<const double> x, double step);

void CheckDimension(std::span<const double> x, int dimension,
                    std::string_view where);

// ---------------------------------------------------------------------------
// Certificate
// ---------------------------------------------------------------------------

// Output of the bisection solver. At termination
//   upper_bound_u - lower_bound_l <= epsilon_f,
//   g(point) <= g_reference + epsilon_g / 2,
//   f(point) == upper_bound_u.
struct SolutionCertificate {
  Vector point;
  double upper_bound_u = 0.0;
  double lower_bound_l = 0.0;
  double g_reference = 0.0;
  double epsilon_f = 0.0;
  double epsilon_g = 0.0;
  OracleTally tally;
  int64_t bisection_rounds = 0;
  // u - l after the initial bounds; fixes the round-count certificate.
  double initial_width = 0.0;
  // Sum of FISTA iterations over every APG oracle call.
  int64_t inner_iterations = 0;
};

// ceil(log2(width / eps))_+ : the maximum number of bisection rounds.
int64_t MaxBisectionRounds(double width, double eps);

// Warnings go to stderr unless a sink is installed (the CLI silences them
// with --quiet, tests capture them).
using WarningSink = std::function<void(std::string_view)>;
void SetWarningSink(WarningSink sink);
void LogWarning(std::string_view message);

}  // namespace bisecbio

#endif  // BISECBIO_CORE_H_
