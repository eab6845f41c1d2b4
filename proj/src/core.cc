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

#include "bisecbio/core.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <mutex>

namespace bisecbio {

ExtendedReal::ExtendedReal(double value) : value_(value), infinite_(false) {
  if (std::isnan(value) || value == -std::numeric_limits<double>::infinity()) {
    throw NumericDomainError("extended real cannot hold NaN or -inf");
  }
  if (std::isinf(value)) {
    value_ = 0.0;
    infinite_ = true;
  }
}

double ExtendedReal::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
  if (a.infinite_ || b.infinite_) return ExtendedReal::Infinity();
  return ExtendedReal(a.value_ + b.value_);
}

bool operator==(ExtendedReal a, ExtendedReal b) {
  if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
  return a.value_ == b.value_;
}

bool operator<(ExtendedReal a, ExtendedReal b) {
  if (a.infinite_) return false;
  if (b.infinite_) return true;
  return a.value_ < b.value_;
}

std::string ToString(ExtendedReal x) {
  if (!x.is_finite()) return "+inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x.value());
  return buf;
}

NonsmoothPart ZeroNonsmoothPart() {
  NonsmoothPart part;
  part.value = [](std::span<const double>) { return ExtendedReal(0.0); };
  part.prox = [](std::span<const double> y, double) {
    return Vector(y.begin(), y.end());
  };
  part.subgradient = [](std::span<const double> x) {
    return Vector(x.size(), 0.0);
  };
  part.is_zero = true;
  return part;
}

void CheckDimension(std::span<const double> x, int dimension,
                    std::string_view where) {
  if (static_cast<int64_t>(x.size()) != dimension) {
    throw DimensionError(std::string(where) + ": expected dimension " +
                         std::to_string(dimension) + ", got " +
                         std::to_string(x.size()));
  }
}

namespace {

double CheckedSmoothValue(const CompositeFunction& fn,
                          std::span<const double> x) {
  const double value = fn.smooth.value(x);
  if (!std::isfinite(value)) {
    throw NumericDomainError("smooth part is not finite at the given point");
  }
  return value;
}

}  // namespace

ExtendedReal EvaluateComposite(const CompositeFunction& fn,
                               std::span<const double> x, OracleTally& tally) {
  CheckDimension(x, fn.dimension, "EvaluateComposite");
  ++tally.fn_evals;
  const double smooth = CheckedSmoothValue(fn, x);
  return ExtendedReal(smooth) + fn.nonsmooth.value(x);
}

double EvaluateSmooth(const CompositeFunction& fn, std::span<const double> x,
                      OracleTally& tally) {
  CheckDimension(x, fn.dimension, "EvaluateSmooth");
  ++tally.fn_evals;
  return CheckedSmoothValue(fn, x);
}

Vector EvaluateGradient(const CompositeFunction& fn, std::span<const double> x,
                        OracleTally& tally) {
  CheckDimension(x, fn.dimension, "EvaluateGradient");
  ++tally.grad_evals;
  Vector grad = fn.smooth.gradient(x);
  if (static_cast<int>(grad.size()) != fn.dimension) {
    throw DimensionError("gradient callable returned the wrong dimension");
  }
  for (double v : grad) {
    if (!std::isfinite(v)) {
      throw NumericDomainError("gradient is not finite at the given point");
    }
  }
  return grad;
}

Vector EvaluateProx(const CompositeFunction& fn, std::span<const double> point,
                    double scale, OracleTally& tally) {
  CheckDimension(point, fn.dimension, "EvaluateProx");
  if (!(scale > 0.0)) throw ParameterError("prox scale must be positive");
  ++tally.prox_calls;
  return fn.nonsmooth.prox(point, scale);
}

Vector EvaluateNonsmoothSubgradient(const CompositeFunction& fn,
                                    std::span<const double> x,
                                    OracleTally& tally) {
  CheckDimension(x, fn.dimension, "EvaluateNonsmoothSubgradient");
  if (fn.nonsmooth.is_zero) return Vector(x.size(), 0.0);
  if (!fn.nonsmooth.subgradient) {
    throw UnsupportedProblemError("nonsmooth part has no subgradient oracle");
  }
  ++tally.grad_evals;
  Vector sub = fn.nonsmooth.subgradient(x);
  if (static_cast<int>(sub.size()) != fn.dimension) {
    throw DimensionError("subgradient callable returned the wrong dimension");
  }
  return sub;
}

double FiniteDifferenceCheck(const CompositeFunction& fn,
                             std::span<const double> x, double step) {
  CheckDimension(x, fn.dimension, "FiniteDifferenceCheck");
  if (!(step > 0.0)) throw ParameterError("finite-difference step must be > 0");
  const Vector grad = fn.smooth.gradient(x);
  Vector probe(x.begin(), x.end());
  double worst = 0.0;
  for (int i = 0; i < fn.dimension; ++i) {
    const double saved = probe[i];
    probe[i] = saved + step;
    const double forward = fn.smooth.value(probe);
    probe[i] = saved - step;
    const double backward = fn.smooth.value(probe);
    probe[i] = saved;
    const double central = (forward - backward) / (2.0 * step);
    worst = std::max(worst,
                     std::abs(central - grad[i]) / (1.0 + std::abs(grad[i])));
  }
  return worst;
}

int64_t MaxBisectionRounds(double width, double eps) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  int64_t rounds = 0;
  // Halving is exact in binary floating point.
  while (width > eps) {
    width *= 0.5;
    ++rounds;
  }
  return rounds;
}

namespace {

std::mutex& SinkMutex() {
  static std::mutex mutex;
  return mutex;
}

WarningSink& Sink() {
  static WarningSink sink;
  return sink;
}

}  // namespace

void SetWarningSink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  Sink() = std::move(sink);
}

void LogWarning(std::string_view message) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  if (Sink()) {
    Sink()(message);
  } else {
    std::cerr << "WARNING: " << message << "\n";
  }
}

}  // namespace bisecbio
