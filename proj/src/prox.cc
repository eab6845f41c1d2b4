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

#include "bisecbio/prox.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bisecbio/kernels.h"

namespace bisecbio {

namespace {

using kernels::Norm1;
using kernels::Norm2;

void RequirePositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(std::string(name) + " must be positive and finite");
  }
}

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Vector Scaled(std::span<const double> y, double factor) {
  Vector out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = factor * y[i];
  return out;
}

double ElasticNetValue(std::span<const double> x, double alpha) {
  return Norm1(x) + 0.5 * alpha * kernels::SquaredNorm(x);
}

Vector ElasticNetCandidate(std::span<const double> y, double mu,
                           double alpha) {
  Vector x = SoftThreshold(y, mu);
  const double shrink = 1.0 / (1.0 + alpha * mu);
  for (double& v : x) v *= shrink;
  return x;
}

// rho * z / |z| for z = SoftThreshold(y, theta); zero when z vanishes.
Vector IntersectionCandidate(std::span<const double> y, double theta,
                             double rho) {
  Vector z = SoftThreshold(y, theta);
  const double norm = Norm2(z);
  if (norm == 0.0) return z;
  for (double& v : z) v *= rho / norm;
  return z;
}

// Threshold theta with |SoftThreshold(y, theta)|_1 = lambda, for |y|_1 > lambda.
double L1BallThreshold(std::span<const double> y, double lambda) {
  std::vector<double> mags(y.size());
  for (size_t i = 0; i < y.size(); ++i) mags[i] = std::abs(y[i]);
  std::stable_sort(mags.begin(), mags.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (size_t j = 0; j < mags.size(); ++j) {
    cumulative += mags[j];
    const double candidate = (cumulative - lambda) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
  }
  return std::max(theta, 0.0);
}

}  // namespace

Vector SoftThreshold(std::span<const double> y, double threshold) {
  Vector out(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    out[i] = Sign(y[i]) * std::max(std::abs(y[i]) - threshold, 0.0);
  }
  return out;
}

Vector ProjectL2Ball(std::span<const double> y, double radius) {
  RequirePositive(radius, "l2-ball radius");
  const double norm = Norm2(y);
  if (norm <= radius) return Vector(y.begin(), y.end());
  return Scaled(y, radius / norm);
}

Vector ProjectL1Ball(std::span<const double> y, double lambda) {
  RequirePositive(lambda, "l1-ball radius");
  if (Norm1(y) <= lambda) return Vector(y.begin(), y.end());
  Vector x = SoftThreshold(y, L1BallThreshold(y, lambda));
  // The threshold comes from a cumulative sum and can land a few ulps of
  // that sum outside the ball; pull it back so |x|_1 <= lambda as computed.
  for (double s = Norm1(x); s > lambda; s = Norm1(x)) {
    const double factor = std::nextafter(lambda / s, 0.0);
    for (double& v : x) v *= factor;
  }
  return x;
}

Vector ProjectBall(std::span<const double> y, const BallSpec& spec) {
  return spec.norm_kind == NormKind::kL1 ? ProjectL1Ball(y, spec.radius)
                                         : ProjectL2Ball(y, spec.radius);
}

Vector ProxNonnegThenBall(std::span<const double> y, double c) {
  RequirePositive(c, "level c");
  Vector p(y.size());
  for (size_t i = 0; i < y.size(); ++i) p[i] = std::max(y[i], 0.0);
  const double radius = std::sqrt(2.0 * c);
  const double factor = radius / std::max(Norm2(p), radius);
  for (double& v : p) v *= factor;
  return p;
}

Vector ProjectL1L2Intersection(std::span<const double> y, double lambda,
                               double rho) {
  RequirePositive(lambda, "l1-ball radius");
  RequirePositive(rho, "l2-ball radius");

  Vector via_l2 = ProjectL2Ball(y, rho);
  if (Norm1(via_l2) <= lambda) return via_l2;
  const double theta_l1 = L1BallThreshold(y, lambda);
  Vector via_l1 = SoftThreshold(y, theta_l1);
  if (Norm2(via_l1) <= rho) return via_l1;

  // Both constraints active. psi(theta) = |z|_1/|z|_2 is non-increasing, above
  // lambda/rho at 0 and below it at theta_l1; hi always stays l1-feasible.
  const double target = lambda / rho;
  auto psi = [&](double theta) {
    const Vector z = SoftThreshold(y, theta);
    const double n2 = Norm2(z);
    return n2 == 0.0 ? 0.0 : Norm1(z) / n2;
  };
  double lo = 0.0;
  double hi = theta_l1;
  for (int step = 0; step < kMaxMultiplierHalvings; ++step) {
    const double residual = target - psi(hi);
    if (residual * rho < kMultiplierResidualTolerance) {
      return IntersectionCandidate(y, hi, rho);
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return IntersectionCandidate(y, hi, rho);
    if (psi(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw ConvergenceError("l1/l2 intersection: multiplier search did not converge",
                         IntersectionCandidate(y, hi, rho));
}

Vector ProjectElasticNetLevelSet(std::span<const double> y,
                                 const ElasticNetSpec& spec) {
  RequirePositive(spec.alpha, "elastic-net alpha");
  RequirePositive(spec.level, "elastic-net level");
  if (ElasticNetValue(y, spec.alpha) <= spec.level) {
    return Vector(y.begin(), y.end());
  }
  double lo = 0.0;
  double hi = kernels::NormInf(y);
  Vector x = ElasticNetCandidate(y, hi, spec.alpha);
  for (int step = 0; step < kMaxMultiplierHalvings; ++step) {
    x = ElasticNetCandidate(y, hi, spec.alpha);
    if (spec.level - ElasticNetValue(x, spec.alpha) <
        kMultiplierResidualTolerance) {
      return x;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return x;
    if (ElasticNetValue(ElasticNetCandidate(y, mid, spec.alpha), spec.alpha) >
        spec.level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw ConvergenceError("elastic-net projection: multiplier search did not "
                         "converge",
                         ElasticNetCandidate(y, hi, spec.alpha));
}

NonsmoothPart L1NormPart(double weight) {
  if (!(weight >= 0.0)) throw ParameterError("l1 weight must be >= 0");
  NonsmoothPart part;
  part.value = [weight](std::span<const double> x) {
    return ExtendedReal(weight * Norm1(x));
  };
  part.prox = [weight](std::span<const double> y, double scale) {
    return SoftThreshold(y, weight * scale);
  };
  part.subgradient = [weight](std::span<const double> x) {
    Vector s(x.size());
    for (size_t i = 0; i < x.size(); ++i) s[i] = weight * Sign(x[i]);
    return s;
  };
  part.is_zero = weight == 0.0;
  return part;
}

NonsmoothPart L1BallIndicatorPart(double lambda) {
  RequirePositive(lambda, "l1-ball radius");
  NonsmoothPart part;
  part.value = [lambda](std::span<const double> x) {
    return Norm1(x) <= lambda + kFeasibilityTolerance ? ExtendedReal(0.0)
                                                      : ExtendedReal::Infinity();
  };
  part.prox = [lambda](std::span<const double> y, double) {
    return ProjectL1Ball(y, lambda);
  };
  part.subgradient = [](std::span<const double> x) {
    return Vector(x.size(), 0.0);
  };
  return part;
}

NonsmoothPart L2BallIndicatorPart(double radius) {
  RequirePositive(radius, "l2-ball radius");
  NonsmoothPart part;
  part.value = [radius](std::span<const double> x) {
    return Norm2(x) <= radius + kFeasibilityTolerance ? ExtendedReal(0.0)
                                                      : ExtendedReal::Infinity();
  };
  part.prox = [radius](std::span<const double> y, double) {
    return ProjectL2Ball(y, radius);
  };
  part.subgradient = [](std::span<const double> x) {
    return Vector(x.size(), 0.0);
  };
  return part;
}

NonsmoothPart NonnegIndicatorPart() {
  NonsmoothPart part;
  part.value = [](std::span<const double> x) {
    for (double v : x) {
      if (v < -kFeasibilityTolerance) return ExtendedReal::Infinity();
    }
    return ExtendedReal(0.0);
  };
  part.prox = [](std::span<const double> y, double) {
    Vector out(y.size());
    for (size_t i = 0; i < y.size(); ++i) out[i] = std::max(y[i], 0.0);
    return out;
  };
  part.subgradient = [](std::span<const double> x) {
    return Vector(x.size(), 0.0);
  };
  return part;
}

std::string_view LevelSetKindName(LevelSetKind kind) {
  switch (kind) {
    case LevelSetKind::kMnpFree:
      return "mnp-free";
    case LevelSetKind::kMnpNonneg:
      return "mnp-nonneg";
    case LevelSetKind::kMnpL1Ball:
      return "mnp-l1ball";
    case LevelSetKind::kLrpL1Ball:
      return "lrp-l1ball";
    case LevelSetKind::kSspElasticNet:
      return "ssp-elasticnet";
    case LevelSetKind::kToy:
      return "toy";
  }
  throw InternalLogicError("unknown level-set kind");
}

LevelSetKind ParseLevelSetKind(std::string_view name) {
  for (LevelSetKind kind :
       {LevelSetKind::kMnpFree, LevelSetKind::kMnpNonneg,
        LevelSetKind::kMnpL1Ball, LevelSetKind::kLrpL1Ball,
        LevelSetKind::kSspElasticNet, LevelSetKind::kToy}) {
    if (LevelSetKindName(kind) == name) return kind;
  }
  throw ParameterError("unknown problem kind: " + std::string(name));
}

ProxFn MakeLevelSetProx(LevelSetKind kind, const LevelSetParams& params,
                        double c) {
  if (std::isnan(c)) throw ParameterError("level c is NaN");
  if (c < 0.0) {
    throw EmptyLevelSetError("level set {f <= c} is empty for c < 0");
  }
  if (c == 0.0) {
    return [](std::span<const double> y, double) {
      return Vector(y.size(), 0.0);
    };
  }
  // Pull the level in by a few ulps so that f evaluated at the projection
  // (in a different summation order) still comes out <= c.
  c -= kLevelSetShrink * c;
  switch (kind) {
    case LevelSetKind::kMnpFree: {
      const double radius = std::sqrt(2.0 * c);
      return [radius](std::span<const double> y, double) {
        return ProjectL2Ball(y, radius);
      };
    }
    case LevelSetKind::kMnpNonneg:
      return [c](std::span<const double> y, double) {
        return ProxNonnegThenBall(y, c);
      };
    case LevelSetKind::kMnpL1Ball:
    case LevelSetKind::kLrpL1Ball: {
      RequirePositive(params.lambda, "l1-ball radius");
      const double lambda = params.lambda;
      const double rho = std::sqrt(2.0 * c);
      return [lambda, rho](std::span<const double> y, double) {
        return ProjectL1L2Intersection(y, lambda, rho);
      };
    }
    case LevelSetKind::kSspElasticNet: {
      const ElasticNetSpec spec{params.alpha, c};
      RequirePositive(spec.alpha, "elastic-net alpha");
      return [spec](std::span<const double> y, double) {
        return ProjectElasticNetLevelSet(y, spec);
      };
    }
    case LevelSetKind::kToy:
      return [c](std::span<const double> y, double) {
        return ProjectL1Ball(y, c);
      };
  }
  throw InternalLogicError("unknown level-set kind");
}

}  // namespace bisecbio
