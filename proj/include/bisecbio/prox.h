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

// Proximal mappings and Euclidean projections used by the bilevel problem
// families: l2 and l1 balls, the nonnegative orthant intersected with an l2
// ball, the intersection of an l1 and an l2 ball, and elastic-net level sets.
// All functions are pure.

#ifndef BISECBIO_PROX_H_
#define BISECBIO_PROX_H_

#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "bisecbio/core.h"

namespace bisecbio {

enum class NormKind { kL1, kL2 };

struct BallSpec {
  double radius = 1.0;
  NormKind norm_kind = NormKind::kL2;
};

// The set {x : |x|_1 + (alpha/2)|x|^2 <= level}.
struct ElasticNetSpec {
  double alpha = 1.0;
  double level = 1.0;
};

// Budget shared by the scalar root finders below.
inline constexpr int kMaxMultiplierHalvings = 200;
inline constexpr double kMultiplierResidualTolerance = 1e-10;

// sign(y_i) * max(|y_i| - threshold, 0).
Vector SoftThreshold(std::span<const double> y, double threshold);

Vector ProjectL2Ball(std::span<const double> y, double radius);
// Sort-based exact threshold search; ties are broken by a stable sort.
Vector ProjectL1Ball(std::span<const double> y, double lambda);
Vector ProjectBall(std::span<const double> y, const BallSpec& spec);

// sqrt(2c) / max(|P(y)|, sqrt(2c)) * P(y) with P(y) = max(y, 0): the exact
// projection onto {x >= 0, |x| <= sqrt(2c)}.
Vector ProxNonnegThenBall(std::span<const double> y, double c);

// Projection onto {|x|_1 <= lambda} intersected with {|x|_2 <= rho}. When
// neither single-ball projection lands in the other ball, both constraints
// are active and x = rho * z / |z| with z = SoftThreshold(y, theta); theta is
// found by bisection on |z|_1 / |z|_2 = lambda / rho. Throws
// ConvergenceError (carrying the last feasible iterate) if the bracket does
// not close within kMaxMultiplierHalvings steps.
Vector ProjectL1L2Intersection(std::span<const double> y, double lambda,
                               double rho);

// Projection onto an elastic-net level set. Off the set the solution is
// SoftThreshold(y, mu) / (1 + alpha mu) for the multiplier mu > 0 where the
// constraint is tight; mu is bisected on [0, max |y_i|] and the feasible end
// of the bracket is returned.
Vector ProjectElasticNetLevelSet(std::span<const double> y,
                                 const ElasticNetSpec& spec);

// ---------------------------------------------------------------------------
// Nonsmooth parts
// ---------------------------------------------------------------------------

// weight * |x|_1. Its subgradient at 0 is 0.
NonsmoothPart L1NormPart(double weight);
// Indicator of {|x|_1 <= lambda}.
NonsmoothPart L1BallIndicatorPart(double lambda);
// Indicator of {|x|_2 <= radius}.
NonsmoothPart L2BallIndicatorPart(double radius);
// Indicator of the nonnegative orthant.
NonsmoothPart NonnegIndicatorPart();

// ---------------------------------------------------------------------------
// Level-set proximal families h_c = g2 + indicator{f <= c}
// ---------------------------------------------------------------------------

enum class LevelSetKind {
  kMnpFree,        // f = |x|^2/2, g2 = 0
  kMnpNonneg,      // f = |x|^2/2, g2 = indicator{x >= 0}
  kMnpL1Ball,      // f = |x|^2/2, g2 = indicator{|x|_1 <= lambda}
  kLrpL1Ball,      // same sets as kMnpL1Ball, logistic lower level
  kSspElasticNet,  // f = |x|_1 + (alpha/2)|x|^2, g2 = 0
  kToy,            // f = |x|_1, g2 = 0
};

struct LevelSetParams {
  double lambda = 1.0;  // l1-ball radius of g2
  double alpha = 1.0;   // elastic-net quadratic weight of f
};

std::string_view LevelSetKindName(LevelSetKind kind);
// Accepts the names used in configuration files ("mnp-free", ...).
LevelSetKind ParseLevelSetKind(std::string_view name);

// Relative amount by which MakeLevelSetProx shrinks the level c.
inline constexpr double kLevelSetShrink =
    16 * std::numeric_limits<double>::epsilon();

// The prox of h_c. The scale argument is ignored since h_c is an indicator.
// c == 0 gives the single point {0}. Throws EmptyLevelSetError for c < 0.
// Projects onto {f <= c (1 - kLevelSetShrink)}.
ProxFn MakeLevelSetProx(LevelSetKind kind, const LevelSetParams& params,
                        double c);

}  // namespace bisecbio

#endif  // BISECBIO_PROX_H_
