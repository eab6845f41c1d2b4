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

// Reference projections for small dimensions. Each one enumerates every
// support pattern, solves the KKT system of that pattern in closed form and
// keeps the feasible candidate closest to y. Exponential in n; n <= 16.

#ifndef BISECBIO_TESTS_ORACLES_PROJECTION_ORACLES_H_
#define BISECBIO_TESTS_ORACLES_PROJECTION_ORACLES_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bisecbio/core.h"

namespace bisecbio::oracles {

double SquaredDistance(std::span<const double> a, std::span<const double> b);

Vector EnumerateL1Ball(std::span<const double> y, double lambda);
Vector EnumerateL1L2(std::span<const double> y, double lambda, double rho);
Vector EnumerateElasticNet(std::span<const double> y, double alpha,
                           double level);
// Componentwise max(y, 0), then a radial rescale onto radius sqrt(2c).
Vector ClosedFormNonnegBall(std::span<const double> y, double c);

struct FamilyResult {
  std::string family;
  int instances = 0;
  int failures = 0;
  // max |dist^2(library) - dist^2(oracle)|, or max |x - x_oracle| for the
  // closed-form family.
  double max_error = 0.0;
  double tolerance = 0.0;
};

struct SuiteResult {
  std::vector<FamilyResult> families;
  bool passed() const;
};

// Random instances with 1 <= n <= 5 for each family.
SuiteResult RunProxOracleSuite(int instances_per_family, uint64_t seed);
std::string FormatSuite(const SuiteResult& result);

}  // namespace bisecbio::oracles

#endif  // BISECBIO_TESTS_ORACLES_PROJECTION_ORACLES_H_
