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

#include "oracles/projection_oracles.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bisecbio/data.h"
#include "bisecbio/prox.h"

namespace bisecbio::oracles {

namespace {

constexpr double kFeasibilitySlack = 1e-10;

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double L1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double L2Squared(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Per-support sums: k = |S|, a = sum |y_i|, b = sum y_i^2.
struct SupportSums {
  double k = 0.0;
  double a = 0.0;
  double b = 0.0;
};

SupportSums Sums(std::span<const double> y, uint32_t mask) {
  SupportSums s;
  for (size_t i = 0; i < y.size(); ++i) {
    if (mask & (1u << i)) {
      s.k += 1.0;
      s.a += std::abs(y[i]);
      s.b += y[i] * y[i];
    }
  }
  return s;
}

// x_i = (y_i - theta sign(y_i)) / (1 + mu) on the support, 0 elsewhere.
Vector Candidate(std::span<const double> y, uint32_t mask, double theta,
                 double mu) {
  Vector x(y.size(), 0.0);
  for (size_t i = 0; i < y.size(); ++i) {
    if (mask & (1u << i)) x[i] = (y[i] - theta * Sign(y[i])) / (1.0 + mu);
  }
  return x;
}

// Real roots of q2 t^2 + q1 t + q0 = 0 (the linear case included).
std::vector<double> Roots(double q2, double q1, double q0) {
  std::vector<double> out;
  if (q2 == 0.0) {
    if (q1 != 0.0) out.push_back(-q0 / q1);
    return out;
  }
  const double disc = q1 * q1 - 4.0 * q2 * q0;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  out.push_back((-q1 + sq) / (2.0 * q2));
  out.push_back((-q1 - sq) / (2.0 * q2));
  return out;
}

class Best {
 public:
  explicit Best(std::span<const double> y) : y_(y) {}
  void Offer(Vector x, bool feasible) {
    if (!feasible) return;
    for (double v : x) {
      if (!std::isfinite(v)) return;
    }
    const double d = SquaredDistance(x, y_);
    if (d < best_) {
      best_ = d;
      x_ = std::move(x);
    }
  }
  Vector Take() { return std::move(x_); }

 private:
  std::span<const double> y_;
  double best_ = std::numeric_limits<double>::infinity();
  Vector x_;
};

void CheckSize(std::span<const double> y) {
  if (y.size() > 16) throw ParameterError("enumeration oracle needs n <= 16");
}

}  // namespace

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Vector EnumerateL1Ball(std::span<const double> y, double lambda) {
  CheckSize(y);
  auto feasible = [&](const Vector& x) {
    return L1(x) <= lambda * (1.0 + kFeasibilitySlack);
  };
  Best best(y);
  Vector self(y.begin(), y.end());
  best.Offer(self, feasible(self));
  const uint32_t n = static_cast<uint32_t>(y.size());
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    const SupportSums s = Sums(y, mask);
    const double theta = s.k > 0.0 ? (s.a - lambda) / s.k : 0.0;
    Vector x = Candidate(y, mask, theta, 0.0);
    best.Offer(x, feasible(x));
  }
  return best.Take();
}

Vector EnumerateL1L2(std::span<const double> y, double lambda, double rho) {
  CheckSize(y);
  auto feasible = [&](const Vector& x) {
    return L1(x) <= lambda * (1.0 + kFeasibilitySlack) &&
           std::sqrt(L2Squared(x)) <= rho * (1.0 + kFeasibilitySlack);
  };
  Best best(y);
  Vector self(y.begin(), y.end());
  best.Offer(self, feasible(self));
  const double ny = std::sqrt(L2Squared(y));
  if (ny > 0.0) {
    Vector radial(y.begin(), y.end());
    for (double& v : radial) v *= rho / ny;
    best.Offer(radial, feasible(radial));
  }
  const uint32_t n = static_cast<uint32_t>(y.size());
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    const SupportSums s = Sums(y, mask);
    if (s.k == 0.0) {
      best.Offer(Vector(y.size(), 0.0), true);
      continue;
    }
    // l1 constraint alone.
    {
      Vector x = Candidate(y, mask, (s.a - lambda) / s.k, 0.0);
      best.Offer(x, feasible(x));
    }
    // Both tight: (a - k t)^2 rho^2 = lambda^2 (b - 2 a t + k t^2).
    const double q2 = rho * rho * s.k * s.k - lambda * lambda * s.k;
    const double q1 = -2.0 * s.a * s.k * rho * rho + 2.0 * s.a * lambda * lambda;
    const double q0 = rho * rho * s.a * s.a - lambda * lambda * s.b;
    for (double theta : Roots(q2, q1, q0)) {
      const double mu = (s.a - s.k * theta) / lambda - 1.0;
      Vector x = Candidate(y, mask, theta, mu);
      best.Offer(x, feasible(x));
    }
  }
  return best.Take();
}

Vector EnumerateElasticNet(std::span<const double> y, double alpha,
                           double level) {
  CheckSize(y);
  auto feasible = [&](const Vector& x) {
    return L1(x) + 0.5 * alpha * L2Squared(x) <=
           level * (1.0 + kFeasibilitySlack);
  };
  Best best(y);
  Vector self(y.begin(), y.end());
  best.Offer(self, feasible(self));
  best.Offer(Vector(y.size(), 0.0), true);
  const uint32_t n = static_cast<uint32_t>(y.size());
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    const SupportSums s = Sums(y, mask);
    // Tight constraint along x = soft(y, mu) / (1 + alpha mu):
    // (alpha k / 2 + L alpha^2) mu^2 + (k + 2 L alpha) mu
    //     + (L - a - alpha b / 2) = 0.
    const double q2 = 0.5 * alpha * s.k + level * alpha * alpha;
    const double q1 = s.k + 2.0 * level * alpha;
    const double q0 = level - s.a - 0.5 * alpha * s.b;
    for (double mu : Roots(q2, q1, q0)) {
      if (!(1.0 + alpha * mu > 0.0)) continue;
      Vector x = Candidate(y, mask, mu, alpha * mu);
      best.Offer(x, feasible(x));
    }
  }
  return best.Take();
}

Vector ClosedFormNonnegBall(std::span<const double> y, double c) {
  Vector x(y.size());
  double sq = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    x[i] = y[i] > 0.0 ? y[i] : 0.0;
    sq += x[i] * x[i];
  }
  const double radius = std::sqrt(2.0 * c);
  const double norm = std::sqrt(sq);
  if (norm > radius) {
    for (double& v : x) v = v * radius / norm;
  }
  return x;
}

bool SuiteResult::passed() const {
  for (const FamilyResult& f : families) {
    if (f.failures > 0) return false;
  }
  return true;
}

SuiteResult RunProxOracleSuite(int instances_per_family, uint64_t seed) {
  Rng rng(seed);
  auto random_y = [&]() {
    const int n = 1 + static_cast<int>(rng.Index(5));
    Vector y(n);
    for (double& v : y) v = 2.0 * rng.Normal();
    return y;
  };
  auto record = [](FamilyResult& f, double error, bool feasible) {
    ++f.instances;
    f.max_error = std::max(f.max_error, error);
    if (!(error <= f.tolerance) || !feasible) ++f.failures;
  };
  const double tol = 1e-6;

  FamilyResult l1{"l1-ball", 0, 0, 0.0, tol};
  FamilyResult l1l2{"l1-l2-intersection", 0, 0, 0.0, tol};
  FamilyResult enet{"elastic-net-level-set", 0, 0, 0.0, tol};
  FamilyResult nonneg{"nonneg-ball", 0, 0, 0.0, 1e-12};

  for (int t = 0; t < instances_per_family; ++t) {
    const Vector y = random_y();
    const double lambda = rng.Uniform(0.05, 4.0);
    const Vector x = ProjectL1Ball(y, lambda);
    const Vector o = EnumerateL1Ball(y, lambda);
    record(l1, std::abs(SquaredDistance(x, y) - SquaredDistance(o, y)),
           L1(x) <= lambda * (1.0 + 1e-9));
  }
  for (int t = 0; t < instances_per_family; ++t) {
    const Vector y = random_y();
    const double lambda = rng.Uniform(0.05, 4.0);
    const double rho = rng.Uniform(0.05, 4.0);
    const Vector x = ProjectL1L2Intersection(y, lambda, rho);
    const Vector o = EnumerateL1L2(y, lambda, rho);
    record(l1l2, std::abs(SquaredDistance(x, y) - SquaredDistance(o, y)),
           L1(x) <= lambda * (1.0 + 1e-9) &&
               std::sqrt(L2Squared(x)) <= rho * (1.0 + 1e-9));
  }
  for (int t = 0; t < instances_per_family; ++t) {
    const Vector y = random_y();
    const double alpha = rng.Uniform(0.01, 3.0);
    const double level = rng.Uniform(0.05, 4.0);
    const Vector x = ProjectElasticNetLevelSet(y, {alpha, level});
    const Vector o = EnumerateElasticNet(y, alpha, level);
    record(enet, std::abs(SquaredDistance(x, y) - SquaredDistance(o, y)),
           L1(x) + 0.5 * alpha * L2Squared(x) <= level * (1.0 + 1e-9));
  }
  for (int t = 0; t < instances_per_family; ++t) {
    const Vector y = random_y();
    const double c = rng.Uniform(0.01, 4.0);
    const Vector x = ProxNonnegThenBall(y, c);
    const Vector o = ClosedFormNonnegBall(y, c);
    double err = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      err = std::max(err, std::abs(x[i] - o[i]));
    }
    record(nonneg, err, x.size() == y.size());
  }
  return SuiteResult{{l1, l1l2, enet, nonneg}};
}

std::string FormatSuite(const SuiteResult& result) {
  std::string out;
  for (const FamilyResult& f : result.families) {
    char line[200];
    std::snprintf(line, sizeof(line),
                  "%s %-22s instances=%d failures=%d max_error=%.3e tol=%.0e\n",
                  f.failures == 0 ? "PASS" : "FAIL", f.family.c_str(),
                  f.instances, f.failures, f.max_error, f.tolerance);
    out += line;
  }
  return out;
}

}  // namespace bisecbio::oracles
