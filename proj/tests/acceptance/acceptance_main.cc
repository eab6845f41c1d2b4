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

// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero
// when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bisecbio/apg.h"
#include "bisecbio/bilevel.h"
#include "bisecbio/core.h"
#include "bisecbio/data.h"
#include "bisecbio/experiment.h"
#include "bisecbio/kernels.h"
#include "bisecbio/problems.h"
#include "bisecbio/prox.h"
#include "oracles/projection_oracles.h"

namespace bisecbio {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

double Value(const CompositeFunction& phi, std::span<const double> x) {
  OracleTally scratch;
  return EvaluateComposite(phi, x, scratch).value();
}

ExperimentConfig LoadShippedConfig(const std::string& name) {
  const fs::path root(BISECBIO_SOURCE_DIR);
  ExperimentConfig c = LoadExperimentConfig((root / "configs" / name).string());
  if (!c.data.empty() && fs::path(c.data).is_relative()) {
    c.data = (root / c.data).string();
  }
  c.out = (fs::temp_directory_path() / "bisecbio_acceptance" / name).string();
  c.plot = false;
  return c;
}

BisectionConfig PracticalConfig() {
  BisectionConfig c;
  c.apg.mode = FistaMode::kGreedy;
  c.apg.residual_stop = 1e-10;
  return c;
}

Outcome ToyEndToEnd() {
  const ExperimentConfig config = LoadShippedConfig("toy.json");
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult r = RunExperiment(config);
  const double secs = Seconds(start);
  const BilevelProblem toy = MakeToyProblem();
  const Vector& x = r.runs.at(0).point;
  const double f = Value(toy.upper, x);
  const double g = Value(toy.lower, x);
  Outcome o;
  o.passed = std::abs(f - 1.0) <= 1e-5 && g <= 1e-6 && secs < 1.0;
  o.detail = Fmt("f=%.9f |f-1|=%.3e (<=1e-5) g=%.3e (<=1e-6) time=%.3fs",
                 f, std::abs(f - 1.0), g, secs);
  return o;
}

Outcome MnpGroundTruth() {
  Outcome o{true, ""};
  const double eps_f = 1e-5, eps_g = 1e-6;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const SynthMnp synth = SynthesizeMnp(20, 50, 10, seed);
    const BilevelProblem p =
        MakeProblem({LevelSetKind::kMnpFree, {}}, synth.design);
    const auto start = std::chrono::steady_clock::now();
    const SolutionCertificate cert = BisectionSolve(
        p, eps_f, eps_g, Vector(50, 0.0), PracticalConfig());
    const double secs = Seconds(start);

    // g - g* = |A d|^2 / 2 >= (sigma_min^2 / 2) dist^2: Hoelder with r = 2.
    const kernels::DenseMatrix a = synth.design.ToDense();
    double sigma2 = 0.0;
    for (double v : JacobiEigen(kernels::Gram(a)).values) {
      if (v > 1e-10) {
        sigma2 = v;
        break;
      }
    }
    HolderDiagnostics diag;
    diag.holder_alpha = sigma2;
    diag.holder_r = 2.0;
    diag.b_f1 = kernels::Norm2(cert.point) + std::sqrt(2.0 * eps_g / sigma2);
    diag.b_f = diag.b_f1;
    const double slack = std::abs(HolderLowerBound(diag, eps_g));

    const double gap = Value(p.upper, cert.point) - synth.p_star;
    const double g = Value(p.lower, cert.point);
    const bool ok =
        gap >= -(eps_f + slack) && gap <= eps_f && g <= eps_g && secs < 10.0;
    o.passed = o.passed && ok;
    o.detail += Fmt("[seed %d f-p*=%.3e in [-%.3e, 1e-5] g=%.2e %.2fs%s] ",
                    static_cast<int>(seed), gap, eps_f + slack, g, secs,
                    ok ? "" : " FAIL");
  }
  return o;
}

Outcome CertificateStructure() {
  const LevelSetKind kinds[] = {LevelSetKind::kMnpFree,
                                LevelSetKind::kMnpNonneg,
                                LevelSetKind::kMnpL1Ball,
                                LevelSetKind::kSspElasticNet,
                                LevelSetKind::kLrpL1Ball};
  Rng rng(2024);
  int instances = 0, violations = 0;
  int64_t total_rounds = 0;
  std::string failures;
  for (int t = 0; t < 25; ++t) {
    const int m = 5 + static_cast<int>(rng.Index(15));
    const int n = 3 + static_cast<int>(rng.Index(15));
    kernels::DenseMatrix a(m, n);
    Vector b(m);
    const LevelSetKind kind = kinds[t % 5];
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = rng.Normal();
      b[i] = kind == LevelSetKind::kLrpL1Ball ? (rng.Uniform() < 0.5 ? -1.0 : 1.0)
                                              : rng.Normal();
    }
    ProblemSpec spec;
    spec.kind = kind;
    spec.params = {rng.Uniform(0.5, 3.0), rng.Uniform(0.05, 1.0)};
    const BilevelProblem p = MakeProblem(spec, a, b);
    const double eps_f = std::pow(10.0, -rng.Uniform(2.0, 5.0));
    const double eps_g = std::pow(10.0, -rng.Uniform(3.0, 6.0));

    BisectionState state;
    double l0 = 0.0, u0 = 0.0;
    BisectionConfig config = PracticalConfig();
    config.observer = [&](const BisectionEvent& e) {
      if (e.stage == BisectionEvent::Stage::kInitialBounds) {
        l0 = e.l;
        u0 = e.u;
      }
    };
    const SolutionCertificate cert =
        BisectionSolve(p, eps_f, eps_g, Vector(n, 0.0), config, &state);
    ++instances;
    total_rounds += cert.bisection_rounds;

    std::string why;
    if (!(cert.upper_bound_u - cert.lower_bound_l <= eps_f)) why += " width";
    if (cert.bisection_rounds > MaxBisectionRounds(u0 - l0, eps_f)) {
      why += " rounds";
    }
    double l = l0, u = u0;
    for (const RoundLog& r : state.rounds) {
      if (!(r.l_after >= l && r.u_after <= u)) why += " monotone";
      // The midpoint is rounded, so the width can only halve to ulp(c).
      const double ulp = 4 * std::numeric_limits<double>::epsilon() *
                         std::abs(r.c);
      const bool split = r.c == 0.5 * (l + u) &&
                         (r.condition_fired
                              ? r.l_after == r.c && r.u_after == u
                              : r.l_after == l && r.u_after <= r.c);
      if (!split || !(r.u_after - r.l_after <= 0.5 * (u - l) + ulp)) {
        why += Fmt(" halving(l=%.17g u=%.17g c=%.17g fired=%d l'=%.17g "
                   "u'=%.17g)",
                   l, u, r.c, int(r.condition_fired), r.l_after, r.u_after);
      }
      l = r.l_after;
      u = r.u_after;
    }
    const VerificationReport report =
        VerifyCertificate(p, cert, std::nullopt, std::nullopt);
    if (!report.passed) why += " verify:" + report.FailureSummary();
    if (!why.empty()) {
      ++violations;
      failures += Fmt(" [#%d %s:", t, std::string(LevelSetKindName(kind)).c_str()) +
                  why + "]";
    }
  }
  return {violations == 0 && instances >= 20,
          Fmt("instances=%d violations=%d rounds=%lld", instances, violations,
              static_cast<long long>(total_rounds)) +
              failures};
}

Outcome FistaRate() {
  Rng rng(31);
  int violations = 0, checks = 0;
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + static_cast<int>(rng.Index(20));
    Vector a(n);
    for (double& v : a) v = 3.0 * rng.Normal();
    Vector x0(n);
    for (double& v : x0) v = 3.0 * rng.Normal();
    const double radius = kernels::Distance(x0, a);
    CompositeFunction phi;
    phi.dimension = n;
    phi.lipschitz = 1.0;
    phi.smooth.value = [a](std::span<const double> x) {
      return 0.5 * kernels::SquaredNorm(kernels::Subtract(x, a));
    };
    phi.smooth.gradient = [a](std::span<const double> x) {
      return kernels::Subtract(x, a);
    };
    phi.nonsmooth = ZeroNonsmoothPart();

    for (FistaMode mode : {FistaMode::kConstant, FistaMode::kBacktracking}) {
      const double alpha = mode == FistaMode::kConstant ? 1.0 : 2.0;
      FistaConfig config;
      config.mode = mode;
      config.eta = 2.0;
      config.l0 = rng.Uniform(0.01, 1.0);
      config.radius_bound = radius;
      config.max_iters = 200;
      config.warn_on_cap = false;
      FistaSolve(phi, x0, 1e-12, config, [&](const FistaIterate& it) {
        const double bound = 2.0 * alpha * 1.0 * radius * radius /
                             static_cast<double>((it.k + 1) * (it.k + 1));
        ++checks;
        if (Value(phi, it.x) > bound) ++violations;
      });
    }
  }
  return {violations == 0 && checks == 10 * 2 * 200,
          Fmt("checks=%d violations=%d", checks, violations)};
}

Outcome ProjectionOracles() {
  const oracles::SuiteResult suite = oracles::RunProxOracleSuite(100, 17);
  std::string detail;
  for (const auto& f : suite.families) {
    detail += Fmt("[%s n=%d fail=%d max_err=%.2e tol=%.0e] ", f.family.c_str(),
                  f.instances, f.failures, f.max_error, f.tolerance);
  }
  return {suite.passed(), detail};
}

Outcome ComplexityScaling() {
  const SynthMnp synth = SynthesizeMnp(10, 20, 4, 7);
  const BilevelProblem p =
      MakeProblem({LevelSetKind::kMnpFree, {}}, synth.design);
  const double eps[] = {1e-2, 1e-3, 1e-4};
  double scaled[3];
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    BisectionConfig config;
    config.apg.mode = FistaMode::kConstant;
    const SolutionCertificate cert =
        BisectionSolve(p, eps[i], eps[i] / 10.0, Vector(20, 0.0), config);
    scaled[i] = static_cast<double>(cert.inner_iterations) /
                std::log(1.0 / eps[i]);
    detail += Fmt("T(%.0e)=%lld ", eps[i],
                  static_cast<long long>(cert.inner_iterations));
  }
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double slope =
          std::log(scaled[j] / scaled[i]) / std::log(eps[i] / eps[j]);
      worst = std::max(worst, slope);
    }
  }
  detail += Fmt("max slope of T/ln(1/eps)=%.3f (<=0.6)", worst);
  return {worst <= 0.6, detail};
}

Outcome DiagnosticIdentities() {
  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    HolderDiagnostics d;
    d.holder_alpha = rng.Uniform(0.01, 10.0);
    d.holder_r = rng.Uniform(1.0, 4.0);
    d.b_f = rng.Uniform(0.1, 10.0);
    const double eps_f = std::pow(10.0, -rng.Uniform(1.0, 8.0));
    const double lb = HolderLowerBound(d, EpsGForFGap(d, eps_f, d.holder_r));
    worst = std::max(worst, std::abs(lb + eps_f) / eps_f);
  }
  const double eps_g = 1e-6;
  const double v = ValueFnLowerBound({1.0 / std::sqrt(eps_g), 1.0,
                                      ToyValueFunction(eps_g)},
                                     eps_g);
  const double v_err = std::abs(v + std::sqrt(eps_g)) / std::sqrt(eps_g);
  const double v0 = ToyValueFunction(0.0);
  return {worst <= 1e-15 && v_err <= 1e-15 && v0 == 1.0,
          Fmt("holder rel err=%.2e value-fn rel err=%.2e v(0)=%.17g", worst,
              v_err, v0)};
}

// Bisec-BiO wins against a baseline when its calls at termination are
// strictly fewer than the baseline's first-hit calls, or when the baseline
// never meets both targets after spending at least as many calls.
Outcome Ordering() {
  Outcome o{true, ""};
  for (const char* name : {"mnp-free.json", "lrp-l1ball.json"}) {
    const ExperimentResult r = RunExperiment(LoadShippedConfig(name));
    const SolverRun* bisec = nullptr;
    for (const SolverRun& run : r.runs) {
      if (run.solver == SolverId::kBisecBio) bisec = &run;
    }
    o.detail += Fmt("[%s", name);
    if (bisec == nullptr || !bisec->calls_at_targets.has_value()) {
      o.passed = false;
      o.detail += " bisec-bio missed targets]";
      continue;
    }
    const int64_t ours = *bisec->calls_at_targets;
    o.detail += Fmt(" bisec-bio=%lld", static_cast<long long>(ours));
    for (const SolverRun& run : r.runs) {
      if (run.solver == SolverId::kBisecBio) continue;
      const std::string solver(SolverName(run.solver));
      bool win;
      if (run.calls_at_targets.has_value()) {
        win = ours < *run.calls_at_targets;
        o.detail += Fmt(" %s=%lld", solver.c_str(),
                        static_cast<long long>(*run.calls_at_targets));
      } else {
        win = run.tally.total() >= ours;
        o.detail += Fmt(" %s=miss@%lld(f_gap=%.1e,g_gap=%.1e)", solver.c_str(),
                        static_cast<long long>(run.tally.total()), run.f_gap,
                        run.g_gap);
      }
      o.passed = o.passed && win;
    }
    o.detail += "]";
  }
  return o;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Outcome Determinism() {
  const fs::path root(BISECBIO_SOURCE_DIR);
  const fs::path work = fs::temp_directory_path() / "bisecbio_determinism";
  fs::remove_all(work);
  const std::string config = (root / "configs" / "mnp-free.json").string();
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + BISECBIO_CLI_PATH +
                            "\" -q bench --config \"" + config +
                            "\" --seed 11 --out \"" + (work / run).string() +
                            "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      return {false, "bench exited nonzero: " + cmd};
    }
  }
  int files = 0;
  for (const auto& entry : fs::directory_iterator(work / "a")) {
    const std::string file = entry.path().filename().string();
    if (file.rfind("trace_", 0) != 0) continue;
    ++files;
    const std::string a = ReadFile(entry.path());
    const std::string b = ReadFile(work / "b" / file);
    if (a != b || a.empty()) return {false, file + " differs between runs"};
  }
  fs::remove_all(work);
  return {files == 3, Fmt("%d trace CSVs byte-identical", files)};
}

}  // namespace
}  // namespace bisecbio

int main(int argc, char** argv) {
  using namespace bisecbio;
  CLI::App app("bisecbio acceptance checks");
  int only = 0;
  app.add_option("--criterion", only, "run one criterion (1-9); 0 runs all")
      ->check(CLI::Range(0, 9));
  CLI11_PARSE(app, argc, argv);

  SetWarningSink([](std::string_view) {});
  const std::vector<std::function<Outcome()>> criteria = {
      ToyEndToEnd,     MnpGroundTruth,    CertificateStructure,
      FistaRate,       ProjectionOracles, ComplexityScaling,
      DiagnosticIdentities, Ordering,     Determinism};
  bool all = true;
  for (int i = 1; i <= 9; ++i) {
    if (only != 0 && only != i) continue;
    Outcome o;
    try {
      o = criteria[i - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", o.passed ? "PASS" : "FAIL", i,
                o.detail.c_str());
    std::fflush(stdout);
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
