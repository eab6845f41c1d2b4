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

// bisecbio solve | bench | verify | prox-test
//
// Exit codes: 0 success, 2 verification failure, 1 any other error.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bisecbio/experiment.h"
#include "oracles/projection_oracles.h"

namespace {

using namespace bisecbio;

constexpr int kExitVerificationFailed = 2;

struct CommonFlags {
  std::string config;
  std::optional<double> eps_f;
  std::optional<double> eps_g;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  bool plot = false;
};

void AddCommonFlags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "experiment config (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--eps-f", flags.eps_f, "upper-level tolerance");
  cmd->add_option("--eps-g", flags.eps_g, "lower-level tolerance");
  cmd->add_option("--seed", flags.seed, "seed for synthetic data");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_flag("--plot", flags.plot, "write SVG gap plots");
}

ExperimentConfig ResolveConfig(const CommonFlags& flags) {
  ExperimentConfig config;
  if (!flags.config.empty()) config = LoadExperimentConfig(flags.config);
  if (flags.eps_f) config.eps_f = *flags.eps_f;
  if (flags.eps_g) config.eps_g = *flags.eps_g;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out) config.out = *flags.out;
  if (flags.plot) config.plot = true;
  ValidateExperimentConfig(config);
  return config;
}

void PrintSummary(const ExperimentResult& result) {
  std::printf("problem %s  n=%d  g*=%.12g (%s)  p*=%.12g (%s)%s\n",
              result.problem_name.c_str(), result.dimension,
              result.refs.g_star, result.refs.g_source.c_str(),
              result.refs.p_star, result.refs.p_source.c_str(),
              result.refs.flagged ? "  [reference flagged]" : "");
  for (const SolverRun& run : result.runs) {
    std::printf("%-10s iters=%-8lld calls=%-10lld f_gap=%+.3e g_gap=%.3e",
                std::string(SolverName(run.solver)).c_str(),
                static_cast<long long>(run.iters),
                static_cast<long long>(run.tally.total()), run.f_gap,
                run.g_gap);
    if (run.calls_at_targets) {
      std::printf(" targets@%lld", static_cast<long long>(*run.calls_at_targets));
    } else {
      std::printf(" targets:not-met");
    }
    if (run.verification) {
      std::printf(" certificate:%s",
                  run.verification->passed ? "ok" : "FAILED");
    }
    std::printf("\n");
  }
  std::printf("outputs written to %s\n", result.config.out.c_str());
}

int ExitCodeFor(const ExperimentResult& result) {
  for (const SolverRun& run : result.runs) {
    if (run.verification && !run.verification->passed) {
      std::fprintf(stderr, "verification failed: %s\n",
                   run.verification->FailureSummary().c_str());
      return kExitVerificationFailed;
    }
  }
  return 0;
}

int RunAndReport(const ExperimentConfig& config) {
  const ExperimentResult result = RunExperiment(config);
  WriteExperimentOutputs(result);
  PrintSummary(result);
  return ExitCodeFor(result);
}

int Verify(const CommonFlags& flags, const std::string& certificate_path,
           bool numeric_references) {
  const ExperimentConfig config = ResolveConfig(flags);
  const std::string path = certificate_path.empty()
                               ? config.out + "/certificate.json"
                               : certificate_path;
  std::ifstream file(path);
  if (!file) throw ParameterError("cannot open certificate: " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  const SolutionCertificate cert = CertificateFromJson(buffer.str());

  const ProblemInstance instance = BuildProblemInstance(config);
  std::optional<double> g_star = config.reference_g_star;
  std::optional<double> p_star = config.reference_p_star;
  if (!g_star) g_star = instance.g_star;
  if (!p_star) p_star = instance.p_star;
  if (numeric_references && (!g_star || !p_star)) {
    const ReferenceValues refs = ComputeReferences(instance, config);
    g_star = refs.g_star;
    p_star = refs.p_star;
  }
  const VerificationReport report =
      VerifyCertificate(instance.problem, cert, g_star, p_star);
  for (const CertificateCheck& c : report.checks) {
    std::printf("%s %-28s lhs=%.12g rhs=%.12g\n", c.passed ? "ok  " : "FAIL",
                c.name.c_str(), c.lhs, c.rhs);
  }
  std::printf("f(x)=%.15g g(x)=%.15g\n", report.f_at_point, report.g_at_point);
  return report.passed ? 0 : kExitVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bisection solver for convex simple bilevel problems"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress warnings");

  CommonFlags solve_flags;
  std::string solve_solver;
  CLI::App* solve = app.add_subcommand("solve", "run one solver on one problem");
  AddCommonFlags(solve, solve_flags);
  solve->add_option("--solver", solve_solver,
                    "bisec-bio | airg | bigsam (default: first in config)");

  CommonFlags bench_flags;
  CLI::App* bench = app.add_subcommand("bench", "compare all configured solvers");
  AddCommonFlags(bench, bench_flags);

  CommonFlags verify_flags;
  std::string certificate_path;
  bool numeric_references = false;
  CLI::App* verify = app.add_subcommand("verify", "re-check a certificate file");
  AddCommonFlags(verify, verify_flags);
  verify->add_option("--certificate", certificate_path,
                     "certificate JSON (default: <out>/certificate.json)");
  verify->add_flag("--numeric-references", numeric_references,
                   "compute g* and p* numerically when no exact value exists");

  int prox_instances = 100;
  uint64_t prox_seed = 0;
  CLI::App* prox_test =
      app.add_subcommand("prox-test", "projection oracle-equivalence suite");
  prox_test->add_option("--instances", prox_instances,
                        "random instances per family")
      ->check(CLI::PositiveNumber);
  prox_test->add_option("--seed", prox_seed, "instance seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (quiet) SetWarningSink([](std::string_view) {});

  try {
    if (*solve) {
      ExperimentConfig config = ResolveConfig(solve_flags);
      if (!solve_solver.empty()) {
        config.solvers = {ParseSolver(solve_solver)};
      } else {
        config.solvers.resize(1);
      }
      return RunAndReport(config);
    }
    if (*bench) return RunAndReport(ResolveConfig(bench_flags));
    if (*verify) return Verify(verify_flags, certificate_path, numeric_references);
    if (*prox_test) {
      const oracles::SuiteResult suite =
          oracles::RunProxOracleSuite(prox_instances, prox_seed);
      std::fputs(oracles::FormatSuite(suite).c_str(), stdout);
      return suite.passed() ? 0 : kExitVerificationFailed;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
