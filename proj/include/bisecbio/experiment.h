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

// Experiment harness behind the command-line tool: configuration, problem
// construction, reference optimal values, solver runs with per-oracle-call
// traces, and the CSV / JSON / SVG writers.
//
// Configuration files are flat JSON objects; see configs/ and README.md for
// the recognized keys. Unknown keys are rejected.

#ifndef BISECBIO_EXPERIMENT_H_
#define BISECBIO_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bisecbio/apg.h"
#include "bisecbio/baselines.h"
#include "bisecbio/bilevel.h"
#include "bisecbio/core.h"
#include "bisecbio/data.h"
#include "bisecbio/prox.h"

namespace bisecbio {

enum class SolverId { kBisecBio, kAirg, kBigSam };

std::string_view SolverName(SolverId solver);
SolverId ParseSolver(std::string_view name);

struct ExperimentConfig {
  // mnp-free | mnp-nonneg | mnp-l1ball | lrp-l1ball | ssp-elasticnet | toy |
  // custom-file
  std::string problem = "toy";
  // LIBSVM or CSV path for the data-driven families (synthetic when empty);
  // the JSON problem file for custom-file.
  std::string data;
  int csv_label_col = 0;
  int synth_m = 20;
  int synth_n = 50;
  int synth_rank = 10;
  double synth_density = 0.1;
  int synth_duplicates = 10;
  PreprocessSpec preprocess;
  LevelSetParams params{10.0, 0.02};

  double eps_f = 1e-5;
  double eps_g = 1e-6;
  std::vector<SolverId> solvers{SolverId::kBisecBio};
  uint64_t seed = 0;
  std::string out = "out";
  bool plot = false;
  // Record wall time in traces. Off by default so traces are reproducible
  // byte for byte.
  bool wall_clock = false;

  FistaConfig fista;
  bool warm_start = true;

  std::optional<double> airg_gamma0;
  double airg_eta0 = 1.0;
  double airg_b = 0.25;
  double airg_step_exponent = 0.5;
  int64_t airg_max_iters = 100'000;
  std::optional<double> bigsam_step_g;
  std::optional<double> bigsam_step_f;
  int64_t bigsam_max_iters = 100'000;
  // Stop a baseline at the first iterate meeting both gap targets.
  bool stop_at_targets = false;

  std::optional<double> reference_g_star;
  std::optional<double> reference_p_star;
  int64_t reference_max_iters = 1'000'000;
  double reference_residual = 1e-11;
  bool reference_cross_check = true;

  int trace_points_per_decade = 20;
};

void ValidateExperimentConfig(const ExperimentConfig& config);
ExperimentConfig ParseExperimentConfig(std::string_view json_text);
ExperimentConfig LoadExperimentConfig(const std::string& path);
std::string ExperimentConfigToJson(const ExperimentConfig& config);

struct ProblemInstance {
  std::string name;
  BilevelProblem problem;
  Vector x0;
  // Closed-form or least-norm references when available.
  std::optional<double> g_star;
  std::optional<double> p_star;
  std::string reference_source;
};

ProblemInstance BuildProblemInstance(const ExperimentConfig& config);

struct ReferenceValues {
  double g_star = 0.0;
  double p_star = 0.0;
  std::string g_source;
  std::string p_source;
  // Penalty-continuation estimate of p* (numerical references only).
  std::optional<double> p_star_cross_check;
  // Set when the two p* estimates differ by more than 10 eps_f.
  bool flagged = false;
};

// Exact references when the instance has them; otherwise g* from a long
// greedy FISTA run and p* from the bisection solver at 100x tighter
// tolerances, cross-checked against a penalty-continuation solve.
ReferenceValues ComputeReferences(const ProblemInstance& instance,
                                  const ExperimentConfig& config);

struct TraceRecord {
  std::string solver;
  int64_t iter = 0;
  OracleTally tally;
  double wall_seconds = 0.0;
  double f_gap = 0.0;  // f(x) - p*, signed
  double g_gap = 0.0;  // max(g(x) - g*, 0)
};

std::string EmitTraceCsv(const std::vector<TraceRecord>& records);
std::vector<TraceRecord> ParseTraceCsv(std::string_view text);

enum class PlotQuantity { kGGap, kAbsFGap };

struct PlotSpec {
  PlotQuantity quantity = PlotQuantity::kGGap;
  std::string title;
  int width = 640;
  int height = 420;
};

// Log-log plot of one gap against total oracle calls, one polyline per
// trace. Nonpositive values are clamped to 1e-16 with a warning.
std::string EmitSvgPlot(const std::vector<std::vector<TraceRecord>>& traces,
                        const PlotSpec& spec);

struct SolverRun {
  SolverId solver = SolverId::kBisecBio;
  std::vector<TraceRecord> trace;
  Vector point;
  OracleTally tally;
  int64_t iters = 0;
  double f_gap = 0.0;
  double g_gap = 0.0;
  bool reached_targets = false;
  // Total oracle calls when both gap targets were first met.
  std::optional<int64_t> calls_at_targets;
  std::optional<SolutionCertificate> certificate;
  std::optional<VerificationReport> verification;
};

SolverRun RunSolver(const ProblemInstance& instance,
                    const ReferenceValues& refs, SolverId solver,
                    const ExperimentConfig& config);

struct ExperimentResult {
  ExperimentConfig config;
  std::string problem_name;
  int dimension = 0;
  ReferenceValues refs;
  std::vector<SolverRun> runs;
};

// Independent solver runs execute concurrently.
ExperimentResult RunExperiment(const ExperimentConfig& config);

std::string CertificateToJson(const SolutionCertificate& cert);
SolutionCertificate CertificateFromJson(std::string_view text);
std::string ReportToJson(const ExperimentResult& result);

// Writes trace_<solver>.csv, report.json, certificate.json (when the
// bisection solver ran) and, when config.plot is set, plot_g_gap.svg and
// plot_f_gap.svg into config.out.
void WriteExperimentOutputs(const ExperimentResult& result);

}  // namespace bisecbio

#endif  // BISECBIO_EXPERIMENT_H_
