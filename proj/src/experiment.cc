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

#include "bisecbio/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bisecbio/kernels.h"
#include "bisecbio/problems.h"
#include "json.hpp"

namespace bisecbio {

using Json = nlohmann::ordered_json;

std::string_view SolverName(SolverId solver) {
  switch (solver) {
    case SolverId::kBisecBio:
      return "bisec-bio";
    case SolverId::kAirg:
      return "airg";
    case SolverId::kBigSam:
      return "bigsam";
  }
  throw InternalLogicError("unknown solver");
}

SolverId ParseSolver(std::string_view name) {
  for (SolverId id : {SolverId::kBisecBio, SolverId::kAirg, SolverId::kBigSam}) {
    if (SolverName(id) == name) return id;
  }
  throw ParameterError("unknown solver: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void ValidateExperimentConfig(const ExperimentConfig& config) {
  if (!(config.eps_f > 0.0)) throw ParameterError("eps_f must be > 0");
  if (!(config.eps_g > 0.0)) throw ParameterError("eps_g must be > 0");
  if (config.solvers.empty()) throw ParameterError("no solver selected");
  if (config.problem != "toy" && config.problem != "custom-file") {
    ParseLevelSetKind(config.problem);
  }
  if (config.problem == "custom-file" && config.data.empty()) {
    throw ParameterError("custom-file needs \"data\" (the problem JSON path)");
  }
  if (config.trace_points_per_decade < 1) {
    throw ParameterError("trace_points_per_decade must be >= 1");
  }
  if (config.reference_max_iters < 1) {
    throw ParameterError("reference_max_iters must be >= 1");
  }
  ValidateFistaConfig(config.fista);
}

ExperimentConfig ParseExperimentConfig(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ParameterError("config must be a JSON object");

  ExperimentConfig c;
  std::optional<int64_t> subsample_count;
  uint64_t subsample_seed = 0;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "problem") {
        c.problem = value.get<std::string>();
      } else if (key == "data") {
        c.data = value.get<std::string>();
      } else if (key == "csv_label_col") {
        c.csv_label_col = value.get<int>();
      } else if (key == "synth_m") {
        c.synth_m = value.get<int>();
      } else if (key == "synth_n") {
        c.synth_n = value.get<int>();
      } else if (key == "synth_rank") {
        c.synth_rank = value.get<int>();
      } else if (key == "synth_density") {
        c.synth_density = value.get<double>();
      } else if (key == "synth_duplicates") {
        c.synth_duplicates = value.get<int>();
      } else if (key == "minmax_scale") {
        c.preprocess.minmax_scale = value.get<bool>();
      } else if (key == "add_intercept") {
        c.preprocess.add_intercept = value.get<bool>();
      } else if (key == "colinear_copies") {
        c.preprocess.colinear_copies = value.get<int>();
      } else if (key == "subsample_count") {
        subsample_count = value.get<int64_t>();
      } else if (key == "subsample_seed") {
        subsample_seed = value.get<uint64_t>();
      } else if (key == "lambda") {
        c.params.lambda = value.get<double>();
      } else if (key == "alpha") {
        c.params.alpha = value.get<double>();
      } else if (key == "eps_f") {
        c.eps_f = value.get<double>();
      } else if (key == "eps_g") {
        c.eps_g = value.get<double>();
      } else if (key == "solvers") {
        c.solvers.clear();
        for (const auto& s : value) {
          c.solvers.push_back(ParseSolver(s.get<std::string>()));
        }
      } else if (key == "seed") {
        c.seed = value.get<uint64_t>();
      } else if (key == "out") {
        c.out = value.get<std::string>();
      } else if (key == "plot") {
        c.plot = value.get<bool>();
      } else if (key == "wall_clock") {
        c.wall_clock = value.get<bool>();
      } else if (key == "fista_mode") {
        c.fista.mode = ParseFistaMode(value.get<std::string>());
      } else if (key == "fista_l0") {
        c.fista.l0 = value.get<double>();
      } else if (key == "fista_eta") {
        c.fista.eta = value.get<double>();
      } else if (key == "fista_max_iters") {
        c.fista.max_iters = value.get<int64_t>();
      } else if (key == "radius_bound") {
        c.fista.radius_bound = value.get<double>();
      } else if (key == "residual_stop") {
        c.fista.residual_stop = value.get<double>();
      } else if (key == "warm_start") {
        c.warm_start = value.get<bool>();
      } else if (key == "airg_gamma0") {
        c.airg_gamma0 = value.get<double>();
      } else if (key == "airg_eta0") {
        c.airg_eta0 = value.get<double>();
      } else if (key == "airg_b") {
        c.airg_b = value.get<double>();
      } else if (key == "airg_step_exponent") {
        c.airg_step_exponent = value.get<double>();
      } else if (key == "airg_max_iters") {
        c.airg_max_iters = value.get<int64_t>();
      } else if (key == "bigsam_step_g") {
        c.bigsam_step_g = value.get<double>();
      } else if (key == "bigsam_step_f") {
        c.bigsam_step_f = value.get<double>();
      } else if (key == "bigsam_max_iters") {
        c.bigsam_max_iters = value.get<int64_t>();
      } else if (key == "stop_at_targets") {
        c.stop_at_targets = value.get<bool>();
      } else if (key == "reference_g_star") {
        c.reference_g_star = value.get<double>();
      } else if (key == "reference_p_star") {
        c.reference_p_star = value.get<double>();
      } else if (key == "reference_max_iters") {
        c.reference_max_iters = value.get<int64_t>();
      } else if (key == "reference_residual") {
        c.reference_residual = value.get<double>();
      } else if (key == "reference_cross_check") {
        c.reference_cross_check = value.get<bool>();
      } else if (key == "trace_points_per_decade") {
        c.trace_points_per_decade = value.get<int>();
      } else {
        throw ParameterError("config: unknown key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  if (subsample_count.has_value()) {
    c.preprocess.subsample = SubsampleSpec{*subsample_count, subsample_seed};
  }
  ValidateExperimentConfig(c);
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParameterError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return ParseExperimentConfig(buffer.str());
}

std::string ExperimentConfigToJson(const ExperimentConfig& c) {
  Json doc;
  doc["problem"] = c.problem;
  doc["data"] = c.data;
  doc["csv_label_col"] = c.csv_label_col;
  doc["synth_m"] = c.synth_m;
  doc["synth_n"] = c.synth_n;
  doc["synth_rank"] = c.synth_rank;
  doc["synth_density"] = c.synth_density;
  doc["synth_duplicates"] = c.synth_duplicates;
  doc["minmax_scale"] = c.preprocess.minmax_scale;
  doc["add_intercept"] = c.preprocess.add_intercept;
  doc["colinear_copies"] = c.preprocess.colinear_copies;
  if (c.preprocess.subsample.has_value()) {
    doc["subsample_count"] = c.preprocess.subsample->count;
    doc["subsample_seed"] = c.preprocess.subsample->seed;
  }
  doc["lambda"] = c.params.lambda;
  doc["alpha"] = c.params.alpha;
  doc["eps_f"] = c.eps_f;
  doc["eps_g"] = c.eps_g;
  Json solvers = Json::array();
  for (SolverId s : c.solvers) solvers.push_back(std::string(SolverName(s)));
  doc["solvers"] = solvers;
  doc["seed"] = c.seed;
  doc["out"] = c.out;
  doc["plot"] = c.plot;
  doc["wall_clock"] = c.wall_clock;
  doc["fista_mode"] = std::string(FistaModeName(c.fista.mode));
  doc["fista_l0"] = c.fista.l0;
  doc["fista_eta"] = c.fista.eta;
  doc["fista_max_iters"] = c.fista.max_iters;
  doc["radius_bound"] = c.fista.radius_bound;
  doc["residual_stop"] = c.fista.residual_stop;
  doc["warm_start"] = c.warm_start;
  if (c.airg_gamma0.has_value()) doc["airg_gamma0"] = *c.airg_gamma0;
  doc["airg_eta0"] = c.airg_eta0;
  doc["airg_b"] = c.airg_b;
  doc["airg_step_exponent"] = c.airg_step_exponent;
  doc["airg_max_iters"] = c.airg_max_iters;
  if (c.bigsam_step_g.has_value()) doc["bigsam_step_g"] = *c.bigsam_step_g;
  if (c.bigsam_step_f.has_value()) doc["bigsam_step_f"] = *c.bigsam_step_f;
  doc["bigsam_max_iters"] = c.bigsam_max_iters;
  doc["stop_at_targets"] = c.stop_at_targets;
  if (c.reference_g_star.has_value()) {
    doc["reference_g_star"] = *c.reference_g_star;
  }
  if (c.reference_p_star.has_value()) {
    doc["reference_p_star"] = *c.reference_p_star;
  }
  doc["reference_max_iters"] = c.reference_max_iters;
  doc["reference_residual"] = c.reference_residual;
  doc["reference_cross_check"] = c.reference_cross_check;
  doc["trace_points_per_decade"] = c.trace_points_per_decade;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Problems and references
// ---------------------------------------------------------------------------

namespace {

void SetLeastNormReferences(ProblemInstance& instance,
                            const kernels::DenseMatrix& a, const Vector& b) {
  const Vector x = LeastNormSolution(a, b);
  OracleTally scratch;
  instance.g_star =
      EvaluateComposite(instance.problem.lower, x, scratch).value();
  instance.p_star = 0.5 * kernels::SquaredNorm(x);
  instance.reference_source = "least-norm";
}

}  // namespace

ProblemInstance BuildProblemInstance(const ExperimentConfig& config) {
  ValidateExperimentConfig(config);
  ProblemInstance instance;
  if (config.problem == "toy") {
    instance.name = "toy";
    instance.problem = MakeToyProblem();
    instance.x0 = Vector(2, 0.0);
    instance.g_star = 0.0;
    instance.p_star = 1.0;
    instance.reference_source = "analytic";
    return instance;
  }

  if (config.problem == "custom-file") {
    CustomProblem custom = LoadCustomProblem(config.data);
    instance.name = "custom-file:" + std::string(LevelSetKindName(custom.spec.kind));
    instance.problem = MakeProblem(custom.spec, custom.a, custom.b);
    instance.x0 = Vector(custom.a.cols(), 0.0);
    if (custom.spec.kind == LevelSetKind::kMnpFree) {
      SetLeastNormReferences(instance, custom.a, custom.b);
    }
    return instance;
  }

  ProblemSpec spec;
  spec.kind = ParseLevelSetKind(config.problem);
  spec.params = config.params;
  instance.name = config.problem;

  if (!config.data.empty()) {
    const DesignMatrix raw = LoadDesignMatrix(config.data, config.csv_label_col);
    const DesignMatrix dm = Preprocess(raw, config.preprocess);
    const kernels::DenseMatrix a = dm.ToDense();
    instance.problem = MakeProblem(spec, a, dm.labels);
    instance.x0 = Vector(a.cols(), 0.0);
    if (spec.kind == LevelSetKind::kMnpFree) {
      SetLeastNormReferences(instance, a, dm.labels);
    }
    return instance;
  }

  if (spec.kind == LevelSetKind::kLrpL1Ball) {
    const DesignMatrix dm =
        SynthesizeClassification(config.synth_m, config.synth_n,
                                 config.synth_duplicates, config.synth_density,
                                 config.seed);
    instance.problem = MakeProblem(spec, dm);
    instance.x0 = Vector(dm.cols, 0.0);
    return instance;
  }

  SynthMnp synth = SynthesizeMnp(config.synth_m, config.synth_n,
                                 config.synth_rank, config.seed);
  instance.problem = MakeProblem(spec, synth.design);
  instance.x0 = Vector(synth.design.cols, 0.0);
  if (spec.kind == LevelSetKind::kMnpFree) {
    instance.g_star = synth.g_star;
    instance.p_star = synth.p_star;
    instance.reference_source = "least-norm";
  }
  return instance;
}

namespace {

// A greedy FISTA configuration whose fixed budget equals `iters`.
FistaConfig ReferenceFista(const ExperimentConfig& config, int64_t iters) {
  FistaConfig fc;
  fc.mode = FistaMode::kGreedy;
  fc.max_iters = iters;
  fc.residual_stop = config.reference_residual;
  fc.warn_on_cap = false;
  return fc;
}

double EpsilonForBudget(double lipschitz, std::span<const double> x0,
                        int64_t iters) {
  const double radius = 10.0 + kernels::Norm2(x0);
  const double k = static_cast<double>(iters);
  return 2.0 * std::max(lipschitz, 1e-300) * radius * radius / (k * k);
}

std::optional<double> PenaltyContinuation(const ProblemInstance& instance,
                                          const ExperimentConfig& config) {
  const BilevelProblem& p = instance.problem;
  const bool f2_zero = p.upper.nonsmooth.is_zero;
  const bool g2_zero = p.lower.nonsmooth.is_zero;
  if (!f2_zero && !g2_zero) return std::nullopt;

  const int64_t iters = std::max<int64_t>(1, config.reference_max_iters / 10);
  Vector x = instance.x0;
  for (int e = 1; e <= 8; ++e) {
    const double sigma = std::pow(10.0, -e);
    CompositeFunction phi;
    phi.dimension = p.dimension;
    const SmoothPart g1 = p.lower.smooth;
    const SmoothPart f1 = p.upper.smooth;
    phi.smooth.value = [g1, f1, sigma](std::span<const double> z) {
      return g1.value(z) + sigma * f1.value(z);
    };
    phi.smooth.gradient = [g1, f1, sigma](std::span<const double> z) {
      Vector grad = g1.gradient(z);
      const Vector gf = f1.gradient(z);
      for (size_t i = 0; i < grad.size(); ++i) grad[i] += sigma * gf[i];
      return grad;
    };
    phi.lipschitz = p.lower.lipschitz + sigma * p.upper.lipschitz;
    if (f2_zero) {
      phi.nonsmooth = p.lower.nonsmooth;
    } else {
      const NonsmoothPart f2 = p.upper.nonsmooth;
      phi.nonsmooth.value = [f2, sigma](std::span<const double> z) {
        return ExtendedReal(sigma * f2.value(z).value());
      };
      phi.nonsmooth.prox = [f2, sigma](std::span<const double> y, double s) {
        return f2.prox(y, sigma * s);
      };
    }
    const ApgResult r =
        FistaSolve(phi, x, EpsilonForBudget(phi.lipschitz, x, iters),
                   ReferenceFista(config, iters));
    x = r.point;
  }
  OracleTally scratch;
  return EvaluateComposite(p.upper, x, scratch).value();
}

}  // namespace

ReferenceValues ComputeReferences(const ProblemInstance& instance,
                                  const ExperimentConfig& config) {
  ReferenceValues refs;
  const BilevelProblem& p = instance.problem;
  const int64_t iters = config.reference_max_iters;

  if (config.reference_g_star.has_value()) {
    refs.g_star = *config.reference_g_star;
    refs.g_source = "config";
  } else if (instance.g_star.has_value()) {
    refs.g_star = *instance.g_star;
    refs.g_source = instance.reference_source;
  } else {
    const ApgResult r = FistaSolve(
        p.lower, instance.x0,
        EpsilonForBudget(p.lower.lipschitz, instance.x0, iters),
        ReferenceFista(config, iters));
    refs.g_star = r.objective;
    refs.g_source = "greedy-fista";
  }

  if (config.reference_p_star.has_value()) {
    refs.p_star = *config.reference_p_star;
    refs.p_source = "config";
  } else if (instance.p_star.has_value()) {
    refs.p_star = *instance.p_star;
    refs.p_source = instance.reference_source;
  } else {
    BisectionConfig bc;
    bc.apg = ReferenceFista(config, iters);
    bc.warm_start = true;
    const SolutionCertificate cert = BisectionSolve(
        p, config.eps_f / 100.0, config.eps_g / 100.0, instance.x0, bc);
    refs.p_star = cert.upper_bound_u;
    refs.p_source = "bisection-100x";
    if (config.reference_cross_check) {
      refs.p_star_cross_check = PenaltyContinuation(instance, config);
      if (refs.p_star_cross_check.has_value() &&
          std::abs(*refs.p_star_cross_check - refs.p_star) >
              10.0 * config.eps_f) {
        refs.flagged = true;
        LogWarning("reference p* disagrees with the penalty-continuation "
                   "estimate by more than 10 eps_f");
      }
    }
  }
  return refs;
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

namespace {

std::string G17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

constexpr std::string_view kTraceHeader =
    "solver,iter,fn_evals,grad_evals,prox_calls,wall_seconds,f_gap,g_gap";

}  // namespace

std::string EmitTraceCsv(const std::vector<TraceRecord>& records) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const TraceRecord& r : records) {
    out += r.solver;
    out += ',' + std::to_string(r.iter);
    out += ',' + std::to_string(r.tally.fn_evals);
    out += ',' + std::to_string(r.tally.grad_evals);
    out += ',' + std::to_string(r.tally.prox_calls);
    out += ',' + G17(r.wall_seconds);
    out += ',' + G17(r.f_gap);
    out += ',' + G17(r.g_gap);
    out += '\n';
  }
  return out;
}

std::vector<TraceRecord> ParseTraceCsv(std::string_view text) {
  std::vector<TraceRecord> records;
  int64_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kTraceHeader) throw ParseError("unexpected trace header", 1);
      continue;
    }
    const auto fields = SplitCsvLine(line);
    if (fields.size() != 8) throw ParseError("expected 8 columns", line_no);
    TraceRecord r;
    try {
      r.solver = fields[0];
      r.iter = std::stoll(fields[1]);
      r.tally.fn_evals = std::stoll(fields[2]);
      r.tally.grad_evals = std::stoll(fields[3]);
      r.tally.prox_calls = std::stoll(fields[4]);
      r.wall_seconds = std::stod(fields[5]);
      r.f_gap = std::stod(fields[6]);
      r.g_gap = std::stod(fields[7]);
    } catch (const std::exception&) {
      throw ParseError("malformed trace row", line_no);
    }
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

constexpr double kPlotFloor = 1e-16;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

std::string F2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string EscapeXml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string EmitSvgPlot(const std::vector<std::vector<TraceRecord>>& traces,
                        const PlotSpec& spec) {
  const bool g_plot = spec.quantity == PlotQuantity::kGGap;
  bool clamped = false;
  auto y_value = [&](const TraceRecord& r) {
    double v = g_plot ? r.g_gap : std::abs(r.f_gap);
    if (!(v > 0.0) || !std::isfinite(v)) {
      if (!(v > 0.0)) clamped = true;
      v = std::isfinite(v) ? kPlotFloor : 1e16;
    }
    return std::log10(std::max(v, kPlotFloor));
  };
  auto x_value = [](const TraceRecord& r) {
    return std::log10(std::max<double>(1.0, static_cast<double>(r.tally.total())));
  };

  double x_lo = 0.0, x_hi = 1.0, y_lo = -16.0, y_hi = 0.0;
  bool any = false;
  for (const auto& trace : traces) {
    for (const TraceRecord& r : trace) {
      const double x = x_value(r);
      const double y = y_value(r);
      if (!any) {
        x_lo = x_hi = x;
        y_lo = y_hi = y;
        any = true;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (clamped) {
    LogWarning("plot: nonpositive values clamped to 1e-16 on the log axis");
  }
  x_lo = std::floor(x_lo);
  x_hi = std::max(std::ceil(x_hi), x_lo + 1.0);
  y_lo = std::floor(y_lo);
  y_hi = std::max(std::ceil(y_hi), y_lo + 1.0);

  const double left = 70.0, right = 150.0, top = 40.0, bottom = 50.0;
  const double w = spec.width, h = spec.height;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(spec.width) + "\" height=\"" +
       std::to_string(spec.height) + "\" viewBox=\"0 0 " +
       std::to_string(spec.width) + " " + std::to_string(spec.height) +
       "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title =
      spec.title.empty() ? (g_plot ? "g(x) - g*" : "|f(x) - p*|") : spec.title;
  s += "<text x=\"" + F2(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"14\">" + EscapeXml(title) +
       "</text>\n";
  s += "<rect x=\"" + F2(left) + "\" y=\"" + F2(top) + "\" width=\"" + F2(pw) +
       "\" height=\"" + F2(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  const int x_step = std::max(1, static_cast<int>((x_hi - x_lo) / 8.0));
  for (int e = static_cast<int>(x_lo); e <= static_cast<int>(x_hi); e += x_step) {
    const double x = px(e);
    s += "<line x1=\"" + F2(x) + "\" y1=\"" + F2(top + ph) + "\" x2=\"" + F2(x) +
         "\" y2=\"" + F2(top + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + F2(x) + "\" y=\"" + F2(top + ph + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">1e" + std::to_string(e) + "</text>\n";
  }
  const int y_step = std::max(1, static_cast<int>((y_hi - y_lo) / 8.0));
  for (int e = static_cast<int>(y_lo); e <= static_cast<int>(y_hi); e += y_step) {
    const double y = py(e);
    s += "<line x1=\"" + F2(left - 5) + "\" y1=\"" + F2(y) + "\" x2=\"" +
         F2(left) + "\" y2=\"" + F2(y) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + F2(left - 8) + "\" y=\"" + F2(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">1e" + std::to_string(e) + "</text>\n";
  }
  s += "<text x=\"" + F2(left + pw / 2) + "\" y=\"" + F2(h - 10) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\">oracle calls</text>\n";

  for (size_t t = 0; t < traces.size(); ++t) {
    const auto& trace = traces[t];
    const char* color = kPalette[t % std::size(kPalette)];
    const std::string label =
        trace.empty() ? "trace " + std::to_string(t) : trace.front().solver;
    if (!trace.empty()) {
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < trace.size(); ++i) {
        if (i > 0) s += ' ';
        s += F2(px(x_value(trace[i]))) + "," + F2(py(y_value(trace[i])));
      }
      s += "\"/>\n";
    }
    const double ly = top + 16.0 + 18.0 * static_cast<double>(t);
    s += "<line x1=\"" + F2(left + pw + 12) + "\" y1=\"" + F2(ly - 4) +
         "\" x2=\"" + F2(left + pw + 32) + "\" y2=\"" + F2(ly - 4) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + F2(left + pw + 36) + "\" y=\"" + F2(ly) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + EscapeXml(label) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

namespace {

struct Gaps {
  double f_gap = 0.0;
  double g_gap = 0.0;
};

Gaps GapsAt(const BilevelProblem& problem, const ReferenceValues& refs,
            std::span<const double> x) {
  OracleTally scratch;
  Gaps gaps;
  gaps.f_gap = EvaluateComposite(problem.upper, x, scratch).value() - refs.p_star;
  gaps.g_gap = std::max(
      0.0, EvaluateComposite(problem.lower, x, scratch).value() - refs.g_star);
  return gaps;
}

bool MeetsTargets(const Gaps& gaps, const ExperimentConfig& config) {
  return gaps.f_gap <= config.eps_f && gaps.g_gap <= config.eps_g;
}

// Roughly `per_decade` log-spaced sample points, plus every k <= 10.
bool OnLogGrid(int64_t k, int per_decade) {
  if (k <= 10) return true;
  const double a = std::floor(per_decade * std::log10(static_cast<double>(k)));
  const double b =
      std::floor(per_decade * std::log10(static_cast<double>(k - 1)));
  return a > b;
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled)
      : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

SolverRun RunBisection(const ProblemInstance& instance,
                       const ReferenceValues& refs,
                       const ExperimentConfig& config) {
  SolverRun run;
  run.solver = SolverId::kBisecBio;
  const std::string name(SolverName(run.solver));
  const Stopwatch clock(config.wall_clock);
  BisectionConfig bc;
  bc.apg = config.fista;
  bc.warm_start = config.warm_start;
  bc.observer = [&](const BisectionEvent& event) {
    const Gaps gaps = GapsAt(instance.problem, refs, event.incumbent);
    run.trace.push_back({name, event.round, event.tally, clock.Seconds(),
                         gaps.f_gap, gaps.g_gap});
  };
  SolutionCertificate cert =
      BisectionSolve(instance.problem, config.eps_f, config.eps_g, instance.x0,
                     bc);
  const Gaps gaps = GapsAt(instance.problem, refs, cert.point);
  run.point = cert.point;
  run.tally = cert.tally;
  run.iters = cert.bisection_rounds;
  run.f_gap = gaps.f_gap;
  run.g_gap = gaps.g_gap;
  run.reached_targets = MeetsTargets(gaps, config);
  if (run.reached_targets) run.calls_at_targets = cert.tally.total();
  run.verification =
      VerifyCertificate(instance.problem, cert, refs.g_star, refs.p_star);
  run.certificate = std::move(cert);
  return run;
}

SolverRun RunBaseline(const ProblemInstance& instance,
                      const ReferenceValues& refs, SolverId solver,
                      const ExperimentConfig& config) {
  SolverRun run;
  run.solver = solver;
  const std::string name(SolverName(solver));
  const Stopwatch clock(config.wall_clock);
  int64_t last_recorded = -1;
  Gaps last_gaps;
  OracleTally last_tally;
  auto observer = [&](const BaselineIterate& it) {
    const Gaps gaps = GapsAt(instance.problem, refs, it.x);
    last_gaps = gaps;
    last_tally = *it.tally;
    const bool hit = MeetsTargets(gaps, config);
    const bool first_hit = hit && !run.calls_at_targets.has_value();
    if (first_hit) run.calls_at_targets = it.tally->total();
    if (first_hit || OnLogGrid(it.k, config.trace_points_per_decade)) {
      run.trace.push_back(
          {name, it.k, *it.tally, clock.Seconds(), gaps.f_gap, gaps.g_gap});
      last_recorded = it.k;
    }
    return !(hit && config.stop_at_targets);
  };

  BaselineResult result;
  if (solver == SolverId::kAirg) {
    AirgConfig ac = DefaultAirgConfig(instance.problem);
    if (config.airg_gamma0.has_value()) ac.gamma0 = *config.airg_gamma0;
    ac.eta0 = config.airg_eta0;
    ac.exponent_b = config.airg_b;
    ac.step_exponent = config.airg_step_exponent;
    ac.max_iters = config.airg_max_iters;
    result = RunAirg(instance.problem, instance.x0, ac, observer);
  } else {
    BigSamConfig bc = DefaultBigSamConfig(instance.problem);
    if (config.bigsam_step_g.has_value()) bc.step_g = *config.bigsam_step_g;
    if (config.bigsam_step_f.has_value()) bc.step_f = *config.bigsam_step_f;
    bc.max_iters = config.bigsam_max_iters;
    result = RunBigSam(instance.problem, instance.x0, bc, observer);
  }
  if (last_recorded != result.iters) {
    run.trace.push_back({name, result.iters, last_tally, clock.Seconds(),
                         last_gaps.f_gap, last_gaps.g_gap});
  }
  run.point = std::move(result.point);
  run.tally = result.tally;
  run.iters = result.iters;
  run.f_gap = last_gaps.f_gap;
  run.g_gap = last_gaps.g_gap;
  run.reached_targets = MeetsTargets(last_gaps, config);
  return run;
}

}  // namespace

SolverRun RunSolver(const ProblemInstance& instance,
                    const ReferenceValues& refs, SolverId solver,
                    const ExperimentConfig& config) {
  if (solver == SolverId::kBisecBio) {
    return RunBisection(instance, refs, config);
  }
  return RunBaseline(instance, refs, solver, config);
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  ValidateExperimentConfig(config);
  ExperimentResult result;
  result.config = config;
  const ProblemInstance instance = BuildProblemInstance(config);
  result.problem_name = instance.name;
  result.dimension = instance.problem.dimension;
  result.refs = ComputeReferences(instance, config);

  const int count = static_cast<int>(config.solvers.size());
  result.runs.resize(count);
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < count; ++i) {
    try {
      result.runs[i] =
          RunSolver(instance, result.refs, config.solvers[i], config);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return result;
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

namespace {

Json TallyJson(const OracleTally& t) {
  Json j;
  j["fn_evals"] = t.fn_evals;
  j["grad_evals"] = t.grad_evals;
  j["prox_calls"] = t.prox_calls;
  j["total"] = t.total();
  return j;
}

Json CertificateJson(const SolutionCertificate& cert) {
  Json j;
  j["point"] = cert.point;
  j["upper_bound_u"] = cert.upper_bound_u;
  j["lower_bound_l"] = cert.lower_bound_l;
  j["g_reference"] = cert.g_reference;
  j["epsilon_f"] = cert.epsilon_f;
  j["epsilon_g"] = cert.epsilon_g;
  j["tally"] = TallyJson(cert.tally);
  j["bisection_rounds"] = cert.bisection_rounds;
  j["initial_width"] = cert.initial_width;
  j["inner_iterations"] = cert.inner_iterations;
  return j;
}

}  // namespace

std::string CertificateToJson(const SolutionCertificate& cert) {
  return CertificateJson(cert).dump(2) + "\n";
}

SolutionCertificate CertificateFromJson(std::string_view text) {
  SolutionCertificate cert;
  try {
    const Json j = Json::parse(text);
    cert.point = j.at("point").get<Vector>();
    cert.upper_bound_u = j.at("upper_bound_u").get<double>();
    cert.lower_bound_l = j.at("lower_bound_l").get<double>();
    cert.g_reference = j.at("g_reference").get<double>();
    cert.epsilon_f = j.at("epsilon_f").get<double>();
    cert.epsilon_g = j.at("epsilon_g").get<double>();
    const Json& t = j.at("tally");
    cert.tally.fn_evals = t.at("fn_evals").get<int64_t>();
    cert.tally.grad_evals = t.at("grad_evals").get<int64_t>();
    cert.tally.prox_calls = t.at("prox_calls").get<int64_t>();
    cert.bisection_rounds = j.at("bisection_rounds").get<int64_t>();
    cert.initial_width = j.at("initial_width").get<double>();
    cert.inner_iterations = j.value("inner_iterations", int64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("certificate: ") + e.what());
  }
  return cert;
}

std::string ReportToJson(const ExperimentResult& result) {
  Json doc;
  doc["problem"] = result.problem_name;
  doc["dimension"] = result.dimension;
  doc["eps_f"] = result.config.eps_f;
  doc["eps_g"] = result.config.eps_g;
  doc["seed"] = result.config.seed;
  Json refs;
  refs["g_star"] = result.refs.g_star;
  refs["g_source"] = result.refs.g_source;
  refs["p_star"] = result.refs.p_star;
  refs["p_source"] = result.refs.p_source;
  if (result.refs.p_star_cross_check.has_value()) {
    refs["p_star_cross_check"] = *result.refs.p_star_cross_check;
  }
  refs["flagged"] = result.refs.flagged;
  doc["references"] = refs;
  Json runs = Json::array();
  for (const SolverRun& run : result.runs) {
    Json r;
    r["solver"] = std::string(SolverName(run.solver));
    r["iters"] = run.iters;
    r["tally"] = TallyJson(run.tally);
    r["f_gap"] = run.f_gap;
    r["g_gap"] = run.g_gap;
    r["reached_targets"] = run.reached_targets;
    if (run.calls_at_targets.has_value()) {
      r["calls_at_targets"] = *run.calls_at_targets;
    } else {
      r["calls_at_targets"] = nullptr;
    }
    if (run.verification.has_value()) {
      Json v;
      v["passed"] = run.verification->passed;
      v["f_at_point"] = run.verification->f_at_point;
      v["g_at_point"] = run.verification->g_at_point;
      Json checks = Json::array();
      for (const CertificateCheck& c : run.verification->checks) {
        Json cj;
        cj["check"] = c.name;
        cj["lhs"] = c.lhs;
        cj["rhs"] = c.rhs;
        cj["passed"] = c.passed;
        checks.push_back(cj);
      }
      v["checks"] = checks;
      r["verification"] = v;
    }
    runs.push_back(r);
  }
  doc["runs"] = runs;
  return doc.dump(2) + "\n";
}

void WriteExperimentOutputs(const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(result.config.out);
  fs::create_directories(dir);
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw ParameterError("cannot write " + (dir / file).string());
    out << text;
  };
  std::vector<std::vector<TraceRecord>> traces;
  for (const SolverRun& run : result.runs) {
    write("trace_" + std::string(SolverName(run.solver)) + ".csv",
          EmitTraceCsv(run.trace));
    if (run.certificate.has_value()) {
      write("certificate.json", CertificateToJson(*run.certificate));
    }
    traces.push_back(run.trace);
  }
  write("report.json", ReportToJson(result));
  if (result.config.plot) {
    write("plot_g_gap.svg",
          EmitSvgPlot(traces, {PlotQuantity::kGGap, result.problem_name +
                                                        ": g(x) - g*"}));
    write("plot_f_gap.svg",
          EmitSvgPlot(traces, {PlotQuantity::kAbsFGap,
                               result.problem_name + ": |f(x) - p*|"}));
  }
}

}  // namespace bisecbio
