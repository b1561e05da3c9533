/*
 * Copyright 2026 The attrib Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "attrib/evaluation.h"

#include <cstdio>
#include <iostream>

#include "attrib/errors.h"

namespace attrib {

AttributionError attribution_error(const AttributionMap& map, double delta) {
  return attribution_error(sum(map.collapsed), delta);
}

RunResult refine(const Model& model, const Tensor& x, const Baseline& baseline, RunRequest request,
                 const RefineOptions& options) {
  if (options.coarse_steps == 0 || options.fine_steps == 0) {
    throw InputError("refine: step counts must be positive");
  }
  request.path.steps = options.coarse_steps;
  RunResult coarse = run_attribution(model, x, baseline, request);
  if (!uses_steps(request.method)) return coarse;
  const auto& rel = coarse.report.rel_error;
  if (!rel || *rel <= options.threshold) return coarse;

  request.path.steps = options.fine_steps;
  RunResult fine = run_attribution(model, x, baseline, request);
  fine.report.refined = true;
  fine.report.coarse_abs_error = coarse.report.abs_error;
  fine.report.coarse_rel_error = coarse.report.rel_error;
  fine.report.runtime_ms += coarse.report.runtime_ms;
  if (fine.report.abs_error > coarse.report.abs_error) {
    std::cerr << "warning: refinement to " << options.fine_steps
              << " steps increased abs_error from " << format_number(coarse.report.abs_error)
              << " to " << format_number(fine.report.abs_error) << "\n";
  }
  return fine;
}

std::vector<ConvergenceRow> convergence_study(const Model& model, const Tensor& x,
                                              const Baseline& baseline, std::size_t split_index,
                                              std::span<const std::size_t> step_counts,
                                              Scheme scheme, TargetSelector target) {
  if (step_counts.empty()) throw InputError("convergence_study: step list is empty");
  for (std::size_t i = 0; i < step_counts.size(); ++i) {
    if (step_counts[i] == 0) throw InputError("convergence_study: step counts must be positive");
    if (i > 0 && step_counts[i] <= step_counts[i - 1]) {
      throw InputError("convergence_study: step list must be strictly ascending");
    }
  }
  RunRequest request;
  request.method = Method::kIntegratedGradients;
  request.path.scheme = scheme;
  request.split_index = split_index;
  request.target = target;

  std::vector<ConvergenceRow> rows;
  for (std::size_t m : step_counts) {
    request.path.steps = m;
    const RunResult run = run_attribution(model, x, baseline, request);
    rows.push_back(ConvergenceRow{m, run.report.attribution_sum, run.report.delta,
                                  run.report.abs_error, run.report.rel_error, run.report.runtime_ms});
  }
  return rows;
}

std::string convergence_csv(std::span<const ConvergenceRow> rows) {
  std::string out = "steps,attribution_sum,delta,abs_error,rel_error,runtime_ms\n";
  for (const ConvergenceRow& r : rows) {
    out += std::to_string(r.steps) + "," + format_number(r.attribution_sum) + "," +
           format_number(r.delta) + "," + format_number(r.abs_error) + "," +
           format_number(r.rel_error) + "," + format_number(r.runtime_ms) + "\n";
  }
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_number(const std::optional<double>& v) {
  return v ? format_number(*v) : "undefined";
}

}  // namespace attrib
