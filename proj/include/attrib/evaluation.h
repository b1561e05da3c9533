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

#ifndef ATTRIB_EVALUATION_H_
#define ATTRIB_EVALUATION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrib/attribution.h"
#include "attrib/report.h"

namespace attrib {

// |sum(map) - delta| and its ratio to |delta| (undefined for |delta| < 1e-12).
AttributionError attribution_error(const AttributionMap& map, double delta);

// Two-stage protocol: run at `coarse_steps`; when the relative error is
// defined and exceeds `threshold`, rerun at `fine_steps`.
struct RefineOptions {
  double threshold = 0.5;
  std::size_t coarse_steps = 256;
  std::size_t fine_steps = 2000;
};

// Only path methods escalate; single-step methods return the coarse run.
RunResult refine(const Model& model, const Tensor& x, const Baseline& baseline,
                 RunRequest request, const RefineOptions& options = {});

struct ConvergenceRow {
  std::size_t steps = 0;
  double attribution_sum = 0.0;
  double delta = 0.0;
  double abs_error = 0.0;
  std::optional<double> rel_error;
  double runtime_ms = 0.0;
};

// One integrated-gradients run per entry of `step_counts` (non-empty, strictly
// ascending).
std::vector<ConvergenceRow> convergence_study(const Model& model, const Tensor& x,
                                              const Baseline& baseline, std::size_t split_index,
                                              std::span<const std::size_t> step_counts,
                                              Scheme scheme, TargetSelector target);

// Columns: steps,attribution_sum,delta,abs_error,rel_error,runtime_ms.
std::string convergence_csv(std::span<const ConvergenceRow> rows);

// 17 significant digits; "undefined" for a missing value.
std::string format_number(double v);
std::string format_number(const std::optional<double>& v);

}  // namespace attrib

#endif  // ATTRIB_EVALUATION_H_
