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

#ifndef ATTRIB_REPORT_H_
#define ATTRIB_REPORT_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "attrib/model.h"

namespace attrib {

enum class Method;
enum class Scheme;

enum class BaselineProvenance {
  // A' = head(x') for an input-space baseline x'.
  kInputDerived,
  // A' chosen directly in feature space; no input-level baseline exists.
  kRawFeature,
};

std::string provenance_name(BaselineProvenance p);

struct AttributionMeta {
  Method method{};
  Scheme scheme{};
  std::size_t steps = 1;
  std::size_t split_index = 0;
  TargetSelector target;
  BaselineProvenance provenance = BaselineProvenance::kInputDerived;
  // Targets merged by odam_combine.
  std::vector<TargetSelector> source_targets;
  std::vector<std::string> notes;
};

// Below this |delta| the relative error is undefined.
inline constexpr double kUndefinedDeltaThreshold = 1e-12;

struct AttributionError {
  double abs_error = 0.0;
  std::optional<double> rel_error;
};

AttributionError attribution_error(double attribution_sum, double delta);

struct AttributionReport {
  AttributionMeta meta;
  double output_value = 0.0;
  double baseline_output = 0.0;
  double delta = 0.0;
  double attribution_sum = 0.0;
  double abs_error = 0.0;
  std::optional<double> rel_error;
  double runtime_ms = 0.0;
  bool refined = false;
  // Error of the coarse pass when the report comes from a refinement.
  std::optional<double> coarse_abs_error;
  std::optional<double> coarse_rel_error;
};

}  // namespace attrib

#endif  // ATTRIB_REPORT_H_
