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

#include "attrib/report.h"

#include <cmath>

namespace attrib {

std::string provenance_name(BaselineProvenance p) {
  return p == BaselineProvenance::kInputDerived ? "input-derived" : "raw-feature";
}

AttributionError attribution_error(double attribution_sum, double delta) {
  AttributionError err;
  err.abs_error = std::abs(attribution_sum - delta);
  if (std::abs(delta) >= kUndefinedDeltaThreshold) err.rel_error = std::abs(err.abs_error / delta);
  return err;
}

}  // namespace attrib
