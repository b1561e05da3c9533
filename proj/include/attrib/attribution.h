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

#ifndef ATTRIB_ATTRIBUTION_H_
#define ATTRIB_ATTRIBUTION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "attrib/model.h"
#include "attrib/report.h"
#include "attrib/tensor.h"

namespace attrib {

enum class Scheme { kRight, kLeft };

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);

// Straight-line path from the baseline features to the features, sampled at
// A' + (s/m)(A - A') for s in 1..m (right) or 0..m-1 (left).
struct PathSpec {
  std::size_t steps = 256;
  Scheme scheme = Scheme::kRight;
};

inline constexpr std::size_t kDefaultSteps = 256;

// Per-element signed contributions over a feature tensor.
//
// `feature_map` has the feature shape. `collapsed` sums it over the channel
// axis (axis 0) for features of rank >= 2, giving one channel's shape; for
// rank-1 features every element is its own location and `collapsed` equals
// `feature_map`. Original LayerCAM additionally rectifies `collapsed`.
struct AttributionMap {
  Tensor feature_map;
  Tensor collapsed;
  AttributionMeta meta;
};

Tensor collapse_channels(const Tensor& feature_map);

// Path-integrated gradients of the tail between `baseline` and `features`.
// The gradient average along the path is accumulated as a running mean, so an
// affine tail yields bitwise-identical results for every step count.
AttributionMap integrated_gradients(const SplitView& view, const Tensor& features,
                                    const Tensor& baseline, const PathSpec& path,
                                    TargetSelector target,
                                    BaselineProvenance provenance = BaselineProvenance::kInputDerived);

// features * dF/dfeatures at the features; the right-scheme single step from a
// zero feature baseline.
AttributionMap gradient_times_input(const SplitView& view, const Tensor& features,
                                    TargetSelector target);

// (features - baseline) * dF/dfeatures at the baseline; the left-scheme single
// step.
AttributionMap taylor_first_order(const SplitView& view, const Tensor& features,
                                  const Tensor& baseline, TargetSelector target,
                                  BaselineProvenance provenance = BaselineProvenance::kInputDerived);

// w * features with w = relu(g) (or g with keep_negative); the collapsed map is
// rectified when final_relu is set. keep_negative && !final_relu is the
// modified LayerCAM.
AttributionMap layercam(const SplitView& view, const Tensor& features, TargetSelector target,
                        bool keep_negative, bool final_relu);

// Corrected ODAM for a single output: the target is used with its own sign and
// both rectifications are dropped.
AttributionMap odam_single(const SplitView& view, const Tensor& features, TargetSelector target);

// Elementwise signed maximum over the collapsed maps. The result carries a
// single channel so that `collapsed` still equals the channel sum.
AttributionMap odam_combine(std::span<const AttributionMap> maps);

// Whether a zero feature tensor is what the head produces from a zero input;
// this decides if single-step methods have an input-level baseline.
BaselineProvenance zero_feature_provenance(const SplitView& view);

enum class Method { kIntegratedGradients, kGradientTimesInput, kTaylor, kLayerCam,
                    kLayerCamModified, kOdam, kOdamCombined };

std::string_view method_name(Method method);
Method parse_method(std::string_view name);
// Methods whose result depends on the step count.
inline bool uses_steps(Method m) { return m == Method::kIntegratedGradients; }
// Methods that ignore the requested baseline and use zero features.
bool uses_zero_feature_baseline(Method m);

// Input-space baseline x', or the raw zero-feature escape hatch.
struct FeatureZeros {};
using Baseline = std::variant<Tensor, FeatureZeros>;

struct RunRequest {
  Method method = Method::kIntegratedGradients;
  PathSpec path;
  std::size_t split_index = 0;
  TargetSelector target;
};

struct RunResult {
  AttributionMap map;
  AttributionReport report;
};

// Full pipeline: A = head(x), A' = head(x') (or zeros under the escape hatch),
// y and y' through the tail, the requested method, and its error report.
RunResult run_attribution(const Model& model, const Tensor& x, const Baseline& baseline,
                          const RunRequest& request);

// Integrated gradients on the features at `split_index` against the features
// of the input baseline.
RunResult layer_integrated_gradients(const Model& model, const Tensor& x, const Tensor& x_base,
                                     std::size_t split_index, const PathSpec& path,
                                     TargetSelector target);

}  // namespace attrib

#endif  // ATTRIB_ATTRIBUTION_H_
