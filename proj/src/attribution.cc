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

#include "attrib/attribution.h"

#include <algorithm>
#include <chrono>
#include <utility>

#include "attrib/errors.h"

namespace attrib {

namespace {

void require_feature_shape(const SplitView& view, const Tensor& t, const char* what) {
  if (t.shape() != view.feature_shape()) {
    throw ShapeError(std::string(what) + " of shape " + shape_string(t.shape()) +
                     " do not match the split feature shape " + shape_string(view.feature_shape()));
  }
}

Tensor gradient_at(const SplitView& view, const Tensor& point, TargetSelector target,
                   const std::string& where) {
  try {
    return view.forward_tail(point, target).gradient();
  } catch (const NumericalError& e) {
    throw NumericalError(where + ": " + e.what());
  }
}

AttributionMeta single_step_meta(Method method, Scheme scheme, const SplitView& view,
                                 TargetSelector target, BaselineProvenance provenance) {
  AttributionMeta meta;
  meta.method = method;
  meta.scheme = scheme;
  meta.steps = 1;
  meta.split_index = view.split_index();
  meta.target = target;
  meta.provenance = provenance;
  if (provenance == BaselineProvenance::kRawFeature) {
    meta.notes.push_back("no input-level baseline: zero feature baseline is not the head of any known input");
  }
  return meta;
}

AttributionMap make_map(Tensor feature_map, AttributionMeta meta) {
  Tensor collapsed = collapse_channels(feature_map);
  return AttributionMap{std::move(feature_map), std::move(collapsed), std::move(meta)};
}

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::kIntegratedGradients, "ig"},
    {Method::kGradientTimesInput, "grad-input"},
    {Method::kTaylor, "taylor"},
    {Method::kLayerCam, "layercam"},
    {Method::kLayerCamModified, "layercam-mod"},
    {Method::kOdam, "odam"},
    {Method::kOdamCombined, "odam-combine"},
};

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  return scheme == Scheme::kRight ? "right" : "left";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "right") return Scheme::kRight;
  if (name == "left") return Scheme::kLeft;
  throw InputError("scheme must be 'right' or 'left', got '" + std::string(name) + "'");
}

std::string_view method_name(Method method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& [m, n] : kMethodNames) {
    if (n == name) return m;
  }
  throw InputError("unknown method '" + std::string(name) +
                   "' (expected ig, grad-input, taylor, layercam, layercam-mod or odam)");
}

bool uses_zero_feature_baseline(Method m) {
  return m == Method::kGradientTimesInput || m == Method::kLayerCam ||
         m == Method::kLayerCamModified || m == Method::kOdam;
}

Tensor collapse_channels(const Tensor& feature_map) {
  if (feature_map.rank() < 2) return feature_map;
  const Shape& shape = feature_map.shape();
  Tensor out(Shape(shape.begin() + 1, shape.end()));
  const std::size_t plane = out.size();
  for (std::size_t c = 0; c < shape[0]; ++c)
    for (std::size_t i = 0; i < plane; ++i) out[i] += feature_map[c * plane + i];
  return out;
}

BaselineProvenance zero_feature_provenance(const SplitView& view) {
  if (view.split_index() == 0) return BaselineProvenance::kInputDerived;
  const Tensor head_of_zero = view.forward_head(Tensor::zeros(view.model().input_shape()));
  const bool all_zero = std::all_of(head_of_zero.data().begin(), head_of_zero.data().end(),
                                    [](double v) { return v == 0.0; });
  return all_zero ? BaselineProvenance::kInputDerived : BaselineProvenance::kRawFeature;
}

AttributionMap integrated_gradients(const SplitView& view, const Tensor& features,
                                    const Tensor& baseline, const PathSpec& path,
                                    TargetSelector target, BaselineProvenance provenance) {
  require_feature_shape(view, features, "features");
  require_feature_shape(view, baseline, "baseline features");
  if (path.steps == 0) throw InputError("integrated_gradients: steps must be at least 1");

  const Tensor diff = features - baseline;
  const std::size_t m = path.steps;
  Tensor mean_grad(features.shape());
  Tensor point(features.shape());
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t s = path.scheme == Scheme::kRight ? k + 1 : k;
    const double alpha = static_cast<double>(s) / static_cast<double>(m);
    for (std::size_t i = 0; i < point.size(); ++i) point[i] = baseline[i] + alpha * diff[i];
    const Tensor g = gradient_at(view, point, target,
                                 "integrated_gradients step " + std::to_string(s) + "/" +
                                     std::to_string(m));
    const double count = static_cast<double>(k + 1);
    for (std::size_t i = 0; i < g.size(); ++i) mean_grad[i] += (g[i] - mean_grad[i]) / count;
  }

  AttributionMeta meta = single_step_meta(Method::kIntegratedGradients, path.scheme, view, target,
                                          provenance);
  meta.steps = m;
  return make_map(hadamard(diff, mean_grad), std::move(meta));
}

AttributionMap gradient_times_input(const SplitView& view, const Tensor& features,
                                    TargetSelector target) {
  require_feature_shape(view, features, "features");
  const Tensor g = gradient_at(view, features, target, "gradient_times_input");
  return make_map(hadamard(features, g),
                  single_step_meta(Method::kGradientTimesInput, Scheme::kRight, view, target,
                                   zero_feature_provenance(view)));
}

AttributionMap taylor_first_order(const SplitView& view, const Tensor& features,
                                  const Tensor& baseline, TargetSelector target,
                                  BaselineProvenance provenance) {
  require_feature_shape(view, features, "features");
  require_feature_shape(view, baseline, "baseline features");
  const Tensor g = gradient_at(view, baseline, target, "taylor_first_order");
  return make_map(hadamard(features - baseline, g),
                  single_step_meta(Method::kTaylor, Scheme::kLeft, view, target, provenance));
}

AttributionMap layercam(const SplitView& view, const Tensor& features, TargetSelector target,
                        bool keep_negative, bool final_relu) {
  require_feature_shape(view, features, "features");
  Tensor weights = gradient_at(view, features, target, "layercam");
  if (!keep_negative) {
    for (double& w : weights.data()) w = w > 0.0 ? w : 0.0;
  }
  const bool modified = keep_negative && !final_relu;
  AttributionMeta meta = single_step_meta(modified ? Method::kLayerCamModified : Method::kLayerCam,
                                          Scheme::kRight, view, target, zero_feature_provenance(view));
  if (keep_negative == final_relu) {
    meta.notes.push_back(std::string("non-standard LayerCAM variant: keep_negative=") +
                         (keep_negative ? "true" : "false") +
                         ", final_relu=" + (final_relu ? "true" : "false"));
  }
  AttributionMap map = make_map(hadamard(weights, features), std::move(meta));
  if (final_relu) {
    for (double& v : map.collapsed.data()) v = v > 0.0 ? v : 0.0;
  }
  return map;
}

AttributionMap odam_single(const SplitView& view, const Tensor& features, TargetSelector target) {
  AttributionMap map = layercam(view, features, target, /*keep_negative=*/true, /*final_relu=*/false);
  map.meta.method = Method::kOdam;
  map.meta.notes.push_back("single-step integrated gradients from a zero feature baseline");
  return map;
}

AttributionMap odam_combine(std::span<const AttributionMap> maps) {
  if (maps.empty()) throw InputError("odam_combine: no maps to combine");
  const AttributionMap& first = maps.front();
  Tensor combined = first.collapsed;
  AttributionMeta meta = first.meta;
  meta.method = Method::kOdamCombined;
  meta.source_targets.clear();
  meta.notes.clear();
  for (const AttributionMap& map : maps) {
    if (map.collapsed.shape() != combined.shape()) {
      throw ShapeError("odam_combine: collapsed shape " + shape_string(map.collapsed.shape()) +
                       " differs from " + shape_string(combined.shape()));
    }
    if (map.meta.split_index != first.meta.split_index) {
      throw InputError("odam_combine: maps come from different split indices");
    }
    for (std::size_t i = 0; i < combined.size(); ++i) {
      combined[i] = std::max(combined[i], map.collapsed[i]);
    }
    meta.source_targets.push_back(map.meta.target);
    if (map.meta.provenance == BaselineProvenance::kRawFeature) {
      meta.provenance = BaselineProvenance::kRawFeature;
    }
  }
  meta.notes.push_back("elementwise maximum over signed values");
  meta.notes.push_back(
      "merging maps of different outputs only changes the picture; each output keeps its own attribution");

  Tensor feature_map = combined;
  if (first.feature_map.rank() >= 2) {
    Shape shape{1};
    shape.insert(shape.end(), combined.shape().begin(), combined.shape().end());
    feature_map = combined.reshaped(std::move(shape));
  }
  return AttributionMap{std::move(feature_map), std::move(combined), std::move(meta)};
}

RunResult run_attribution(const Model& model, const Tensor& x, const Baseline& baseline,
                          const RunRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  const SplitView view(model, request.split_index);
  if (x.shape() != model.input_shape()) {
    throw ShapeError("input of shape " + shape_string(x.shape()) + " does not match model input " +
                     shape_string(model.input_shape()));
  }
  const Tensor features = view.forward_head(x);

  Tensor base_features;
  BaselineProvenance provenance = BaselineProvenance::kInputDerived;
  std::vector<std::string> extra_notes;
  if (uses_zero_feature_baseline(request.method)) {
    base_features = Tensor::zeros(view.feature_shape());
    provenance = zero_feature_provenance(view);
    if (const Tensor* xb = std::get_if<Tensor>(&baseline); xb && max_abs(*xb) != 0.0) {
      extra_notes.push_back("requested input baseline ignored: method uses a zero feature baseline");
    }
  } else if (std::holds_alternative<FeatureZeros>(baseline)) {
    base_features = Tensor::zeros(view.feature_shape());
    provenance = BaselineProvenance::kRawFeature;
  } else {
    const Tensor& x_base = std::get<Tensor>(baseline);
    if (x_base.shape() != model.input_shape()) {
      throw ShapeError("baseline of shape " + shape_string(x_base.shape()) +
                       " does not match model input " + shape_string(model.input_shape()));
    }
    base_features = view.forward_head(x_base);
  }

  const double y = view.forward_tail(features, request.target).value;
  const double y_base = view.forward_tail(base_features, request.target).value;

  AttributionMap map;
  switch (request.method) {
    case Method::kIntegratedGradients:
      map = integrated_gradients(view, features, base_features, request.path, request.target,
                                 provenance);
      break;
    case Method::kGradientTimesInput:
      map = gradient_times_input(view, features, request.target);
      break;
    case Method::kTaylor:
      map = taylor_first_order(view, features, base_features, request.target, provenance);
      break;
    case Method::kLayerCam:
      map = layercam(view, features, request.target, false, true);
      break;
    case Method::kLayerCamModified:
      map = layercam(view, features, request.target, true, false);
      break;
    case Method::kOdam:
      map = odam_single(view, features, request.target);
      break;
    case Method::kOdamCombined:
      throw InputError("odam-combine merges existing maps and cannot be run directly");
  }
  map.meta.notes.insert(map.meta.notes.end(), extra_notes.begin(), extra_notes.end());

  AttributionReport report;
  report.meta = map.meta;
  report.output_value = y;
  report.baseline_output = y_base;
  report.delta = y - y_base;
  report.attribution_sum = sum(map.collapsed);
  const AttributionError err = attribution_error(report.attribution_sum, report.delta);
  report.abs_error = err.abs_error;
  report.rel_error = err.rel_error;
  report.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return RunResult{std::move(map), std::move(report)};
}

RunResult layer_integrated_gradients(const Model& model, const Tensor& x, const Tensor& x_base,
                                     std::size_t split_index, const PathSpec& path,
                                     TargetSelector target) {
  RunRequest request;
  request.method = Method::kIntegratedGradients;
  request.path = path;
  request.split_index = split_index;
  request.target = target;
  return run_attribution(model, x, Baseline(x_base), request);
}

}  // namespace attrib
