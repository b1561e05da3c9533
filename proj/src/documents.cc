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

#include "attrib/documents.h"

#include "attrib/errors.h"
#include "attrib/model_io.h"
#include "json.hpp"

namespace attrib {

using nlohmann::json;

namespace {

json meta_to_json(const AttributionMeta& meta) {
  json obj;
  obj["method"] = std::string(method_name(meta.method));
  obj["scheme"] = std::string(scheme_name(meta.scheme));
  obj["steps"] = meta.steps;
  obj["split_index"] = meta.split_index;
  obj["target"] = meta.target.to_string();
  obj["baseline_provenance"] = provenance_name(meta.provenance);
  obj["input_level_baseline"] = meta.provenance == BaselineProvenance::kInputDerived;
  if (!meta.source_targets.empty()) {
    json targets = json::array();
    for (const TargetSelector& t : meta.source_targets) targets.push_back(t.to_string());
    obj["source_targets"] = targets;
  }
  obj["notes"] = meta.notes;
  return obj;
}

json tensor_json(const Tensor& t) {
  return json{{"shape", t.shape()}, {"data", t.values()}};
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json("undefined");
}

}  // namespace

std::string report_to_json(const AttributionReport& report) {
  json doc = meta_to_json(report.meta);
  doc["output_value"] = report.output_value;
  doc["baseline_output"] = report.baseline_output;
  doc["delta"] = report.delta;
  doc["attribution_sum"] = report.attribution_sum;
  doc["abs_error"] = report.abs_error;
  doc["rel_error"] = optional_number(report.rel_error);
  doc["runtime_ms"] = report.runtime_ms;
  doc["refined"] = report.refined;
  if (report.coarse_abs_error) doc["coarse_abs_error"] = *report.coarse_abs_error;
  if (report.refined) doc["coarse_rel_error"] = optional_number(report.coarse_rel_error);
  return doc.dump(2) + "\n";
}

std::string map_to_json(const AttributionMap& map) {
  json doc;
  doc["meta"] = meta_to_json(map.meta);
  doc["feature_map"] = tensor_json(map.feature_map);
  doc["collapsed"] = tensor_json(map.collapsed);
  return doc.dump() + "\n";
}

Tensor load_render_map(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": parse error: " + e.what());
  }
  if (doc.is_object() && doc.contains("collapsed")) {
    return parse_tensor(doc["collapsed"].dump(), path.string() + " (collapsed)");
  }
  return parse_tensor(text, path.string());
}

}  // namespace attrib
