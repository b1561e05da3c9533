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

#ifndef ATTRIB_BATCH_H_
#define ATTRIB_BATCH_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attrib/attribution.h"
#include "attrib/evaluation.h"

namespace attrib {

// Baseline as written in a manifest or on the command line: "zeros", a tensor
// file path, or "feature-zeros" (raw feature baseline escape hatch).
struct BaselineSpec {
  enum class Kind { kZeros, kTensorFile, kFeatureZeros };
  Kind kind = Kind::kZeros;
  std::filesystem::path path;

  static BaselineSpec parse(std::string_view text, const std::filesystem::path& base_dir = {});
  std::string to_string() const;
  Baseline resolve(const Model& model) const;
};

// One manifest entry; expands to methods x targets runs.
struct BatchJob {
  std::filesystem::path model;
  std::filesystem::path input;
  BaselineSpec baseline;
  std::size_t split = 0;
  std::vector<Method> methods;
  std::vector<TargetSelector> targets;
  PathSpec path;
  // Two-stage protocol for path methods.
  std::optional<RefineOptions> refine;
};

// Manifest document (same JSON syntax as model files):
//   {"format_version": 1, "jobs": [{"model": ..., "input": ..., "baseline": ...,
//     "split": 0, "methods": ["ig"], "targets": ["0:logit"], "steps": 256,
//     "scheme": "right", "refine": false}]}
// Relative paths are resolved against the manifest's directory.
struct BatchManifest {
  std::vector<BatchJob> jobs;
};

BatchManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                             std::string_view source = "<memory>");
BatchManifest load_manifest(const std::filesystem::path& path);

struct BatchConfig {
  std::size_t workers = 1;
  // When false, runtimes are recorded as 0 so that output is byte-stable.
  bool record_runtime = true;
};

// One executed (job, method, target) run.
struct JobOutcome {
  std::size_t job_index = 0;
  std::string method;
  std::size_t split_layer = 0;
  std::string target;
  std::optional<AttributionReport> report;
  std::string error;
};

struct BatchRow {
  std::string method;
  std::size_t split_layer = 0;
  std::string target;
  std::size_t n = 0;
  std::optional<double> mean_abs_error;
  std::optional<double> mean_rel_error;
  std::size_t undefined_count = 0;
  double total_runtime_ms = 0.0;
  std::vector<std::string> errors;
};

struct BatchResult {
  std::vector<BatchRow> rows;
  std::vector<JobOutcome> outcomes;
};

BatchResult batch_run(const BatchManifest& manifest, const BatchConfig& config = {});
BatchResult batch_run(const std::filesystem::path& manifest, const BatchConfig& config = {});

// Groups outcomes by (method, split layer, target), sorted by key. Means run
// over outcomes in their given order.
std::vector<BatchRow> aggregate(std::span<const JobOutcome> outcomes);

// Header: method,split_layer,target,n,mean_abs_error,mean_rel_error,
// undefined_count,total_runtime_ms,errors
std::string batch_csv(const BatchResult& result);

}  // namespace attrib

#endif  // ATTRIB_BATCH_H_
