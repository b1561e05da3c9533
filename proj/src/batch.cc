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

#include "attrib/batch.h"

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <thread>
#include <tuple>
#include <utility>

#include "attrib/errors.h"
#include "attrib/model_io.h"
#include "json.hpp"

namespace attrib {

using nlohmann::json;

BaselineSpec BaselineSpec::parse(std::string_view text, const std::filesystem::path& base_dir) {
  BaselineSpec spec;
  if (text == "zeros") {
    spec.kind = Kind::kZeros;
  } else if (text == "feature-zeros") {
    spec.kind = Kind::kFeatureZeros;
  } else if (text.empty()) {
    throw InputError("empty baseline specification");
  } else {
    spec.kind = Kind::kTensorFile;
    const std::filesystem::path p(text);
    spec.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  return spec;
}

std::string BaselineSpec::to_string() const {
  switch (kind) {
    case Kind::kZeros:
      return "zeros";
    case Kind::kFeatureZeros:
      return "feature-zeros";
    case Kind::kTensorFile:
      return path.string();
  }
  return {};
}

Baseline BaselineSpec::resolve(const Model& model) const {
  switch (kind) {
    case Kind::kZeros:
      return Tensor::zeros(model.input_shape());
    case Kind::kFeatureZeros:
      return FeatureZeros{};
    case Kind::kTensorFile:
      return load_tensor(path);
  }
  return FeatureZeros{};
}

namespace {

std::string field_error(std::string_view source, std::size_t job, const std::string& field,
                        const std::string& message) {
  return std::string(source) + ": jobs[" + std::to_string(job) + "]." + field + ": " + message;
}

std::string get_string(const json& obj, std::string_view source, std::size_t job,
                       const std::string& key, const std::optional<std::string>& fallback = {}) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw InputError(field_error(source, job, key, "missing required field"));
  }
  if (!it->is_string()) throw InputError(field_error(source, job, key, "expected a string"));
  return it->get<std::string>();
}

std::size_t get_count(const json& obj, std::string_view source, std::size_t job,
                      const std::string& key, std::size_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw InputError(field_error(source, job, key, "expected a non-negative integer"));
  }
  return it->get<std::size_t>();
}

std::vector<std::string> get_strings(const json& obj, std::string_view source, std::size_t job,
                                     const std::string& key,
                                     const std::vector<std::string>& fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_array() || it->empty()) {
    throw InputError(field_error(source, job, key, "expected a non-empty array of strings"));
  }
  std::vector<std::string> out;
  for (const json& v : *it) {
    if (!v.is_string()) throw InputError(field_error(source, job, key, "expected strings"));
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct LoadedJob {
  std::shared_ptr<const Model> model;
  Tensor input;
  Baseline baseline;
  std::string error;
};

LoadedJob load_job(const BatchJob& job) {
  LoadedJob loaded;
  try {
    loaded.model = std::make_shared<const Model>(load_model(job.model));
    loaded.input = load_tensor(job.input);
    loaded.baseline = job.baseline.resolve(*loaded.model);
  } catch (const Error& e) {
    loaded.error = e.what();
  }
  return loaded;
}

}  // namespace

BatchManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                             std::string_view source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw InputError(std::string(source) + ": parse error: " + e.what());
  }
  if (!doc.is_object()) throw InputError(std::string(source) + ": expected a manifest object");
  const auto version = doc.find("format_version");
  if (version == doc.end() || !version->is_number_integer() || version->get<long long>() != 1) {
    throw InputError(std::string(source) + ": field 'format_version': expected 1");
  }
  const auto jobs = doc.find("jobs");
  if (jobs == doc.end() || !jobs->is_array()) {
    throw InputError(std::string(source) + ": field 'jobs': expected an array");
  }
  auto resolve_path = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
  };

  BatchManifest manifest;
  for (std::size_t j = 0; j < jobs->size(); ++j) {
    const json& obj = (*jobs)[j];
    if (!obj.is_object()) throw InputError(field_error(source, j, "", "expected a job object"));
    BatchJob job;
    job.model = resolve_path(get_string(obj, source, j, "model"));
    job.input = resolve_path(get_string(obj, source, j, "input"));
    job.baseline = BaselineSpec::parse(get_string(obj, source, j, "baseline", "zeros"), base_dir);
    job.split = get_count(obj, source, j, "split", 0);
    try {
      for (const std::string& m : get_strings(obj, source, j, "methods", {"ig"})) {
        job.methods.push_back(parse_method(m));
      }
      for (const std::string& t : get_strings(obj, source, j, "targets", {"0:logit"})) {
        job.targets.push_back(TargetSelector::parse(t));
      }
      job.path.scheme = parse_scheme(get_string(obj, source, j, "scheme", "right"));
    } catch (const InputError& e) {
      throw InputError(std::string(source) + ": jobs[" + std::to_string(j) + "]: " + e.what());
    }
    job.path.steps = get_count(obj, source, j, "steps", kDefaultSteps);
    if (job.path.steps == 0) throw InputError(field_error(source, j, "steps", "must be positive"));
    if (const auto r = obj.find("refine"); r != obj.end()) {
      if (r->is_boolean()) {
        if (r->get<bool>()) job.refine = RefineOptions{};
      } else if (r->is_object()) {
        RefineOptions opts;
        if (const auto t = r->find("threshold"); t != r->end()) {
          if (!t->is_number()) throw InputError(field_error(source, j, "refine.threshold", "expected a number"));
          opts.threshold = t->get<double>();
        }
        opts.coarse_steps = get_count(*r, source, j, "coarse_steps", opts.coarse_steps);
        opts.fine_steps = get_count(*r, source, j, "fine_steps", opts.fine_steps);
        job.refine = opts;
      } else {
        throw InputError(field_error(source, j, "refine", "expected a boolean or an object"));
      }
    }
    manifest.jobs.push_back(std::move(job));
  }
  return manifest;
}

BatchManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path(), path.string());
}

BatchResult batch_run(const BatchManifest& manifest, const BatchConfig& config) {
  std::vector<LoadedJob> loaded;
  loaded.reserve(manifest.jobs.size());
  for (const BatchJob& job : manifest.jobs) loaded.push_back(load_job(job));

  struct Task {
    std::size_t job;
    Method method;
    TargetSelector target;
  };
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < manifest.jobs.size(); ++j) {
    for (Method m : manifest.jobs[j].methods) {
      for (const TargetSelector& t : manifest.jobs[j].targets) tasks.push_back({j, m, t});
    }
  }

  std::vector<JobOutcome> outcomes(tasks.size());
  auto execute = [&](std::size_t i) {
    const Task& task = tasks[i];
    const BatchJob& job = manifest.jobs[task.job];
    const LoadedJob& data = loaded[task.job];
    JobOutcome& out = outcomes[i];
    out.job_index = task.job;
    out.method = std::string(method_name(task.method));
    out.split_layer = job.split;
    out.target = task.target.to_string();
    if (!data.error.empty()) {
      out.error = data.error;
      return;
    }
    RunRequest request{task.method, job.path, job.split, task.target};
    try {
      RunResult run = job.refine ? refine(*data.model, data.input, data.baseline, request, *job.refine)
                                 : run_attribution(*data.model, data.input, data.baseline, request);
      if (!config.record_runtime) run.report.runtime_ms = 0.0;
      out.report = std::move(run.report);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, tasks.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) execute(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) execute(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  BatchResult result;
  result.rows = aggregate(outcomes);
  result.outcomes = std::move(outcomes);
  return result;
}

BatchResult batch_run(const std::filesystem::path& manifest, const BatchConfig& config) {
  return batch_run(load_manifest(manifest), config);
}

std::vector<BatchRow> aggregate(std::span<const JobOutcome> outcomes) {
  struct Accumulator {
    BatchRow row;
    double abs_total = 0.0;
    double rel_total = 0.0;
    std::size_t rel_count = 0;
  };
  std::map<std::tuple<std::string, std::size_t, std::string>, Accumulator> groups;
  for (const JobOutcome& o : outcomes) {
    Accumulator& acc = groups[{o.method, o.split_layer, o.target}];
    acc.row.method = o.method;
    acc.row.split_layer = o.split_layer;
    acc.row.target = o.target;
    if (!o.report) {
      acc.row.errors.push_back("job " + std::to_string(o.job_index) + ": " + o.error);
      continue;
    }
    ++acc.row.n;
    acc.abs_total += o.report->abs_error;
    acc.row.total_runtime_ms += o.report->runtime_ms;
    if (o.report->rel_error) {
      acc.rel_total += *o.report->rel_error;
      ++acc.rel_count;
    } else {
      ++acc.row.undefined_count;
    }
  }
  std::vector<BatchRow> rows;
  for (auto& [key, acc] : groups) {
    if (acc.row.n > 0) acc.row.mean_abs_error = acc.abs_total / static_cast<double>(acc.row.n);
    if (acc.rel_count > 0) acc.row.mean_rel_error = acc.rel_total / static_cast<double>(acc.rel_count);
    rows.push_back(std::move(acc.row));
  }
  return rows;
}

std::string batch_csv(const BatchResult& result) {
  std::string out =
      "method,split_layer,target,n,mean_abs_error,mean_rel_error,undefined_count,total_runtime_ms,"
      "errors\n";
  for (const BatchRow& r : result.rows) {
    std::string errors;
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      if (i) errors += "; ";
      errors += r.errors[i];
    }
    out += csv_quote(r.method) + "," + std::to_string(r.split_layer) + "," + csv_quote(r.target) +
           "," + std::to_string(r.n) + "," + format_number(r.mean_abs_error) + "," +
           format_number(r.mean_rel_error) + "," + std::to_string(r.undefined_count) + "," +
           format_number(r.total_runtime_ms) + "," + csv_quote(errors) + "\n";
  }
  return out;
}

}  // namespace attrib
