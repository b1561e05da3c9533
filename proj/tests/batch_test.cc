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

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "attrib/attribution.h"
#include "attrib/batch.h"
#include "attrib/errors.h"
#include "attrib/evaluation.h"
#include "attrib/fixtures.h"
#include "attrib/model_io.h"
#include "json.hpp"
#include "support.h"

namespace attrib {
namespace {

using nlohmann::json;

std::filesystem::path linear_workspace(const std::string& name) {
  const auto dir = testing::scratch_dir(name);
  save_model(fixtures::linear_model(), dir / "lin.model.json");
  save_tensor(Tensor::vector({1, 1}), dir / "x.tensor.json");
  save_tensor(Tensor::vector({-2, 0.5}), dir / "x2.tensor.json");
  return dir;
}

void write_manifest(const std::filesystem::path& path, const json& jobs) {
  write_text_file(path, json{{"format_version", 1}, {"jobs", jobs}}.dump(2));
}

// Drops the runtime column so timed runs can be compared.
std::string without_runtime(const std::string& csv) {
  std::stringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() > 7) cells.erase(cells.begin() + 7);
    for (const auto& c : cells) out += c + "|";
    out += "\n";
  }
  return out;
}

TEST(Batch, TwoLinearJobsGiveTwoRows) {
  const auto dir = linear_workspace("batch_two");
  write_manifest(dir / "m.json",
                 json::array({{{"model", "lin.model.json"}, {"input", "x.tensor.json"}, {"split", 0}},
                              {{"model", "lin.model.json"}, {"input", "x2.tensor.json"}, {"split", 1}}}));
  const BatchResult r = batch_run(dir / "m.json");
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.n, 1u);
    ASSERT_TRUE(row.mean_abs_error.has_value());
    EXPECT_LT(*row.mean_abs_error, 1e-12);
    EXPECT_TRUE(row.errors.empty());
  }
  const std::string csv = batch_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "method,split_layer,target,n,mean_abs_error,mean_rel_error,undefined_count,"
            "total_runtime_ms,errors");
}

TEST(Batch, CsvIsDeterministic) {
  const auto dir = testing::scratch_dir("batch_demo");
  fixtures::write_fixtures(dir, 3);
  const std::string a = batch_csv(batch_run(dir / "demo.manifest.json", {1, false}));
  const std::string b = batch_csv(batch_run(dir / "demo.manifest.json", {1, false}));
  const std::string c = batch_csv(batch_run(dir / "demo.manifest.json", {4, false}));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  const std::string timed = batch_csv(batch_run(dir / "demo.manifest.json", {3, true}));
  EXPECT_EQ(without_runtime(timed), without_runtime(a));
}

TEST(Batch, AggregatesReproducibleFromReports) {
  const auto dir = testing::scratch_dir("batch_agg");
  fixtures::write_fixtures(dir, 4);
  const BatchResult r = batch_run(dir / "demo.manifest.json", {2, true});
  struct Acc {
    std::size_t n = 0, undefined = 0, rel_n = 0;
    double abs = 0, rel = 0, runtime = 0;
  };
  std::map<std::tuple<std::string, std::size_t, std::string>, Acc> groups;
  for (const auto& o : r.outcomes) {
    ASSERT_TRUE(o.report.has_value()) << o.error;
    Acc& a = groups[{o.method, o.split_layer, o.target}];
    ++a.n;
    a.abs += o.report->abs_error;
    a.runtime += o.report->runtime_ms;
    if (o.report->rel_error) {
      a.rel += *o.report->rel_error;
      ++a.rel_n;
    } else {
      ++a.undefined;
    }
  }
  ASSERT_EQ(groups.size(), r.rows.size());
  auto it = groups.begin();
  for (const auto& row : r.rows) {
    const auto& [key, a] = *it++;
    EXPECT_EQ(std::get<0>(key), row.method);
    EXPECT_EQ(std::get<1>(key), row.split_layer);
    EXPECT_EQ(std::get<2>(key), row.target);
    EXPECT_EQ(row.n, a.n);
    EXPECT_EQ(row.undefined_count, a.undefined);
    EXPECT_EQ(*row.mean_abs_error, a.abs / static_cast<double>(a.n));
    if (a.rel_n) EXPECT_EQ(*row.mean_rel_error, a.rel / static_cast<double>(a.rel_n));
    EXPECT_EQ(row.total_runtime_ms, a.runtime);
  }
}

TEST(Batch, UndefinedRelativeErrorsCounted) {
  const auto dir = linear_workspace("batch_undef");
  write_manifest(dir / "m.json",
                 json::array({{{"model", "lin.model.json"}, {"input", "x.tensor.json"},
                               {"baseline", "x.tensor.json"}},
                              {{"model", "lin.model.json"}, {"input", "x2.tensor.json"}}}));
  const BatchResult r = batch_run(dir / "m.json");
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].n, 2u);
  EXPECT_EQ(r.rows[0].undefined_count, 1u);
  EXPECT_LT(*r.rows[0].mean_rel_error, 1e-12);
}

TEST(Batch, FailuresRecordedWithoutAborting) {
  const auto dir = linear_workspace("batch_fail");
  write_manifest(dir / "m.json",
                 json::array({{{"model", "missing.model.json"}, {"input", "x.tensor.json"},
                               {"methods", {"taylor"}}},
                              {{"model", "lin.model.json"}, {"input", "x.tensor.json"},
                               {"targets", {"0:prob"}}},
                              {{"model", "lin.model.json"}, {"input", "x.tensor.json"}}}));
  const BatchResult r = batch_run(dir / "m.json", {2, false});
  ASSERT_EQ(r.rows.size(), 3u);
  std::map<std::string, const BatchRow*> by_key;
  for (const auto& row : r.rows) by_key[row.method + "/" + row.target] = &row;
  const BatchRow& missing = *by_key.at("taylor/0:logit");
  EXPECT_EQ(missing.n, 0u);
  EXPECT_FALSE(missing.mean_abs_error.has_value());
  ASSERT_EQ(missing.errors.size(), 1u);
  EXPECT_NE(missing.errors[0].find("missing.model.json"), std::string::npos);
  EXPECT_EQ(by_key.at("ig/0:prob")->errors.size(), 1u);
  EXPECT_EQ(by_key.at("ig/0:logit")->n, 1u);

  const std::string csv = batch_csv(r);
  EXPECT_NE(csv.find("taylor,0,0:logit,0,undefined,undefined,0,0,"), std::string::npos) << csv;
}

TEST(Batch, ManifestErrors) {
  const std::filesystem::path base = "/tmp";
  EXPECT_THROW(parse_manifest("{", base), InputError);
  EXPECT_THROW(parse_manifest(R"({"jobs": []})", base), InputError);
  EXPECT_THROW(parse_manifest(R"({"format_version": 1})", base), InputError);
  try {
    parse_manifest(R"({"format_version": 1, "jobs": [{"model": "m", "input": "x"},
                       {"model": "m", "input": "x", "methods": ["gradcam"]}]})",
                   base, "bad.json");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("jobs[1]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_manifest(R"({"format_version": 1, "jobs": [{"input": "x"}]})", base), InputError);
  EXPECT_THROW(parse_manifest(R"({"format_version": 1, "jobs": [{"model": "m", "input": "x", "steps": 0}]})", base),
               InputError);
  EXPECT_THROW(parse_manifest(R"({"format_version": 1, "jobs": [{"model": "m", "input": "x", "refine": 3}]})", base),
               InputError);
}

TEST(Batch, ManifestDefaultsAndPaths) {
  const BatchManifest m = parse_manifest(
      R"({"format_version": 1, "jobs": [
           {"model": "a.model.json", "input": "/abs/x.tensor.json"},
           {"model": "a.model.json", "input": "x", "baseline": "b.tensor.json", "split": 3,
            "methods": ["odam", "taylor"], "targets": ["1:prob"], "steps": 9, "scheme": "left",
            "refine": {"threshold": 0.1, "fine_steps": 50}}]})",
      "/data/run");
  ASSERT_EQ(m.jobs.size(), 2u);
  const BatchJob& a = m.jobs[0];
  EXPECT_EQ(a.model, std::filesystem::path("/data/run/a.model.json"));
  EXPECT_EQ(a.input, std::filesystem::path("/abs/x.tensor.json"));
  EXPECT_EQ(a.baseline.kind, BaselineSpec::Kind::kZeros);
  EXPECT_EQ(a.split, 0u);
  EXPECT_EQ(a.methods, std::vector<Method>{Method::kIntegratedGradients});
  EXPECT_EQ(a.targets, std::vector<TargetSelector>{TargetSelector{}});
  EXPECT_EQ(a.path.steps, 256u);
  EXPECT_FALSE(a.refine.has_value());
  const BatchJob& b = m.jobs[1];
  EXPECT_EQ(b.baseline.path, std::filesystem::path("/data/run/b.tensor.json"));
  EXPECT_EQ(b.split, 3u);
  EXPECT_EQ(b.methods.size(), 2u);
  EXPECT_EQ(b.targets[0], (TargetSelector{1, TargetSpace::kProb}));
  EXPECT_EQ(b.path.steps, 9u);
  EXPECT_EQ(b.path.scheme, Scheme::kLeft);
  ASSERT_TRUE(b.refine.has_value());
  EXPECT_EQ(b.refine->threshold, 0.1);
  EXPECT_EQ(b.refine->coarse_steps, 256u);
  EXPECT_EQ(b.refine->fine_steps, 50u);
}

TEST(Batch, DepthTrendWithSingleStepMethod) {
  const auto dir = testing::scratch_dir("batch_depth");
  std::mt19937_64 rng(0);
  save_model(fixtures::toy_cnn(rng()), dir / "cnn.model.json");
  const auto splits = fixtures::toy_cnn_splits();
  json jobs = json::array();
  for (int i = 0; i < 20; ++i) {
    const std::string name = "x" + std::to_string(i) + ".tensor.json";
    save_tensor(fixtures::random_uniform({3, 8, 8}, rng), dir / name);
    for (std::size_t s : splits) {
      jobs.push_back({{"model", "cnn.model.json"}, {"input", name}, {"split", s},
                      {"methods", {"layercam"}}});
    }
  }
  write_manifest(dir / "m.json", jobs);
  const BatchResult r = batch_run(dir / "m.json", {4, false});
  ASSERT_EQ(r.rows.size(), splits.size());
  std::map<std::pair<std::size_t, std::size_t>, double> err;
  for (const auto& o : r.outcomes) {
    ASSERT_TRUE(o.report.has_value()) << o.error;
    err[{o.job_index / splits.size(), o.split_layer}] = o.report->abs_error;
  }
  int deeper_better = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    deeper_better += err.at({i, splits.back()}) <= err.at({i, splits.front()});
  }
  EXPECT_GE(deeper_better, 14) << deeper_better << " of 20";
}

TEST(Batch, BaselineSpec) {
  EXPECT_EQ(BaselineSpec::parse("zeros").kind, BaselineSpec::Kind::kZeros);
  EXPECT_EQ(BaselineSpec::parse("feature-zeros").kind, BaselineSpec::Kind::kFeatureZeros);
  const BaselineSpec f = BaselineSpec::parse("b.tensor.json", "/dir");
  EXPECT_EQ(f.kind, BaselineSpec::Kind::kTensorFile);
  EXPECT_EQ(f.to_string(), "/dir/b.tensor.json");
  EXPECT_THROW(BaselineSpec::parse(""), InputError);
  EXPECT_THROW(BaselineSpec::parse("/no/such.tensor.json").resolve(fixtures::linear_model()),
               InputError);
}

}  // namespace
}  // namespace attrib
