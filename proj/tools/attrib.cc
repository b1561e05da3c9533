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

// attrib: command-line front end for the attribution engine.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attrib/attribution.h"
#include "attrib/batch.h"
#include "attrib/documents.h"
#include "attrib/errors.h"
#include "attrib/evaluation.h"
#include "attrib/fixtures.h"
#include "attrib/model_io.h"
#include "attrib/render.h"

namespace {

using namespace attrib;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

struct RunOptions {
  std::string model;
  std::string input;
  std::string baseline = "zeros";
  bool feature_baseline = false;
  std::size_t split = 0;
  std::string scheme = "right";
  std::string target = "0:logit";
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--model", o.model, "Model file (.model.json)")->required();
  cmd->add_option("--input", o.input, "Input tensor file (.tensor.json)")->required();
  cmd->add_option("--baseline", o.baseline,
                  "Input-space baseline: zeros, a tensor file, or feature-zeros")
      ->capture_default_str();
  cmd->add_flag("--feature-baseline", o.feature_baseline,
                "Use a zero feature-space baseline (no input-level baseline)");
  cmd->add_option("--split", o.split, "Split index: layers before it form the head")
      ->capture_default_str();
  cmd->add_option("--scheme", o.scheme, "Riemann scheme: right or left")->capture_default_str();
  cmd->add_option("--target", o.target, "Target as index[:logit|:prob]")->capture_default_str();
}

Baseline resolve_baseline(const RunOptions& o, const Model& model) {
  if (o.feature_baseline) return FeatureZeros{};
  return BaselineSpec::parse(o.baseline).resolve(model);
}

struct AttributeOptions {
  RunOptions run;
  std::string method = "ig";
  std::size_t steps = kDefaultSteps;
  bool refine = false;
  std::string report;
  std::string map;
};

int cmd_attribute(const AttributeOptions& o, bool steps_given, bool scheme_given) {
  const Model model = load_model(o.run.model);
  const Tensor x = load_tensor(o.run.input);
  RunRequest request;
  request.method = parse_method(o.method);
  if (request.method == Method::kOdamCombined) {
    throw InputError("method 'odam-combine' is only available through the library");
  }
  request.path.steps = o.steps;
  request.path.scheme = parse_scheme(o.run.scheme);
  request.split_index = o.run.split;
  request.target = TargetSelector::parse(o.run.target);
  if (!uses_steps(request.method)) {
    if (steps_given) warn("steps ignored for method '" + o.method + "'");
    if (scheme_given) warn("scheme ignored for method '" + o.method + "'");
  }
  if (o.refine && request.method != Method::kIntegratedGradients) {
    warn("refine ignored for method '" + o.method + "'");
  }
  const Baseline baseline = resolve_baseline(o.run, model);
  const RunResult result = o.refine ? refine(model, x, baseline, request)
                                    : run_attribution(model, x, baseline, request);
  for (const auto& note : result.report.meta.notes) warn(note);
  emit(report_to_json(result.report), o.report);
  if (!o.map.empty()) write_text_file(o.map, map_to_json(result.map));
  return kExitOk;
}

std::vector<std::size_t> parse_step_list(const std::string& text) {
  std::vector<std::size_t> steps;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != item.size() || v == 0) throw InputError("invalid step count '" + item + "'");
    steps.push_back(static_cast<std::size_t>(v));
  }
  if (steps.empty()) throw InputError("empty step list");
  return steps;
}

int cmd_convergence(const RunOptions& o, const std::string& m_list, const std::string& out) {
  const Model model = load_model(o.model);
  const Tensor x = load_tensor(o.input);
  const auto steps = parse_step_list(m_list);
  const auto rows = convergence_study(model, x, resolve_baseline(o, model), o.split, steps,
                                      parse_scheme(o.scheme), TargetSelector::parse(o.target));
  emit(convergence_csv(rows), out);
  return kExitOk;
}

int cmd_batch(const std::string& manifest, const std::string& out, std::size_t workers,
              bool no_timing) {
  if (workers == 0) throw InputError("--workers must be at least 1");
  BatchConfig config{workers, !no_timing};
  const BatchResult result = batch_run(std::filesystem::path(manifest), config);
  for (const auto& outcome : result.outcomes) {
    if (!outcome.error.empty()) {
      warn("job " + std::to_string(outcome.job_index) + " " + outcome.method + ": " +
           outcome.error);
    }
  }
  emit(batch_csv(result), out);
  return kExitOk;
}

int cmd_render(const std::string& map_path, const std::string& image_path, double alpha,
               const std::string& out) {
  const Tensor map = load_render_map(map_path);
  if (image_path.empty()) {
    render_heatmap(map, out);
  } else {
    overlay(load_tensor(image_path), map, alpha, out);
  }
  return kExitOk;
}

int cmd_check(const std::string& model_path, std::uint64_t seed, std::size_t samples,
              double tolerance, double h) {
  const Model model = load_model(model_path);
  const SplitView view(model, 0);
  const bool normalized = model.layers().back().is_normalization();
  const std::size_t outputs = shape_size(model.output_shape());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, outputs - 1);
  const double min_margin = 10.0 * h;
  constexpr int kMaxTries = 1000;

  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const TargetSelector target{pick(rng), normalized ? TargetSpace::kProb : TargetSpace::kLogit};
    Tensor x = fixtures::random_uniform(model.input_shape(), rng, -1.0, 1.0);
    int tries = 1;
    while (view.forward_tail(x, target).tape.kink_margin() < min_margin) {
      if (++tries > kMaxTries) {
        throw NumericalError("no smooth sample point found after " + std::to_string(kMaxTries) +
                             " draws");
      }
      x = fixtures::random_uniform(model.input_shape(), rng, -1.0, 1.0);
    }
    const Tensor analytic = view.forward_tail(x, target).gradient();
    const Tensor numeric = finite_diff_gradient(
        [&](const Tensor& p) { return view.forward_tail(p, target).value; }, x, h);
    const double scale = std::max(max_abs(analytic), 1e-12);
    const double deviation = max_abs_diff(analytic, numeric) / scale;
    worst = std::max(worst, deviation);
    std::printf("sample %zu target %s deviation %.3e\n", i, target.to_string().c_str(), deviation);
    if (deviation > tolerance) {
      std::fprintf(stderr, "sample %zu exceeds tolerance %.1e (deviation %.3e)\n", i, tolerance,
                   deviation);
    }
  }
  std::printf("max relative deviation %.3e\n", worst);
  return worst > tolerance ? kExitNumerical : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer attribution with integrated gradients and CAM-style baselines."};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.footer(
      "Option precedence: command-line flags override values from --config,\n"
      "which override built-in defaults. Exit codes: 0 success, 1 input error,\n"
      "2 numerical error.");
  app.require_subcommand(1);

  AttributeOptions attribute;
  auto* attr_cmd = app.add_subcommand("attribute", "Attribute one target at one split layer");
  add_run_options(attr_cmd, attribute.run);
  attr_cmd->add_option("--method", attribute.method,
                       "ig, grad-input, taylor, layercam, layercam-mod or odam")
      ->capture_default_str();
  auto* steps_opt = attr_cmd->add_option("--steps", attribute.steps, "Riemann steps (ig only)")
                        ->capture_default_str();
  attr_cmd->add_flag("--refine", attribute.refine,
                     "Rerun ig with more steps when the relative error is large");
  attr_cmd->add_option("--report", attribute.report, "Report output path (default stdout)");
  attr_cmd->add_option("--map", attribute.map, "Attribution map output path");

  RunOptions conv;
  std::string m_list = "1,8,64,512";
  std::string conv_out;
  auto* conv_cmd = app.add_subcommand("convergence", "Attribution error against step count");
  add_run_options(conv_cmd, conv);
  conv_cmd->add_option("--m-list", m_list, "Comma-separated ascending step counts")
      ->capture_default_str();
  conv_cmd->add_option("--out", conv_out, "CSV output path (default stdout)");

  std::string manifest;
  std::string batch_out;
  std::size_t workers = 1;
  bool no_timing = false;
  auto* batch_cmd = app.add_subcommand("batch", "Run a manifest of attribution jobs");
  batch_cmd->add_option("--manifest", manifest, "Manifest file")->required();
  batch_cmd->add_option("--out", batch_out, "CSV output path (default stdout)");
  batch_cmd->add_option("--workers", workers, "Worker threads")
      ->envname("ATTRIB_WORKERS")
      ->capture_default_str();
  batch_cmd->add_flag("--no-timing", no_timing, "Write 0 for runtimes");

  std::string render_map;
  std::string render_image;
  std::string render_out;
  double alpha = 0.5;
  auto* render_cmd = app.add_subcommand("render", "Render a map as a PPM heatmap or overlay");
  render_cmd->add_option("--map", render_map, "Map document or tensor file")->required();
  render_cmd->add_option("--image", render_image, "Image tensor in [0, 1] for an overlay");
  render_cmd->add_option("--alpha", alpha, "Image weight in the overlay")->capture_default_str();
  render_cmd->add_option("--out", render_out, "PPM output path")->required();

  std::string check_model;
  std::uint64_t check_seed = 0;
  std::size_t check_samples = 20;
  double check_tol = 1e-4;
  double check_h = 1e-5;
  auto* check_cmd = app.add_subcommand("check", "Compare gradients against finite differences");
  check_cmd->add_option("--model", check_model, "Model file")->required();
  check_cmd->add_option("--seed", check_seed, "Sampling seed")->capture_default_str();
  check_cmd->add_option("--samples", check_samples, "Sample points")->capture_default_str();
  check_cmd->add_option("--tolerance", check_tol, "Maximum relative deviation")
      ->capture_default_str();
  check_cmd->add_option("--fd-step", check_h, "Central difference step")->capture_default_str();

  std::string fixtures_out;
  std::uint64_t fixtures_seed = 0;
  auto* gen_cmd = app.add_subcommand("gen-fixtures", "Write the bundled fixture models");
  gen_cmd->add_option("--out", fixtures_out, "Output directory")->required();
  gen_cmd->add_option("--seed", fixtures_seed, "Seed for random weights")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*attr_cmd) {
      return cmd_attribute(attribute, steps_opt->count() > 0, attr_cmd->count("--scheme") > 0);
    }
    if (*conv_cmd) return cmd_convergence(conv, m_list, conv_out);
    if (*batch_cmd) return cmd_batch(manifest, batch_out, workers, no_timing);
    if (*render_cmd) return cmd_render(render_map, render_image, alpha, render_out);
    if (*check_cmd) return cmd_check(check_model, check_seed, check_samples, check_tol, check_h);
    if (*gen_cmd) {
      fixtures::write_fixtures(fixtures_out, fixtures_seed);
      return kExitOk;
    }
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
