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

#include "attrib/fixtures.h"

#include <cmath>
#include <string>

#include "attrib/model_io.h"
#include "json.hpp"

namespace attrib::fixtures {

Model saturation_model() {
  std::vector<LayerSpec> layers;
  layers.push_back(LayerSpec::linear(Tensor::matrix({{-1.0}}), Tensor::vector({1.0})));
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::linear(Tensor::matrix({{-1.0}}), Tensor::vector({1.0})));
  return Model("saturation", {1}, std::move(layers));
}

Model linear_model() {
  return Model("linear", {2},
               {LayerSpec::linear(Tensor::matrix({{2.0, -3.0}}), Tensor::vector({0.0}))});
}

Tensor random_uniform(const Shape& shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Tensor random_normal(const Shape& shape, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(shape);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Model toy_cnn(std::uint64_t seed, std::size_t classes) {
  std::mt19937_64 rng(seed);
  auto conv = [&](std::size_t in, std::size_t out) {
    return LayerSpec::conv2d(random_normal({out, in, 3, 3}, rng, std::sqrt(2.0 / (9.0 * in))),
                             random_normal({out}, rng, 0.1), {1, 1}, {1, 1});
  };
  auto dense = [&](std::size_t in, std::size_t out) {
    return LayerSpec::linear(random_normal({out, in}, rng, std::sqrt(2.0 / in)),
                             random_normal({out}, rng, 0.1));
  };
  std::vector<LayerSpec> layers;
  layers.push_back(conv(3, 4));
  layers.push_back(LayerSpec::relu());
  layers.push_back(conv(4, 4));
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::maxpool2d({2, 2}, {2, 2}));
  layers.push_back(conv(4, 8));
  layers.push_back(LayerSpec::relu());
  layers.push_back(conv(8, 8));
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::maxpool2d({2, 2}, {2, 2}));
  layers.push_back(conv(8, 8));
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::flatten());
  layers.push_back(dense(32, 16));
  layers.push_back(LayerSpec::relu());
  layers.push_back(dense(16, classes));
  layers.push_back(LayerSpec::softmax());
  return Model("toy_cnn", {3, 8, 8}, std::move(layers));
}

std::vector<std::size_t> toy_cnn_splits() { return {2, 5, 7, 10, 12}; }

Model sawtooth_model(std::size_t teeth, double amplitude, double drift) {
  const std::size_t units = 2 * teeth;
  Tensor w_in({units, 1}, 1.0);
  Tensor b_in({units});
  Tensor w_out({1, units});
  for (std::size_t j = 0; j < units; ++j) {
    b_in[j] = -static_cast<double>(j) / static_cast<double>(units);
    w_out[j] = j == 0 ? amplitude + drift : (j % 2 ? -2.0 * amplitude : 2.0 * amplitude);
  }
  std::vector<LayerSpec> layers;
  layers.push_back(LayerSpec::linear(std::move(w_in), std::move(b_in)));
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::linear(std::move(w_out), Tensor::vector({0.0})));
  return Model("sawtooth", {1}, std::move(layers));
}

Model random_mlp(std::mt19937_64& rng, std::size_t max_layers, std::size_t max_width,
                 bool relu_only) {
  std::uniform_int_distribution<std::size_t> depth_dist(1, max_layers);
  std::uniform_int_distribution<std::size_t> width_dist(2, max_width);
  std::bernoulli_distribution coin(0.5);
  const std::size_t depth = depth_dist(rng);
  const std::size_t input = width_dist(rng);
  std::vector<LayerSpec> layers;
  std::size_t width = input;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t out = width_dist(rng);
    layers.push_back(LayerSpec::linear(random_normal({out, width}, rng, std::sqrt(2.0 / width)),
                                       random_normal({out}, rng, 0.5)));
    width = out;
    if (l + 1 < depth) {
      layers.push_back(relu_only || coin(rng) ? LayerSpec::relu() : LayerSpec::sigmoid());
    }
  }
  if (coin(rng)) layers.push_back(LayerSpec::softmax());
  return Model("random_mlp", {input}, std::move(layers));
}

void write_fixtures(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(seed);

  save_model(saturation_model(), dir / "saturation.model.json");
  save_tensor(Tensor::vector({2.0}), dir / "saturation_x.tensor.json");
  save_model(linear_model(), dir / "linear.model.json");
  save_tensor(Tensor::vector({1.0, 1.0}), dir / "linear_x.tensor.json");
  save_tensor(Tensor::vector({3.0, -1.0}), dir / "linear_x2.tensor.json");
  save_model(sawtooth_model(), dir / "sawtooth.model.json");
  save_tensor(Tensor::vector({1.0}), dir / "sawtooth_x.tensor.json");
  save_model(toy_cnn(rng()), dir / "toy_cnn.model.json");
  save_tensor(random_uniform({3, 8, 8}, rng), dir / "toy_cnn_x.tensor.json");

  using nlohmann::json;
  json jobs = json::array();
  jobs.push_back({{"model", "linear.model.json"}, {"input", "linear_x.tensor.json"},
                  {"baseline", "zeros"}, {"split", 0}, {"methods", {"ig"}},
                  {"targets", {"0:logit"}}, {"steps", 256}});
  jobs.push_back({{"model", "linear.model.json"}, {"input", "linear_x2.tensor.json"},
                  {"baseline", "zeros"}, {"split", 0}, {"methods", {"grad-input"}},
                  {"targets", {"0:logit"}}});
  jobs.push_back({{"model", "saturation.model.json"}, {"input", "saturation_x.tensor.json"},
                  {"baseline", "zeros"}, {"split", 0}, {"methods", {"ig", "grad-input", "taylor"}},
                  {"targets", {"0:logit"}}, {"steps", 512}});
  jobs.push_back({{"model", "sawtooth.model.json"}, {"input", "sawtooth_x.tensor.json"},
                  {"baseline", "zeros"}, {"split", 0}, {"methods", {"ig"}},
                  {"targets", {"0:logit"}}, {"refine", true}});
  for (std::size_t s : toy_cnn_splits()) {
    jobs.push_back({{"model", "toy_cnn.model.json"}, {"input", "toy_cnn_x.tensor.json"},
                    {"baseline", "zeros"}, {"split", s},
                    {"methods", {"ig", "layercam", "layercam-mod", "odam"}},
                    {"targets", {"0:logit", "0:prob"}}, {"steps", 64}});
  }
  json manifest = {{"format_version", 1}, {"jobs", jobs}};
  write_text_file(dir / "demo.manifest.json", manifest.dump(2) + "\n");
}

}  // namespace attrib::fixtures
