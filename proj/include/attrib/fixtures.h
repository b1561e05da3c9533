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

#ifndef ATTRIB_FIXTURES_H_
#define ATTRIB_FIXTURES_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "attrib/model.h"
#include "attrib/tensor.h"

namespace attrib::fixtures {

// F(x) = 1 - ReLU(1 - x) on a single input: saturates for x > 1.
Model saturation_model();

// y = 2 x0 - 3 x1.
Model linear_model();

// Five conv stages on [3, 8, 8] inputs (3x3 kernels, padding 1):
//   conv 3->4 relu | conv 4->4 relu maxpool | conv 4->8 relu |
//   conv 8->8 relu maxpool | conv 8->8 relu
// then flatten linear(32->16) relu linear(16->classes) softmax.
Model toy_cnn(std::uint64_t seed, std::size_t classes = 5);

// Split indices at the five stage outputs of toy_cnn, shallowest first.
std::vector<std::size_t> toy_cnn_splits();

// Triangle wave on [0, 1] with `teeth` teeth of slope +-amplitude plus a
// constant drift. Kinks sit on multiples of 1 / (2 teeth), so a right-point
// sum with `teeth` steps always samples the falling slope.
Model sawtooth_model(std::size_t teeth = 256, double amplitude = 1.0, double drift = 0.5);

// Random MLP with 1..max_layers linear layers (width <= max_width), ReLU or
// sigmoid between them, and an optional trailing softmax.
Model random_mlp(std::mt19937_64& rng, std::size_t max_layers = 3, std::size_t max_width = 16,
                 bool relu_only = false);

Tensor random_uniform(const Shape& shape, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0);
Tensor random_normal(const Shape& shape, std::mt19937_64& rng, double stddev = 1.0);

// Writes every fixture model, inputs and the demo manifest into `dir`.
void write_fixtures(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace attrib::fixtures

#endif  // ATTRIB_FIXTURES_H_
