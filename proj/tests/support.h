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

#ifndef ATTRIB_TESTS_SUPPORT_H_
#define ATTRIB_TESTS_SUPPORT_H_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "attrib/autodiff.h"
#include "attrib/fixtures.h"
#include "attrib/model.h"
#include "attrib/tensor.h"

namespace attrib::testing {

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("attrib_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct CnnCase {
  Model model;
  Tensor x;
};

// Independent toy CNNs, each paired with one uniform [0, 1) image.
inline std::vector<CnnCase> toy_cnn_fleet(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CnnCase> fleet;
  fleet.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Model model = fixtures::toy_cnn(rng());
    Tensor x = fixtures::random_uniform(model.input_shape(), rng);
    fleet.push_back({std::move(model), std::move(x)});
  }
  return fleet;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Riemann sum for F(x) = 1 - relu(1 - x) along [0, x]: the integrand dF/dx is
// 1 strictly below 1 and 0 from 1 on (relu'(0) = 0).
inline double saturation_riemann(double x, std::size_t m, bool right) {
  double total = 0.0;
  for (std::size_t k = right ? 1 : 0; k < (right ? m + 1 : m); ++k) {
    const double p = x * static_cast<double>(k) / static_cast<double>(m);
    total += p < 1.0 ? 1.0 : 0.0;
  }
  return x * total / static_cast<double>(m);
}

// Relative max deviation, scaled by the larger reference magnitude.
inline double relative_deviation(const Tensor& actual, const Tensor& reference) {
  return max_abs_diff(actual, reference) / std::max(max_abs(reference), 1e-12);
}

struct PrimitiveCase {
  Primitive op;
  Shape in;
};

// One or more configurations of every primitive kind.
inline std::vector<PrimitiveCase> primitive_cases(std::mt19937_64& rng) {
  auto share = [](Tensor t) { return std::make_shared<const Tensor>(std::move(t)); };
  using fixtures::random_normal;
  return {
      {Linear{share(random_normal({4, 6}, rng))}, {6}},
      {Conv2d{share(random_normal({3, 2, 3, 3}, rng)), {1, 1}, {1, 1}}, {2, 5, 5}},
      {Conv2d{share(random_normal({2, 2, 2, 3}, rng)), {2, 1}, {0, 1}}, {2, 6, 5}},
      {AddBias{share(random_normal({3}, rng))}, {3, 2, 2}},
      {Relu{}, {8}},
      {Sigmoid{}, {8}},
      {Softmax{}, {6}},
      {MaxPool2d{{2, 2}, {2, 2}}, {2, 4, 4}},
      {MaxPool2d{{3, 3}, {1, 1}}, {1, 4, 4}},
      {AvgPool2d{{2, 2}, {2, 2}}, {2, 4, 4}},
      {Flatten{}, {2, 3, 2}},
  };
}

// Backward against central differences of w . op(x) at `points` random x
// kept at least 1e-3 from any kink. Returns the worst relative deviation.
inline double primitive_deviation(const Primitive& op, const Shape& in_shape, int points,
                                  std::mt19937_64& rng) {
  double worst = 0.0;
  int accepted = 0;
  for (int tries = 0; accepted < points; ++tries) {
    if (tries > 100000) throw std::runtime_error("no smooth sample for " + primitive_name(op));
    const Tensor x = fixtures::random_normal(in_shape, rng);
    Tape tape;
    const NodeId in = tape.input(x);
    const NodeId out = tape.apply(op, in);
    if (tape.kink_margin() < 1e-3) continue;
    ++accepted;
    const Tensor w = fixtures::random_normal(tape.value(out).shape(), rng);
    const Tensor analytic = tape.backward(out, w, in);
    const Tensor numeric = finite_diff_gradient(
        [&](const Tensor& p) {
          const Tensor y = apply(op, p);
          double s = 0.0;
          for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
          return s;
        },
        x, 1e-6);
    worst = std::max(worst, relative_deviation(analytic, numeric));
  }
  return worst;
}

}  // namespace attrib::testing

#endif  // ATTRIB_TESTS_SUPPORT_H_
