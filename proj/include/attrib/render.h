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

#ifndef ATTRIB_RENDER_H_
#define ATTRIB_RENDER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "attrib/tensor.h"

namespace attrib {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;  // row-major
};

// S / max|S|, sign-preserving. An all-zero map stays all zero.
Tensor normalize(const Tensor& scores);

// Diverging ramp: blue (-1) through white (0) to red (+1), rounding half up.
// Values outside [-1, 1] are clamped; the first such clamp is logged.
Rgb colormap(double v);

struct Heatmap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> scores;  // normalized, in [-1, 1]
  RgbImage rgb;
};

// Accepts a [H, W] map, a rank-1 map (one row), or a [C, H, W] map (summed
// over channels first).
Heatmap make_heatmap(const Tensor& map);

// Nearest-neighbour resize of a [H, W] map.
Tensor upsample_nearest(const Tensor& map, std::size_t height, std::size_t width);

// Binary PPM (P6, maxval 255).
std::string encode_ppm(const RgbImage& image);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);

RgbImage render_heatmap(const Tensor& map);
void render_heatmap(const Tensor& map, const std::filesystem::path& out_path);

// alpha * image + (1 - alpha) * heatmap per channel. `image` is [3, H, W] or
// [1, H, W] (or [H, W]) with values in [0, 1]; the map is upsampled to H x W.
RgbImage overlay(const Tensor& image, const Tensor& map, double alpha);
void overlay(const Tensor& image, const Tensor& map, double alpha,
             const std::filesystem::path& out_path);

}  // namespace attrib

#endif  // ATTRIB_RENDER_H_
