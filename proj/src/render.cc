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

#include "attrib/render.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>

#include "attrib/attribution.h"
#include "attrib/errors.h"
#include "attrib/model_io.h"

namespace attrib {

namespace {

std::uint8_t round_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

Tensor as_plane(const Tensor& map) {
  switch (map.rank()) {
    case 1:
      return map.reshaped({1, map.size()});
    case 2:
      return map;
    case 3:
      return collapse_channels(map);
    default:
      throw ShapeError("cannot render a map of shape " + shape_string(map.shape()));
  }
}

}  // namespace

Tensor normalize(const Tensor& scores) {
  const double peak = max_abs(scores);
  if (peak == 0.0) return Tensor(scores.shape());
  Tensor out = scores;
  for (double& v : out.data()) v /= peak;
  return out;
}

Rgb colormap(double v) {
  if (!(v >= -1.0 && v <= 1.0)) {
    static std::once_flag logged;
    std::call_once(logged, [v] {
      std::cerr << "warning: colormap value " << v << " outside [-1, 1] clamped\n";
    });
    v = std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0);
  }
  if (v >= 0.0) {
    const std::uint8_t c = round_channel(255.0 * (1.0 - v));
    return {255, c, c};
  }
  const std::uint8_t c = round_channel(255.0 * (1.0 + v));
  return {c, c, 255};
}

Heatmap make_heatmap(const Tensor& map) {
  const Tensor plane = normalize(as_plane(map));
  Heatmap heat;
  heat.height = plane.shape()[0];
  heat.width = plane.shape()[1];
  heat.scores = plane.values();
  heat.rgb.width = heat.width;
  heat.rgb.height = heat.height;
  heat.rgb.pixels.reserve(plane.size());
  for (double v : heat.scores) heat.rgb.pixels.push_back(colormap(v));
  return heat;
}

Tensor upsample_nearest(const Tensor& map, std::size_t height, std::size_t width) {
  if (map.rank() != 2) throw ShapeError("upsample_nearest expects a [H, W] map");
  const std::size_t src_h = map.shape()[0], src_w = map.shape()[1];
  if (src_h == height && src_w == width) return map;
  Tensor out({height, width});
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = y * src_h / height;
    for (std::size_t x = 0; x < width; ++x) out[y * width + x] = map[sy * src_w + x * src_w / width];
  }
  return out;
}

std::string encode_ppm(const RgbImage& image) {
  if (image.pixels.size() != image.width * image.height) {
    throw ShapeError("image pixel count does not match its extents");
  }
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + 3 * image.pixels.size());
  for (const Rgb& p : image.pixels) {
    out.push_back(static_cast<char>(p.r));
    out.push_back(static_cast<char>(p.g));
    out.push_back(static_cast<char>(p.b));
  }
  return out;
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  write_text_file(path, encode_ppm(image));
}

RgbImage render_heatmap(const Tensor& map) { return make_heatmap(map).rgb; }

void render_heatmap(const Tensor& map, const std::filesystem::path& out_path) {
  write_ppm(render_heatmap(map), out_path);
}

RgbImage overlay(const Tensor& image, const Tensor& map, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("overlay alpha must lie in [0, 1]");
  Tensor chw = image.rank() == 2 ? image.reshaped({1, image.shape()[0], image.shape()[1]}) : image;
  if (chw.rank() != 3 || (chw.shape()[0] != 1 && chw.shape()[0] != 3)) {
    throw ShapeError("overlay image must be [3, H, W], [1, H, W] or [H, W], got " +
                     shape_string(image.shape()));
  }
  const std::size_t channels = chw.shape()[0], height = chw.shape()[1], width = chw.shape()[2];
  const Tensor plane = upsample_nearest(as_plane(map), height, width);
  const Heatmap heat = make_heatmap(plane);

  RgbImage out;
  out.width = width;
  out.height = height;
  out.pixels.resize(width * height);
  const std::size_t area = width * height;
  for (std::size_t i = 0; i < area; ++i) {
    const Rgb h = heat.rgb.pixels[i];
    const double hv[3] = {double(h.r), double(h.g), double(h.b)};
    std::uint8_t mixed[3];
    for (std::size_t c = 0; c < 3; ++c) {
      const double src = std::clamp(chw[(channels == 3 ? c : 0) * area + i], 0.0, 1.0) * 255.0;
      mixed[c] = round_channel(alpha * src + (1.0 - alpha) * hv[c]);
    }
    out.pixels[i] = {mixed[0], mixed[1], mixed[2]};
  }
  return out;
}

void overlay(const Tensor& image, const Tensor& map, double alpha,
             const std::filesystem::path& out_path) {
  write_ppm(overlay(image, map, alpha), out_path);
}

}  // namespace attrib
