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

#include <fstream>
#include <iterator>
#include <random>

#include "attrib/errors.h"
#include "attrib/fixtures.h"
#include "attrib/model_io.h"
#include "attrib/render.h"
#include "support.h"

#ifndef ATTRIB_GOLDEN_DIR
#error "ATTRIB_GOLDEN_DIR must be defined"
#endif

namespace attrib {
namespace {

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize(Tensor::vector({2, -4, 0})), Tensor::vector({0.5, -1, 0}));
  EXPECT_EQ(normalize(Tensor::zeros({2, 3})), Tensor::zeros({2, 3}));
  std::mt19937_64 rng(1);
  const Tensor s = fixtures::random_normal({4, 4}, rng);
  EXPECT_LE(max_abs_diff(normalize(scaled(s, 3.0)), normalize(s)), 1e-15);
  EXPECT_EQ(max_abs(normalize(s)), 1.0);
}

TEST(Colormap, Table) {
  EXPECT_EQ(colormap(0.0), (Rgb{255, 255, 255}));
  EXPECT_EQ(colormap(1.0), (Rgb{255, 0, 0}));
  EXPECT_EQ(colormap(-1.0), (Rgb{0, 0, 255}));
  EXPECT_EQ(colormap(0.5), (Rgb{255, 128, 128}));
  EXPECT_EQ(colormap(-0.5), (Rgb{128, 128, 255}));
}

TEST(Colormap, MatchesFormulaEverywhere) {
  for (int i = -1000; i <= 1000; ++i) {
    const double v = i / 1000.0;
    const double r = std::floor(255.0 * (1.0 - std::abs(v)) + 0.5);
    const auto c = static_cast<std::uint8_t>(r);
    const Rgb expected = v >= 0 ? Rgb{255, c, c} : Rgb{c, c, 255};
    EXPECT_EQ(colormap(v), expected) << v;
  }
}

TEST(Colormap, Monotone) {
  Rgb prev = colormap(-1.0);
  for (int i = -999; i <= 0; ++i) {
    const Rgb cur = colormap(i / 1000.0);
    EXPECT_EQ(cur.b, 255);
    EXPECT_GE(cur.r, prev.r);
    EXPECT_GE(cur.g, prev.g);
    prev = cur;
  }
  for (int i = 1; i <= 1000; ++i) {
    const Rgb cur = colormap(i / 1000.0);
    EXPECT_EQ(cur.r, 255);
    EXPECT_LE(cur.g, prev.g);
    EXPECT_LE(cur.b, prev.b);
    prev = cur;
  }
}

TEST(Colormap, ClampsOutOfRange) {
  EXPECT_EQ(colormap(3.0), colormap(1.0));
  EXPECT_EQ(colormap(-7.0), colormap(-1.0));
}

TEST(Render, TwoByTwoGolden) {
  const Tensor map = Tensor::matrix({{1, -1}, {0, 0.5}});
  const std::string golden = read_bytes(std::filesystem::path(ATTRIB_GOLDEN_DIR) / "heatmap_2x2.ppm");
  ASSERT_EQ(golden.size(), 11u + 12u);
  EXPECT_EQ(encode_ppm(render_heatmap(map)), golden);
  const auto dir = testing::scratch_dir("render");
  render_heatmap(map, dir / "a.ppm");
  render_heatmap(map, dir / "b.ppm");
  EXPECT_EQ(read_bytes(dir / "a.ppm"), golden);
  EXPECT_EQ(read_bytes(dir / "b.ppm"), golden);
}

TEST(Render, MapRanks) {
  const Heatmap flat = make_heatmap(Tensor::vector({1, -2}));
  EXPECT_EQ(flat.height, 1u);
  EXPECT_EQ(flat.width, 2u);
  const Tensor chw({2, 1, 2}, std::vector<double>{1, 2, 3, -8});
  const Heatmap collapsed = make_heatmap(chw);
  EXPECT_EQ(collapsed.scores, (std::vector<double>{4.0 / 6.0, -1.0}));
  EXPECT_THROW(make_heatmap(Tensor({1, 1, 1, 1})), ShapeError);
}

TEST(Render, NearestUpsampling) {
  const Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor up = upsample_nearest(m, 4, 4);
  EXPECT_EQ(up, Tensor::matrix({{1, 1, 2, 2}, {1, 1, 2, 2}, {3, 3, 4, 4}, {3, 3, 4, 4}}));
  EXPECT_EQ(upsample_nearest(m, 2, 2), m);
}

TEST(Overlay, AlphaIdentities) {
  std::mt19937_64 rng(3);
  const Tensor image = fixtures::random_uniform({3, 4, 4}, rng);
  const Tensor map = fixtures::random_normal({2, 2}, rng);

  const RgbImage pure_image = overlay(image, map, 1.0);
  for (std::size_t i = 0; i < 16; ++i) {
    const auto q = [&](std::size_t c) {
      return static_cast<std::uint8_t>(std::floor(image[c * 16 + i] * 255.0 + 0.5));
    };
    EXPECT_EQ(pure_image.pixels[i], (Rgb{q(0), q(1), q(2)}));
  }

  const RgbImage pure_heat = overlay(image, map, 0.0);
  EXPECT_EQ(encode_ppm(pure_heat), encode_ppm(render_heatmap(upsample_nearest(map, 4, 4))));
}

TEST(Overlay, BlendsPerChannel) {
  const Tensor image({1, 1, 1}, std::vector<double>{1.0});
  const RgbImage out = overlay(image, Tensor::matrix({{-1}}), 0.5);
  // 0.5 * 255 + 0.5 * (0, 0, 255)
  EXPECT_EQ(out.pixels[0], (Rgb{128, 128, 255}));
}

TEST(Overlay, Errors) {
  const Tensor image = Tensor::zeros({3, 2, 2});
  EXPECT_THROW(overlay(image, Tensor::zeros({2, 2}), 1.5), InputError);
  EXPECT_THROW(overlay(image, Tensor::zeros({2, 2}), -0.1), InputError);
  EXPECT_THROW(overlay(Tensor::zeros({2, 2, 2}), Tensor::zeros({2, 2}), 0.5), ShapeError);
  EXPECT_THROW(render_heatmap(Tensor::zeros({2, 2}), "/nonexistent/dir/x.ppm"), InputError);
}

}  // namespace
}  // namespace attrib
