// Copyright 2026 The sidescan_slam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "sss/association.hpp"

namespace sss {
namespace {

SonarImage textured(int rows, int cols, std::uint64_t seed) {
  SonarImage img;
  img.pixels = Grid<float>(rows, cols);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.5F, 1.5F);
  // Blocky texture so corners exist at the smoothing scale.
  std::vector<float> blocks(static_cast<std::size_t>((rows / 4 + 1) * (cols / 4 + 1)));
  for (float& b : blocks) b = u(rng);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      img.pixels(r, c) = blocks[static_cast<std::size_t>((r / 4) * (cols / 4 + 1) + c / 4)];
    }
  }
  img.column_resolution = 0.5;
  img.canonical = true;
  return img;
}

TEST(Fast, CornerOfBrightSquare) {
  Grid<float> img(21, 21, 0.0F);
  for (int r = 10; r < 21; ++r) {
    for (int c = 10; c < 21; ++c) img(r, c) = 1.0F;
  }
  EXPECT_TRUE(fast_corner_score(img, 10, 10, 0.2F).has_value());
  // Straight edge and flat regions are not corners.
  EXPECT_FALSE(fast_corner_score(img, 15, 10, 0.2F).has_value());
  EXPECT_FALSE(fast_corner_score(img, 4, 4, 0.2F).has_value());
  EXPECT_FALSE(fast_corner_score(img, 15, 15, 0.2F).has_value());
}

TEST(Fast, InvalidCircleIsRejected) {
  Grid<float> img(21, 21, 0.0F);
  for (int r = 10; r < 21; ++r) {
    for (int c = 10; c < 21; ++c) img(r, c) = 1.0F;
  }
  img(7, 10) = kInvalidPixel;
  EXPECT_FALSE(fast_corner_score(img, 10, 10, 0.2F).has_value());
}

TEST(Detection, TranslationCovariant) {
  const AssociationConfig cfg;
  const SonarImage a = textured(256, 256, 1);
  // Shift by whole grid cells so bucket membership is unchanged.
  const int dr = cfg.cell_size;
  const int dc = 2 * cfg.cell_size;
  SonarImage b = a;
  b.pixels = Grid<float>(256 + dr, 256 + dc, kInvalidPixel);
  for (int r = 0; r < 256; ++r) {
    for (int c = 0; c < 256; ++c) b.pixels(r + dr, c + dc) = a.pixels(r, c);
  }
  auto interior = [](const std::vector<Keypoint>& kps, int r0, int c0) {
    std::set<std::pair<int, int>> out;
    for (const Keypoint& k : kps) {
      const int r = k.row - r0;
      const int c = k.col - c0;
      if (r >= 16 && c >= 16 && r < 240 && c < 240) out.insert({r, c});
    }
    return out;
  };
  const auto ka = interior(detect_corners_grid(a, cfg), 0, 0);
  const auto kb = interior(detect_corners_grid(b, cfg), dr, dc);
  EXPECT_FALSE(ka.empty());
  EXPECT_EQ(ka, kb);
}

TEST(Detection, BucketLimit) {
  AssociationConfig cfg;
  cfg.max_per_cell = 2;
  const SonarImage a = textured(192, 192, 2);
  const auto kps = detect_corners_grid(a, cfg);
  std::map<std::pair<int, int>, int> per_cell;
  for (const Keypoint& k : kps) {
    EXPECT_TRUE(k.row >= 0 && k.row < 192 && k.col >= 0 && k.col < 192);
    ++per_cell[{k.row / cfg.cell_size, k.col / cfg.cell_size}];
  }
  for (const auto& [cell, n] : per_cell) EXPECT_LE(n, 2);
}

TEST(Descriptor, UnitNormAndFlatPatch) {
  const SonarImage a = textured(64, 64, 3);
  const Grid<float> smooth = smooth_image(a.pixels, 1.0);
  const auto d = compute_descriptor(smooth, 32, 32);
  ASSERT_TRUE(d.has_value());
  ASSERT_EQ(d->size(), static_cast<std::size_t>(kDescriptorSize));
  double n = 0.0;
  for (float v : *d) {
    EXPECT_GE(v, 0.0F);
    n += static_cast<double>(v) * v;
  }
  EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
  const Grid<float> flat(64, 64, 1.0F);
  EXPECT_FALSE(compute_descriptor(flat, 32, 32).has_value());
  EXPECT_FALSE(compute_descriptor(smooth, 3, 32).has_value());
}

TEST(Descriptor, DistanceIsMetricLike) {
  const std::vector<float> a = {1, 0, 0};
  const std::vector<float> b = {0, 1, 0};
  EXPECT_DOUBLE_EQ(descriptor_distance(a, a), 0.0);
  EXPECT_NEAR(descriptor_distance(a, b), std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(descriptor_distance(a, b), descriptor_distance(b, a));
}

TEST(Smoothing, InvalidStaysInvalidAndFlatStaysFlat) {
  Grid<float> img(20, 20, 2.0F);
  img(5, 5) = kInvalidPixel;
  const Grid<float> s = smooth_image(img, 1.5);
  EXPECT_FALSE(is_valid_pixel(s(5, 5)));
  EXPECT_NEAR(s(5, 6), 2.0F, 1e-5);
  EXPECT_NEAR(s(12, 12), 2.0F, 1e-5);
}

TEST(Matching, OneToOneWithinRadius) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pos(0.0, 100.0);
  std::uniform_real_distribution<float> val(0.0F, 1.0F);
  auto make = [&](int n, int id) {
    std::vector<Keypoint> out;
    for (int k = 0; k < n; ++k) {
      Keypoint kp;
      kp.image_id = id;
      kp.row = k;
      kp.geo = Vec3(pos(rng), pos(rng), 30.0);
      kp.descriptor = {val(rng), val(rng), val(rng)};
      out.push_back(kp);
    }
    return out;
  };
  const auto src = make(200, 0);
  const auto tgt = make(150, 1);
  const auto m = match_near_neighbor(src, tgt, 10.0);
  EXPECT_FALSE(m.empty());
  std::set<int> used;
  for (const Correspondence& c : m) {
    EXPECT_TRUE(used.insert(c.target.row).second);
    EXPECT_LE((c.source.geo - c.target.geo).head<2>().norm(), 10.0);
    EXPECT_NE(c.source.image_id, c.target.image_id);
    EXPECT_GE(c.descriptor_distance, 0.0);
  }
}

TEST(Matching, PicksSmallestDescriptorDistance) {
  Keypoint s;
  s.geo = Vec3(0, 0, 0);
  s.descriptor = {1, 0};
  Keypoint far = s;
  far.image_id = 1;
  far.row = 1;
  far.geo = Vec3(20, 0, 0);  // identical descriptor but outside the radius
  Keypoint good = far;
  good.row = 2;
  good.geo = Vec3(3, 0, 0);
  good.descriptor = {0.9F, 0.1F};
  Keypoint bad = good;
  bad.row = 3;
  bad.descriptor = {0, 1};
  const std::vector<Keypoint> src = {s};
  const std::vector<Keypoint> tgt = {far, good, bad};
  const auto m = match_near_neighbor(src, tgt, 10.0);
  ASSERT_EQ(m.size(), 1U);
  EXPECT_EQ(m[0].target.row, 2);
}

std::vector<Correspondence> ransac_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> row(0, 999);
  std::uniform_int_distribution<int> jitter(-1, 1);
  std::vector<Correspondence> out;
  for (int k = 0; k < 120; ++k) {
    Correspondence c;
    c.source.row = row(rng);
    c.source.col = k;
    c.target.col = k;
    c.target.row = k < 40 ? c.source.row + 37 + jitter(rng) : row(rng);
    out.push_back(c);
  }
  return out;
}

TEST(Ransac, PermutationInvariant) {
  const AssociationConfig cfg;
  auto key = [](const Correspondence& c) {
    return std::tuple(c.source.row, c.source.col, c.target.row, c.target.col);
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cands = ransac_instance(seed);
    std::set<std::tuple<int, int, int, int>> first;
    for (const auto& c : sliding_compatibility_ransac(cands, cfg).inliers) first.insert(key(c));
    std::mt19937_64 rng(seed + 100);
    std::shuffle(cands.begin(), cands.end(), rng);
    std::set<std::tuple<int, int, int, int>> second;
    for (const auto& c : sliding_compatibility_ransac(cands, cfg).inliers) second.insert(key(c));
    EXPECT_EQ(first, second);
    EXPECT_GE(first.size(), 40U);
  }
}

TEST(Ransac, ReversedRows) {
  RowModel model{true, 1000};
  Correspondence c;
  c.source.row = 100;
  c.target.row = 800;  // read as 199
  EXPECT_EQ(model.row_difference(c), 99);
  EXPECT_EQ(RowModel{}.row_difference(c), 700);
}

TEST(Ransac, FlagsMatchInlierList) {
  const AssociationConfig cfg;
  const auto cands = ransac_instance(7);
  const RansacResult r = sliding_compatibility_ransac(cands, cfg);
  ASSERT_EQ(r.candidates.size(), cands.size());
  std::size_t flagged = 0;
  for (const auto& c : r.candidates) {
    flagged += c.inlier ? 1 : 0;
    if (c.inlier) {
      EXPECT_LE(std::abs(c.target.row - c.source.row - r.hypothesis), 2);
    }
  }
  EXPECT_EQ(flagged, r.inliers.size());
}

TEST(Ransac, EmptyInput) {
  const RansacResult r = sliding_compatibility_ransac({}, AssociationConfig{});
  EXPECT_TRUE(r.inliers.empty());
  EXPECT_TRUE(r.candidates.empty());
}

}  // namespace
}  // namespace sss
