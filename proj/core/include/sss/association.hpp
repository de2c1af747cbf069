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

/**
 * @file association.hpp
 * @brief Keypoint detection, description and matching between canonical,
 * geo-referenced side-scan images.
 *
 * Detection runs a FAST-9 segment test independently in each grid cell so
 * keypoints spread over the whole image. Descriptors are 128-bin gradient
 * orientation histograms at a fixed scale and orientation. Matching first
 * restricts candidates by geo-referenced distance, then keeps only pairs
 * whose row offset agrees with the dominant offset (sliding compatibility).
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sss/geometry.hpp"
#include "sss/grid.hpp"
#include "sss/sonar_image.hpp"

namespace sss {

inline constexpr int kDescriptorSize = 128;
/// Pixels needed around a keypoint for the 16x16 patch plus gradients.
inline constexpr int kDescriptorRadius = 9;

struct Keypoint {
  int image_id = 0;
  int row = 0;
  int col = 0;
  Side side = Side::kStarboard;
  Vec3 geo = Vec3::Zero();
  float score = 0.0F;
  /// Empty until described; L2-normalized afterwards.
  std::vector<float> descriptor;
};

struct Correspondence {
  Keypoint source;
  Keypoint target;
  /// NaN when unknown (annotated correspondences).
  double descriptor_distance = 0.0;
  bool inlier = false;
};

struct AssociationConfig {
  int cell_size = 64;         // pixels
  int max_per_cell = 4;
  float corner_threshold = 0.12F;  // intensity delta on the canonical image
  double radius = 10.0;       // meters, geo-referenced search radius
  int ransac_row_tolerance = 2;    // pings
  int ransac_iterations = 500;
  std::uint64_t rng_seed = 1;
  double blur_sigma = 1.0;    // pixels, 0 disables smoothing
  double max_invalid_fraction = 0.5;

  void validate() const;
};

/// Gaussian smoothing that ignores invalid pixels; invalid stays invalid.
[[nodiscard]] Grid<float> smooth_image(const Grid<float>& pixels, double sigma);

/// FAST-9 segment test at one pixel. Returns the corner score, or nullopt if
/// the pixel is not a corner or its circle touches invalid pixels.
[[nodiscard]] std::optional<float> fast_corner_score(const Grid<float>& img,
                                                     int row, int col,
                                                     float threshold);

/// Grid-bucketed corner detection. Keypoints carry geo-references when the
/// image has them; descriptors are left empty.
[[nodiscard]] std::vector<Keypoint> detect_corners_grid(const SonarImage& image,
                                                        const AssociationConfig& cfg);

/// Descriptor of the patch centred at (row, col) of an already smoothed image,
/// or nullopt near the border, over invalid pixels, or on a flat patch.
[[nodiscard]] std::optional<std::vector<float>> compute_descriptor(
    const Grid<float>& smoothed, int row, int col);

/// Detect + describe; keypoints without a descriptor are dropped. With
/// `half_turn` the descriptors are computed on the image rotated by 180
/// degrees, which aligns an image from an anti-parallel line that looks at
/// the seafloor from the opposite direction.
[[nodiscard]] std::vector<Keypoint> extract_features(const SonarImage& image,
                                                     const AssociationConfig& cfg,
                                                     bool half_turn = false);

[[nodiscard]] double descriptor_distance(std::span<const float> a,
                                         std::span<const float> b);

/// For each source keypoint, the target within `radius` meters (horizontal
/// geo distance) with the smallest descriptor distance. One-to-one.
[[nodiscard]] std::vector<Correspondence> match_near_neighbor(
    std::span<const Keypoint> src, std::span<const Keypoint> tgt, double radius);

/// How target rows are compared against source rows.
struct RowModel {
  /// Lines flown in opposite directions: target row r is read as
  /// (target_rows - 1 - r).
  bool reversed = false;
  int target_rows = 0;

  [[nodiscard]] int row_difference(const Correspondence& c) const;
};

struct RansacResult {
  /// Every candidate, input order, with the inlier flag set.
  std::vector<Correspondence> candidates;
  /// Inliers in canonical (source row, col, target row, col) order.
  std::vector<Correspondence> inliers;
  int hypothesis = 0;
  double mean_deviation = 0.0;
};

/// Sliding compatibility check: the largest set of candidates sharing one
/// row difference within ransac_row_tolerance. Hypotheses are drawn without
/// replacement, so with ransac_iterations >= candidates.size() every
/// hypothesis is scored. Ties go to the smaller mean deviation, then the
/// smaller row difference.
[[nodiscard]] RansacResult sliding_compatibility_ransac(
    std::span<const Correspondence> cands, const AssociationConfig& cfg,
    const RowModel& model = {});

}  // namespace sss
