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
 * @file evaluation.hpp
 * @brief Trajectory and correspondence metrics against a bathymetry mesh:
 * landmark consistency, ATE, end-point error and landmark depth error.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sss/association.hpp"
#include "sss/estimation.hpp"
#include "sss/simulator.hpp"
#include "sss/sonar_image.hpp"
#include "sss/trajectory.hpp"

namespace sss {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit
};

/// Ray of a pixel at slant range `slant`: in the ping's across-track plane,
/// depressed by asin(altitude / slant) below the horizontal side direction.
[[nodiscard]] Ray keypoint_ray(const Pose& body, const Pose& sensor_offset, Side side,
                               double slant, double altitude);

/// Mesh point recorded by pixel (row, col) of a canonical image seen from
/// `body` (normally the row's pose in some trajectory): the point of the
/// ping plane at the pixel's slant range on the mesh, searched from the
/// keypoint_ray direction. nullopt if the search leaves the map.
[[nodiscard]] std::optional<Vec3> project_pixel(const SonarImage& image, int row, double col,
                                                const Pose& body, const Heightmap& map);

[[nodiscard]] const SonarImage& find_image(std::span<const SonarImage> images, int image_id);

struct PairMetric {
  int source_image = 0;
  int target_image = 0;
  std::size_t count = 0;
  double mean = 0.0;    // consistency: meters
  double mean_u = 0.0;  // EPE only: rows
  double mean_v = 0.0;  // EPE only: columns
};

struct ConsistencyReport {
  std::vector<PairMetric> pairs;  // sorted by (source, target)
  double overall = 0.0;           // correspondence-weighted mean
  std::size_t count = 0;
  std::size_t skipped = 0;        // ray misses
};

/// Distance between the mesh intersections of both keypoints of every
/// correspondence, with pixel poses taken from `poses`.
[[nodiscard]] ConsistencyReport landmark_consistency(std::span<const Correspondence> corrs,
                                                     std::span<const SonarImage> images,
                                                     const Trajectory& poses,
                                                     const Heightmap& map);

/// Horizontal RMSE over identical ping id sequences; throws on mismatch.
[[nodiscard]] double ate(const Trajectory& estimate, const Trajectory& reference);

/// The target pixel whose mesh intersection is nearest `landmark`, if that
/// distance is below `threshold`.
[[nodiscard]] std::optional<Keypoint> baseline_correspondence(const Vec3& landmark,
                                                              const SonarImage& target,
                                                              const Trajectory& poses,
                                                              const Heightmap& map,
                                                              double threshold = 0.3);

struct EpeReport {
  std::vector<PairMetric> pairs;
  double mean_u = 0.0;
  double mean_v = 0.0;
  std::size_t count = 0;
  std::size_t missing = 0;  // correspondences without a baseline
};

/// Baseline target keypoints, one optional per correspondence. Baselines are
/// searched with the poses in `poses`.
[[nodiscard]] std::vector<std::optional<Keypoint>> baselines(
    std::span<const Correspondence> corrs, std::span<const SonarImage> images,
    const Trajectory& poses, const Heightmap& map, double threshold = 0.3);

/// Mean |row| (u) and |column| (v) differences between detected targets and
/// their baselines.
[[nodiscard]] EpeReport epe(std::span<const Correspondence> detected,
                            std::span<const std::optional<Keypoint>> baselines);

struct DepthErrorStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
  std::size_t skipped = 0;  // outside the map
};

[[nodiscard]] DepthErrorStats landmark_depth_error(std::span<const LandmarkEstimate> landmarks,
                                                   const Heightmap& map);

}  // namespace sss
