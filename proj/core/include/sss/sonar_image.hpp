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
 * @file sonar_image.hpp
 * @brief Waterfall images, canonical transform and geo-referencing.
 *
 * A raw image is slant-range indexed: column b holds the return of slant
 * range (b + 0.5) * bin_size. After the canonical transform, column c holds
 * horizontal range (c + 0.5) * column_resolution. Pixels that carry no
 * seafloor return (water column, beyond range) hold kInvalidPixel.
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sss/geometry.hpp"
#include "sss/grid.hpp"

namespace sss {

inline constexpr float kInvalidPixel = -1.0F;
[[nodiscard]] inline bool is_valid_pixel(float v) { return v >= 0.0F; }

struct SonarConfig {
  double max_range = 160.0;
  int bins_per_side = 1301;
  double beam_width = 0.01;  // radians
  double range_std = 0.5;    // meters
  Pose sensor_offset;        // body -> sensor
  double ping_rate = 4.0;    // Hz
  double canonical_resolution = 0.5;  // meters per column

  void validate() const;
  [[nodiscard]] double bin_size() const { return max_range / bins_per_side; }
  [[nodiscard]] double slant_of_bin(int b) const { return (b + 0.5) * bin_size(); }
  [[nodiscard]] int canonical_columns() const;
};

struct Ping {
  std::int64_t ping_id = 0;
  double time = 0.0;
  Pose dr_pose;
  double altitude = 0.0;
  std::vector<float> port;
  std::vector<float> starboard;

  [[nodiscard]] const std::vector<float>& side(Side s) const {
    return s == Side::kStarboard ? starboard : port;
  }
  /// Throws std::invalid_argument if the ping violates its invariants.
  void validate(int bins_per_side) const;
};

/// Per-row metadata carried through every image stage.
struct ImageRow {
  std::int64_t ping_id = 0;
  double time = 0.0;
  Pose pose;  // body pose used for geo-referencing (dead reckoning)
  double altitude = 0.0;
};

class SonarImage {
 public:
  int image_id = 0;
  int line = 0;
  Side side = Side::kStarboard;
  std::vector<ImageRow> rows;
  Grid<float> pixels;
  double column_resolution = 0.0;
  bool canonical = false;
  Pose sensor_offset;

  [[nodiscard]] int num_rows() const { return pixels.rows(); }
  [[nodiscard]] int num_cols() const { return pixels.cols(); }

  /// Horizontal range of a canonical column.
  [[nodiscard]] double ground_range(double col) const {
    return (col + 0.5) * column_resolution;
  }
  [[nodiscard]] double slant_range(int row, double col) const;

  [[nodiscard]] bool georeferenced() const { return !geo_origin_.empty(); }
  /// Global position of pixel (row, col); requires georeference().
  [[nodiscard]] Vec3 georef(int row, double col) const;
  [[nodiscard]] const Vec3& geo_origin(int row) const { return geo_origin_[row]; }
  [[nodiscard]] const Vec3& geo_direction(int row) const { return geo_dir_[row]; }

  /// Row index of a ping id, or -1.
  [[nodiscard]] int row_of(std::int64_t ping_id) const;

  friend SonarImage georeference(const SonarImage& image);
  friend SonarImage georeference(const SonarImage& image,
                                 std::span<const Pose> row_poses);

 private:
  std::vector<Vec3> geo_origin_;
  std::vector<Vec3> geo_dir_;
};

/// Interval-mean resampling of a raw ping to target_bins.
[[nodiscard]] std::vector<float> downsample_ping(std::span<const float> raw,
                                                  int target_bins);

/// Stacks one side of consecutive pings into a slant-range waterfall image.
[[nodiscard]] SonarImage build_waterfall(std::span<const Ping> pings, Side side,
                                         int image_id, int line,
                                         const SonarConfig& cfg);

/// Lambertian intensity correction: divides by cos^2 of the flat-floor
/// incidence angle, masks the water column, normalizes the mean to 1.
[[nodiscard]] SonarImage intensity_correction(const SonarImage& image);

/// Resamples each row from slant range to a uniform horizontal range grid.
[[nodiscard]] SonarImage slant_range_correction(const SonarImage& image,
                                                const SonarConfig& cfg,
                                                double out_resolution);

/// Both corrections. Returns the input unchanged if it is already canonical.
[[nodiscard]] SonarImage canonicalize(const SonarImage& image,
                                      const SonarConfig& cfg);

/// Geo-references every pixel from its row pose, assuming a flat floor at
/// sensor depth + altitude.
[[nodiscard]] SonarImage georeference(const SonarImage& image);
[[nodiscard]] SonarImage georeference(const SonarImage& image,
                                      std::span<const Pose> row_poses);

struct OverlapReport {
  bool overlaps = false;
  double area = 0.0;                // m^2
  std::vector<Vec2> polygon;        // horizontal intersection ring
};

/// Horizontal footprint hull of a geo-referenced image.
[[nodiscard]] std::vector<Vec2> footprint_hull(const SonarImage& image);

[[nodiscard]] OverlapReport overlap_check(const SonarImage& a,
                                          const SonarImage& b,
                                          double min_overlap_area);

}  // namespace sss
