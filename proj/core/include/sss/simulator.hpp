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
 * @file simulator.hpp
 * @brief Synthetic bathymetry, lawnmower surveys, side-scan pings and
 * dead-reckoning drift.
 *
 * Heightmap node (r, c) sits at (x0 + c * cell, y0 + r * cell); the surface
 * between nodes is bilinear. Depths are positive down.
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

class Heightmap {
 public:
  Heightmap() = default;
  Heightmap(double x0, double y0, double cell_size, int nrows, int ncols,
            double depth = 0.0, float reflectivity = 0.5F);

  [[nodiscard]] double x0() const { return x0_; }
  [[nodiscard]] double y0() const { return y0_; }
  [[nodiscard]] double cell_size() const { return cell_; }
  [[nodiscard]] int rows() const { return depth_.rows(); }
  [[nodiscard]] int cols() const { return depth_.cols(); }
  [[nodiscard]] double x_max() const { return x0_ + (cols() - 1) * cell_; }
  [[nodiscard]] double y_max() const { return y0_ + (rows() - 1) * cell_; }

  [[nodiscard]] const Grid<double>& depth() const { return depth_; }
  void set_depth(int r, int c, double z);
  Grid<float>& reflectivity() { return reflectivity_; }
  [[nodiscard]] const Grid<float>& reflectivity() const { return reflectivity_; }

  [[nodiscard]] bool contains(double x, double y) const;
  /// Bilinear depth; nullopt outside the grid.
  [[nodiscard]] std::optional<double> depth_at(double x, double y) const;
  /// Bilinear depth and its (d/dx, d/dy) gradient; requires contains().
  [[nodiscard]] double depth_and_gradient(double x, double y, Vec2* gradient) const;
  [[nodiscard]] float reflectivity_at(double x, double y) const;
  [[nodiscard]] double min_depth() const;
  [[nodiscard]] double max_depth() const;
  /// Bounds enclosing every depth ever stored; cheap, possibly loose.
  [[nodiscard]] double depth_lower_bound() const { return zlo_; }
  [[nodiscard]] double depth_upper_bound() const { return zhi_; }

  /// Throws std::invalid_argument on non-finite depths or a bad cell size.
  void validate() const;

 private:
  double x0_ = 0.0;
  double y0_ = 0.0;
  double cell_ = 1.0;
  Grid<double> depth_;
  Grid<float> reflectivity_;
  double zlo_ = 0.0;
  double zhi_ = 0.0;
};

struct TrawlMark {
  Vec2 point = Vec2::Zero();     // a point on the centerline
  double angle = 0.0;            // centerline direction, radians from +x
  double depth = 0.3;            // m below the surrounding floor
  double width = 2.0;            // m
};

struct BathymetryParams {
  double x0 = -200.0;
  double y0 = -60.0;
  double width = 600.0;          // m, along x
  double length = 920.0;         // m, along y
  double cell_size = 0.5;
  double base_depth = 38.0;
  double slope_x = 0.0;          // depth change per meter
  double slope_y = 0.0;
  double noise_amplitude = 0.4;  // m, smooth large-scale relief
  double noise_wavelength = 60.0;
  int num_marks = 60;
  double mark_depth_min = 0.2;
  double mark_depth_max = 0.5;
  double mark_width_min = 1.0;
  double mark_width_max = 3.0;
  std::vector<TrawlMark> marks;  // placed in addition to the random ones
  double reflectivity_mean = 0.5;
  double texture_amplitude = 0.12;
  double texture_wavelength = 3.0;
  int num_patches = 6000;        // high / low reflectivity blobs
  double patch_radius_min = 0.6;
  double patch_radius_max = 2.0;
  double patch_contrast = 0.35;

  void validate() const;
};

[[nodiscard]] Heightmap generate_bathymetry(std::uint64_t seed, const BathymetryParams& p);

/// First intersection of the ray with the bilinear surface, or nullopt if
/// the ray leaves the grid first. Refined by bisection to below 1 mm.
[[nodiscard]] std::optional<Vec3> raycast(const Vec3& origin, const Vec3& direction,
                                          const Heightmap& map);

struct SurveyPlan {
  int num_lines = 5;
  double line_length = 800.0;
  double line_spacing = 50.0;
  double speed = 2.0;        // m/s
  double ping_rate = 4.0;    // Hz
  double altitude = 18.0;    // m above the seafloor
  Vec2 start = Vec2::Zero(); // first line starts here, heading +y
  /// Depth-following smoothing window along the track.
  double depth_smoothing = 20.0;  // m

  void validate() const;
  [[nodiscard]] double ping_spacing() const { return speed / ping_rate; }
};

/// One straight survey line as a contiguous ping range [first, last].
struct SurveyLine {
  int line = 0;
  std::int64_t first_ping = 0;
  std::int64_t last_ping = 0;
  bool heading_north = true;
};

struct SimulationConfig {
  double ground_step = 0.05;  // m, across-track sampling of the fan
  bool speckle = true;
  double speckle_looks = 8.0; // gamma shape; variance 1 / looks
  double intensity_gain = 1.0;
};

struct Survey {
  std::vector<Pose> truth;    // body poses, one per ping
  std::vector<Ping> pings;    // dr_pose holds the true pose until drift is injected
  std::vector<SurveyLine> lines;
};

/// Lawnmower trajectory at the altitude setpoint, level vehicle, semicircle
/// turns. Throws if any swath leaves the map.
[[nodiscard]] Survey plan_survey(const Heightmap& map, const SurveyPlan& plan,
                                 const SonarConfig& sonar);

/// Intensities of one ping from the given sensor pose.
void simulate_ping(const Heightmap& map, const Pose& sensor, const SonarConfig& sonar,
                   const SimulationConfig& sim, std::uint64_t seed, Ping& ping);

/// plan_survey + one simulated ping per pose. Per-ping seeded streams make
/// the output independent of `threads`.
[[nodiscard]] Survey simulate_survey(const Heightmap& map, const SurveyPlan& plan,
                                     const SonarConfig& sonar, const SimulationConfig& sim,
                                     std::uint64_t seed, int threads = 1);

struct DriftModel {
  double heading_bias = 7.5e-6;        // rad/s, constant per run, random sign
  double heading_random_walk = 3e-5;  // rad/sqrt(s)
  double velocity_scale = 1.5e-3;     // fraction of speed, constant per run, random sign
  double velocity_random_walk = 1.5e-4; // m/s/sqrt(s), lateral and forward bias
  double position_noise = 0.0;        // m per ping, white
  std::uint64_t seed = 1;

  void validate() const;
  [[nodiscard]] bool zero() const;
};

struct DriftReport {
  double distance = 0.0;       // m travelled
  double final_error = 0.0;    // m, horizontal
  [[nodiscard]] double percent() const {
    return distance > 0.0 ? 100.0 * final_error / distance : 0.0;
  }
};

/// Dead-reckoning trajectory: integrates the true body-frame increments
/// with biased heading and velocity errors. Depth, roll and pitch are kept.
[[nodiscard]] std::vector<Pose> inject_drift(std::span<const Pose> truth,
                                             const DriftModel& model, double dt,
                                             DriftReport* report = nullptr);

/// Horizontal path length.
[[nodiscard]] double path_length(std::span<const Pose> trajectory);

/// Deterministic per-item seed derived from a base seed.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sss
