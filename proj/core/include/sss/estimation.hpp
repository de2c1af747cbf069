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
 * @file estimation.hpp
 * @brief Keypoint measurement model and two-ping relative pose estimation.
 *
 * A keypoint seen from one ping constrains the landmark to a sphere of the
 * measured slant range, intersected with the plane perpendicular to the
 * sonar array: z = (||s_x||, e_x . s_x) with s_x the landmark in the sensor
 * frame. Two such measurements, the dead-reckoning relative pose and an
 * optional landmark depth prior are solved jointly for the second ping's
 * pose and the landmark, with the first pose held fixed.
 */

#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "sss/association.hpp"
#include "sss/geometry.hpp"
#include "sss/sonar_image.hpp"

namespace sss {

using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat26 = Eigen::Matrix<double, 2, 6>;

/// Dead-reckoning odometry noise, linear in travelled distance. Roll, pitch
/// and depth come from absolute sensors and get their own, smaller terms.
struct OdometryNoise {
  double rotation_variance_per_meter = 1e-7;     // rad^2 / m, yaw
  double translation_variance_per_meter = 1e-3;  // m^2 / m, horizontal
  double attitude_variance_per_meter = 1e-9;     // rad^2 / m, roll and pitch
  double depth_variance_per_meter = 1e-6;        // m^2 / m, body z
  double min_distance = 0.01;                    // m, floor for the distance

  void validate() const;
  /// Diagonal 6x6 body-frame covariance in (rotation, translation) order.
  [[nodiscard]] Mat6 covariance(double distance) const;
};

struct EstimationConfig {
  bool use_depth_prior = true;
  double depth_prior_scale = 0.05;  // k_z: prior std per meter of distance
  double min_depth_std = 0.1;       // m
  int max_iterations = 50;
  double relative_cost_tolerance = 1e-9;
  double gradient_tolerance = 1e-8;
  double initial_lambda = 1e-4;
  /// Converged solutions with a normalized measurement residual above this
  /// are flagged as outliers.
  double outlier_sigma = 3.0;
  /// Multiplies the odometry covariance used inside the two-ping problem.
  double odometry_scale = 1.0;

  void validate() const;
};

/// One keypoint seen from one ping.
struct PingObservation {
  std::int64_t ping_id = 0;
  Pose pose;               // body pose (initial estimate for the free ping)
  double range = 0.0;      // measured slant range
  double altitude = 0.0;
  Vec3 geo = Vec3::Zero(); // flat-floor geo-reference of the keypoint
};

/// Reads the observation of keypoint `kp` (row, col) from a canonical,
/// geo-referenced image.
[[nodiscard]] PingObservation observe(const SonarImage& image, const Keypoint& kp);

struct LandmarkEstimate {
  Vec3 position = Vec3::Zero();
  double prior_mean = 0.0;  // depth prior z (m)
  double prior_std = 1.0;
};

struct LoopClosureConstraint {
  std::int64_t ping_i = 0;
  std::int64_t ping_j = 0;
  Pose relative;          // i -> j
  Mat6 covariance = Mat6::Identity();
  bool converged = false;
  bool outlier = false;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  /// Largest measurement residual in units of its standard deviation.
  double max_normalized_residual = 0.0;
  LandmarkEstimate landmark;

  [[nodiscard]] bool usable() const { return converged && !outlier; }
};

struct MeasurementJacobians {
  Mat26 pose;      // w.r.t. right perturbation of the body pose
  Mat23 landmark;  // w.r.t. the global landmark position
};

/// (range, along-array offset) of a global landmark seen from `body`.
/// Throws std::domain_error if the landmark is at the sensor origin.
[[nodiscard]] Vec2 predict_measurement(const Pose& body, const Pose& sensor_offset,
                                       const Vec3& landmark);
[[nodiscard]] MeasurementJacobians measurement_jacobians(const Pose& body,
                                                         const Pose& sensor_offset,
                                                         const Vec3& landmark);

/// diag(range_std^2, r^2 beam_width^2).
[[nodiscard]] Mat2 measurement_covariance(double range, const SonarConfig& cfg);

/// Midpoint of the two geo-references; depth prior from the ping nearer
/// (horizontally) to that midpoint.
[[nodiscard]] LandmarkEstimate init_landmark(const PingObservation& a,
                                             const PingObservation& b,
                                             const EstimationConfig& cfg);

/// Solves for ping j's pose and the landmark with ping i fixed. `odometry`
/// is the measured i -> j relative pose with covariance `odometry_cov`.
/// `landmark_init` overrides the geo-referenced initialization.
[[nodiscard]] LoopClosureConstraint estimate_relative_pose(
    const PingObservation& obs_i, const PingObservation& obs_j, const Pose& odometry,
    const Mat6& odometry_cov, const SonarConfig& sonar, const EstimationConfig& cfg,
    std::optional<Vec3> landmark_init = std::nullopt);

/// Largest relative error between the analytic measurement Jacobians and
/// central differences with step `step`.
[[nodiscard]] double check_jacobians(const Pose& body, const Pose& sensor_offset,
                                     const Vec3& landmark, double step = 1e-6);

}  // namespace sss
