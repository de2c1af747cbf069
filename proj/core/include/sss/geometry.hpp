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
 * @file geometry.hpp
 * @brief SE(3) pose algebra shared by every stage of the pipeline.
 *
 * Frame conventions (used everywhere, never inferred per module):
 *  - Global frame: x east, y north, z down. A landmark's z is its depth.
 *  - Body frame: x forward (along the sonar array), y and z span the
 *    across-track plane. For a level vehicle body z points down and the
 *    starboard horizontal direction is -body_y (heading rotated by -90 deg
 *    in the x-y plane), port is +body_y.
 *  - Yaw is measured in the x-y plane from +x towards +y. Roll-pitch-yaw
 *    angles compose as R = Rz(yaw) * Ry(pitch) * Rx(roll).
 *  - Twists are 6-vectors ordered (rotation, translation). Perturbations
 *    are applied on the right: T * exp(delta).
 */

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sss {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

/// Tangent-space element of SE(3): (rotation vector, translation part).
using Twist = Vec6;

/// Rigid body transform. Orientation is kept as a unit quaternion.
class Pose {
 public:
  Pose() : q_(Quat::Identity()), t_(Vec3::Zero()) {}
  Pose(const Quat& q, const Vec3& t);
  Pose(const Mat3& rotation, const Vec3& t);

  static Pose identity() { return {}; }
  static Pose translation(double x, double y, double z);
  static Pose translation(const Vec3& t) { return {Quat::Identity(), t}; }
  static Pose rot_z(double angle, const Vec3& t = Vec3::Zero());
  /// Angles in radians, ZYX order.
  static Pose from_rpy(const Vec3& t, double roll, double pitch, double yaw);
  /// Homogeneous 4x4 matrix. The bottom row must be (0, 0, 0, 1).
  static Pose from_matrix(const Eigen::Matrix4d& m);

  [[nodiscard]] const Quat& orientation() const { return q_; }
  [[nodiscard]] const Vec3& position() const { return t_; }
  [[nodiscard]] Mat3 rotation() const { return q_.toRotationMatrix(); }
  [[nodiscard]] Eigen::Matrix4d matrix() const;

  /// (roll, pitch, yaw) in radians.
  [[nodiscard]] Vec3 rpy() const;
  [[nodiscard]] double yaw() const { return rpy().z(); }

  [[nodiscard]] Pose inverse() const;
  [[nodiscard]] Pose operator*(const Pose& other) const;
  [[nodiscard]] Vec3 operator*(const Vec3& p) const { return q_ * p + t_; }

  void set_position(const Vec3& t) { t_ = t; }

 private:
  Quat q_;
  Vec3 t_;
};

[[nodiscard]] inline Pose compose(const Pose& a, const Pose& b) { return a * b; }
[[nodiscard]] inline Pose inverse(const Pose& t) { return t.inverse(); }
/// a^-1 * b: pose of b expressed in the frame of a.
[[nodiscard]] inline Pose relative(const Pose& a, const Pose& b) {
  return a.inverse() * b;
}
[[nodiscard]] inline Vec3 transform_point(const Pose& t, const Vec3& p) {
  return t * p;
}

[[nodiscard]] Twist log(const Pose& t);
[[nodiscard]] Pose exp(const Twist& xi);

/// Rotation angle of a pose in [0, pi].
[[nodiscard]] double rotation_angle(const Pose& t);

// ---------------------------------------------------------------------------
// Lie-group helpers.

[[nodiscard]] Mat3 skew(const Vec3& v);
[[nodiscard]] Quat so3_exp(const Vec3& omega);
[[nodiscard]] Vec3 so3_log(const Quat& q);
[[nodiscard]] Mat3 so3_left_jacobian(const Vec3& omega);
[[nodiscard]] Mat3 so3_left_jacobian_inverse(const Vec3& omega);

/// Ad(T) such that T * exp(xi) * T^-1 = exp(Ad(T) * xi).
[[nodiscard]] Mat6 adjoint(const Pose& t);
[[nodiscard]] Mat6 se3_left_jacobian(const Twist& xi);
[[nodiscard]] Mat6 se3_right_jacobian(const Twist& xi);
[[nodiscard]] Mat6 se3_right_jacobian_inverse(const Twist& xi);

/// log(measured^-1 * predicted), the tangent-space residual used for
/// odometry and loop-closure factors.
[[nodiscard]] inline Twist pose_residual(const Pose& measured,
                                         const Pose& predicted) {
  return log(measured.inverse() * predicted);
}

/// Horizontal unit vector pointing out of the given side for a pose.
enum class Side { kPort = 0, kStarboard = 1 };
[[nodiscard]] Vec3 side_direction(const Pose& body, Side side);
[[nodiscard]] const char* side_name(Side side);

}  // namespace sss
