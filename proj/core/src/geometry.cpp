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

#include "sss/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sss {

namespace {

// Below this angle the closed-form coefficients lose precision and the
// Taylor series (exact to ~1e-12 at the threshold) is used instead.
constexpr double kSeriesThreshold = 0.1;

Quat normalized(const Quat& q) { return q.normalized(); }

}  // namespace

Pose::Pose(const Quat& q, const Vec3& t) : q_(normalized(q)), t_(t) {}

Pose::Pose(const Mat3& rotation, const Vec3& t)
    : q_(normalized(Quat(rotation))), t_(t) {}

Pose Pose::translation(double x, double y, double z) {
  return {Quat::Identity(), Vec3(x, y, z)};
}

Pose Pose::rot_z(double angle, const Vec3& t) {
  return {Quat(Eigen::AngleAxisd(angle, Vec3::UnitZ())), t};
}

Pose Pose::from_rpy(const Vec3& t, double roll, double pitch, double yaw) {
  const Quat q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                 Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                 Eigen::AngleAxisd(roll, Vec3::UnitX());
  return {q, t};
}

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
  return {Mat3(m.topLeftCorner<3, 3>()), Vec3(m.topRightCorner<3, 1>())};
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation();
  m.topRightCorner<3, 1>() = t_;
  return m;
}

Vec3 Pose::rpy() const {
  const Mat3 r = rotation();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

Pose Pose::inverse() const {
  const Quat qi = q_.conjugate();
  return {qi, -(qi * t_)};
}

Pose Pose::operator*(const Pose& other) const {
  return {q_ * other.q_, t_ + q_ * other.t_};
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Quat so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  const double half = 0.5 * theta;
  double k;  // sin(theta/2) / theta
  if (theta < kSeriesThreshold) {
    const double t2 = theta * theta;
    k = 0.5 - t2 / 48.0 + t2 * t2 / 3840.0;
  } else {
    k = std::sin(half) / theta;
  }
  Quat q(std::cos(half), k * omega.x(), k * omega.y(), k * omega.z());
  return q.normalized();
}

Vec3 so3_log(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double n = v.norm();
  const double w = q.w();
  if (n < 1e-10) {
    // atan2(n, w) / n ~ 1/w - n^2 / (3 w^3)
    return 2.0 * v / w * (1.0 - n * n / (3.0 * w * w));
  }
  const double angle = 2.0 * std::atan2(n, w);
  return angle / n * v;
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  double a;  // (1 - cos) / theta^2
  double b;  // (theta - sin) / theta^3
  if (theta < kSeriesThreshold) {
    const double t2 = theta * theta;
    a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    a = (1.0 - std::cos(theta)) / (theta * theta);
    b = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Mat3::Identity() + a * w + b * w * w;
}

Mat3 so3_left_jacobian_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  double c;
  if (theta < kSeriesThreshold) {
    const double t2 = theta * theta;
    c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    c = 1.0 / (theta * theta) -
        (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() - 0.5 * w + c * w * w;
}

namespace {

// Coupling block of the SE(3) left Jacobian for (rotation, translation)
// ordered twists.
Mat3 se3_q_block(const Vec3& omega, const Vec3& rho) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  const Mat3 r = skew(rho);
  double c1;
  double c2;
  double c3;
  if (theta < kSeriesThreshold) {
    const double t2 = theta * theta;
    const double t4 = t2 * t2;
    c1 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0;
    c2 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0;
    c3 = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double t2 = theta * theta;
    c1 = (theta - s) / (t2 * theta);
    c2 = (t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2);
    c3 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t2 * t2 * theta);
  }
  const Mat3 wr = w * r;
  const Mat3 rw = r * w;
  const Mat3 wrw = wr * w;
  return 0.5 * r + c1 * (wr + rw + wrw) +
         c2 * (w * wr + rw * w - 3.0 * wrw) + c3 * (wrw * w + w * wrw);
}

}  // namespace

Pose exp(const Twist& xi) {
  const Vec3 omega = xi.head<3>();
  const Vec3 rho = xi.tail<3>();
  return {so3_exp(omega), so3_left_jacobian(omega) * rho};
}

Twist log(const Pose& t) {
  const Vec3 omega = so3_log(t.orientation());
  Twist xi;
  xi.head<3>() = omega;
  xi.tail<3>() = so3_left_jacobian_inverse(omega) * t.position();
  return xi;
}

double rotation_angle(const Pose& t) { return so3_log(t.orientation()).norm(); }

Mat6 adjoint(const Pose& t) {
  const Mat3 r = t.rotation();
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = r;
  ad.bottomRightCorner<3, 3>() = r;
  ad.bottomLeftCorner<3, 3>() = skew(t.position()) * r;
  return ad;
}

Mat6 se3_left_jacobian(const Twist& xi) {
  const Vec3 omega = xi.head<3>();
  const Vec3 rho = xi.tail<3>();
  const Mat3 jl = so3_left_jacobian(omega);
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = jl;
  j.bottomRightCorner<3, 3>() = jl;
  j.bottomLeftCorner<3, 3>() = se3_q_block(omega, rho);
  return j;
}

Mat6 se3_right_jacobian(const Twist& xi) { return se3_left_jacobian(-xi); }

Mat6 se3_right_jacobian_inverse(const Twist& xi) {
  const Vec3 omega = -xi.head<3>();
  const Vec3 rho = -xi.tail<3>();
  const Mat3 jinv = so3_left_jacobian_inverse(omega);
  const Mat3 q = se3_q_block(omega, rho);
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = jinv;
  j.bottomRightCorner<3, 3>() = jinv;
  j.bottomLeftCorner<3, 3>() = -jinv * q * jinv;
  return j;
}

Vec3 side_direction(const Pose& body, Side side) {
  const Vec3 fwd = body.rotation().col(0);
  Vec3 h(fwd.x(), fwd.y(), 0.0);
  const double n = h.norm();
  if (n < 1e-12) throw std::invalid_argument("side_direction: vertical heading");
  h /= n;
  const Vec3 starboard(h.y(), -h.x(), 0.0);
  return side == Side::kStarboard ? starboard : Vec3(-starboard);
}

const char* side_name(Side side) {
  return side == Side::kStarboard ? "starboard" : "port";
}

}  // namespace sss
