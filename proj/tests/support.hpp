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

// Shared fixtures for the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Geometry>

#include "sss/config.hpp"
#include "sss/geometry.hpp"
#include "sss/simulator.hpp"

namespace sss::test {

inline constexpr double kPi = 3.14159265358979323846;

/// Rotation angle of a^-1 b, from the quaternion of the rotation matrix.
inline double angle_between(const Pose& a, const Pose& b) {
  const Eigen::Quaterniond q(Mat3(a.rotation().transpose() * b.rotation()));
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

inline Pose random_pose(std::mt19937_64& rng, double spread = 10.0, double angle = kPi) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 axis(u(rng), u(rng), u(rng));
  if (axis.norm() < 1e-3) axis = Vec3::UnitZ();
  const Eigen::AngleAxisd aa(angle * 0.999 * std::abs(u(rng)), axis.normalized());
  return Pose(aa.toRotationMatrix(), Vec3(spread * u(rng), spread * u(rng), spread * u(rng)));
}

/// Right perturbation built from an axis-angle rotation and a plain
/// translation; agrees with exp() to first order.
inline Pose perturbation(const Vec3& w, const Vec3& v) {
  const double a = w.norm();
  const Mat3 r = a > 0.0 ? Eigen::AngleAxisd(a, w / a).toRotationMatrix() : Mat3::Identity();
  return Pose(r, v);
}

/// A short survey on a reduced map: `lines` lines of `length` meters.
inline PipelineConfig reduced_config(std::uint64_t seed, int lines = 3, double length = 300.0) {
  PipelineConfig cfg;
  cfg.seed = seed;
  cfg.survey.num_lines = lines;
  cfg.survey.line_length = length;
  cfg.bathymetry.width = 2 * 200.0 + cfg.survey.line_spacing * (lines - 1);
  cfg.bathymetry.length = length + 120.0;
  cfg.bathymetry.num_marks = static_cast<int>(60 * cfg.bathymetry.width * cfg.bathymetry.length /
                                              (600.0 * 920.0));
  cfg.bathymetry.num_patches = static_cast<int>(6000 * cfg.bathymetry.width *
                                                cfg.bathymetry.length / (600.0 * 920.0));
  cfg.finalize();
  return cfg;
}

/// Flat floor at `depth` with uniform reflectivity.
inline BathymetryParams flat_floor(double depth) {
  BathymetryParams p;
  p.base_depth = depth;
  p.noise_amplitude = 0.0;
  p.num_marks = 0;
  p.texture_amplitude = 0.0;
  p.num_patches = 0;
  return p;
}

}  // namespace sss::test
