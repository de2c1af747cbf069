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
 * @file config.hpp
 * @brief The single pipeline configuration and its INI-style file format.
 *
 * One `[section]` per module and `key = value` lines; `#` and `;` start
 * comments. Unknown sections or keys are errors. Every key and its
 * default is listed by to_ini(PipelineConfig{}).
 */

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "sss/association.hpp"
#include "sss/estimation.hpp"
#include "sss/pose_graph.hpp"
#include "sss/simulator.hpp"
#include "sss/sonar_image.hpp"

namespace sss {

enum class SolveMode { kIncremental, kBatch };

struct PipelineConfig {
  SonarConfig sonar;
  /// Sensor offset as x, y, z (m) and roll, pitch, yaw (degrees).
  std::array<double, 6> offset{};
  AssociationConfig association;
  EstimationConfig estimation;
  OdometryNoise odometry;
  GraphConfig graph;
  DriftModel drift;
  SurveyPlan survey;
  BathymetryParams bathymetry;
  SimulationConfig simulation;

  std::uint64_t seed = 1;
  int threads = 1;
  int node_stride = 1;
  double min_overlap_area = 2000.0;  // m^2
  bool zero_drift = false;
  SolveMode mode = SolveMode::kIncremental;
  double baseline_threshold = 0.3;   // m

  /// Recomputes derived fields (sonar.sensor_offset) and validates all.
  void finalize();
};

/// Parses config text; starts from defaults. Throws std::invalid_argument
/// with the offending key on unknown keys or unparsable values.
[[nodiscard]] PipelineConfig parse_config(const std::string& text);
[[nodiscard]] PipelineConfig load_config(const std::filesystem::path& path);
/// Every key in a fixed order; parse_config(to_ini(c)) reproduces c.
[[nodiscard]] std::string to_ini(const PipelineConfig& cfg);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(const std::string& bytes);
[[nodiscard]] std::string hex64(std::uint64_t v);

}  // namespace sss
