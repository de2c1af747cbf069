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
 * @file io.hpp
 * @brief Readers and writers for every file the tools exchange.
 *
 * Numbers are written in their shortest round-trip form, so writing the
 * same values always yields the same bytes and reading them back is exact.
 * Readers throw std::runtime_error naming the file and line on bad input.
 */

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sss/association.hpp"
#include "sss/estimation.hpp"
#include "sss/pose_graph.hpp"
#include "sss/simulator.hpp"
#include "sss/sonar_image.hpp"
#include "sss/trajectory.hpp"

namespace sss::io {

namespace fs = std::filesystem;

[[nodiscard]] std::string format_double(double v);
[[nodiscard]] std::string format_float(float v);

[[nodiscard]] std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

/// One JSON object per line: ping_id, t, pose [x y z qw qx qy qz],
/// altitude, port, stbd.
void write_pings_jsonl(const fs::path& path, std::span<const Ping> pings);
[[nodiscard]] std::vector<Ping> read_pings_jsonl(const fs::path& path);

/// `ping_id,t,x,y,z,roll,pitch,yaw` with angles in degrees.
[[nodiscard]] std::string trajectory_csv(const Trajectory& trajectory);
void write_trajectory_csv(const fs::path& path, const Trajectory& trajectory);
[[nodiscard]] Trajectory read_trajectory_csv(const fs::path& path);

/// ASCII grid: `ncols`, `nrows`, `x0`, `y0`, `cellsize` header lines, then
/// one line of values per grid row. Depth and reflectivity live in two files.
void write_heightmap(const fs::path& depth_path, const fs::path& reflectivity_path,
                     const Heightmap& map);
[[nodiscard]] Heightmap read_heightmap(const fs::path& depth_path,
                                       const fs::path& reflectivity_path);

/// `line,first_ping,last_ping,heading_north`.
void write_lines_csv(const fs::path& path, std::span<const SurveyLine> lines);
[[nodiscard]] std::vector<SurveyLine> read_lines_csv(const fs::path& path);

/// `src_image,src_row,src_col,tgt_image,tgt_row,tgt_col,desc_dist,inlier`;
/// desc_dist is empty when unknown.
[[nodiscard]] std::string correspondences_csv(std::span<const Correspondence> corrs);
void write_correspondences_csv(const fs::path& path, std::span<const Correspondence> corrs);
/// Keypoints carry image id, row and col only. A missing inlier column or
/// value reads as true.
[[nodiscard]] std::vector<Correspondence> read_correspondences_csv(const fs::path& path);

/// `ping_i,ping_j,tx,ty,tz,rx,ry,rz,cost,converged` (rotation as a rotation
/// vector) and a JSON sidecar with covariances, landmarks and diagnostics.
[[nodiscard]] std::string constraints_csv(std::span<const LoopClosureConstraint> constraints);
[[nodiscard]] std::string constraints_json(std::span<const LoopClosureConstraint> constraints);
void write_constraints(const fs::path& csv_path, const fs::path& json_path,
                       std::span<const LoopClosureConstraint> constraints);
[[nodiscard]] std::vector<LoopClosureConstraint> read_constraints(const fs::path& csv_path,
                                                                  const fs::path& json_path);

/// g2o text: VERTEX_SE3 id x y z qx qy qz qw, EDGE_SE3 i j <pose>
/// <upper-triangular 6x6 information in translation-first order>, FIX id.
/// Loop closures are the edges between non-consecutive vertices.
[[nodiscard]] std::string g2o_text(const PoseGraph& graph);
void write_g2o(const fs::path& path, const PoseGraph& graph);
[[nodiscard]] PoseGraph read_g2o(const fs::path& path);

/// 16-bit binary PGM scaled so the valid pixel range maps to 1..65535
/// (0 marks invalid pixels), plus a JSON sidecar.
void write_pgm16(const fs::path& path, const SonarImage& image);

}  // namespace sss::io
