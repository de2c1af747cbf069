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
 * @file pipeline.hpp
 * @brief End-to-end stages: dataset simulation, the per-image SLAM run and
 * metric evaluation, with their on-disk layouts.
 *
 * Image ids are 2 * line + side, with port = 0 and starboard = 1.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sss/association.hpp"
#include "sss/config.hpp"
#include "sss/estimation.hpp"
#include "sss/evaluation.hpp"
#include "sss/pose_graph.hpp"
#include "sss/simulator.hpp"
#include "sss/sonar_image.hpp"
#include "sss/trajectory.hpp"

namespace sss {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

struct Dataset {
  Heightmap map;
  std::vector<Ping> pings;  // dr_pose holds dead reckoning
  Trajectory truth;
  std::vector<SurveyLine> lines;
  DriftReport drift;
};

[[nodiscard]] Dataset simulate_dataset(const PipelineConfig& cfg);
/// heightmap.asc, reflectivity.asc, truth.csv, dead_reckoning.csv,
/// pings.jsonl, lines.csv, annotations.csv and manifest.json.
void write_dataset(const fs::path& dir, const Dataset& data, const PipelineConfig& cfg);
[[nodiscard]] Dataset read_dataset(const fs::path& dir);

[[nodiscard]] Trajectory dead_reckoning(std::span<const Ping> pings);

[[nodiscard]] int image_id_of(int line, Side side);

/// Canonical images of every survey line, geo-referenced with the pings'
/// dead-reckoning poses, ordered by image id.
[[nodiscard]] std::vector<SonarImage> build_images(std::span<const Ping> pings,
                                                   std::span<const SurveyLine> lines,
                                                   const PipelineConfig& cfg);

/// Copy of `image` whose row poses and geo-references come from `poses`.
[[nodiscard]] SonarImage georeference_with(const SonarImage& image, const Trajectory& poses);

/// True when the two images were recorded on lines flown in opposite
/// directions.
[[nodiscard]] bool anti_parallel(const SonarImage& a, const SonarImage& b);

struct PairAssociation {
  int source_image = 0;
  int target_image = 0;
  double overlap_area = 0.0;
  /// Near-neighbor candidates with RANSAC inlier flags.
  std::vector<Correspondence> candidates;
};

/// Near-neighbor matching of described features followed by the sliding
/// compatibility check. Feature geo-references are refreshed from the
/// images. `target_features` must be extracted with half_turn set when the
/// pair is anti-parallel.
[[nodiscard]] PairAssociation associate(const SonarImage& source, const SonarImage& target,
                                        std::span<const Keypoint> source_features,
                                        std::span<const Keypoint> target_features,
                                        const AssociationConfig& cfg);

/// Two-ping estimate for one correspondence. Poses and geo-references come
/// from the images; odometry is the dead-reckoning relative pose with a
/// covariance grown over the distance travelled between the two pings.
[[nodiscard]] LoopClosureConstraint estimate_constraint(const SonarImage& source,
                                                        const SonarImage& target,
                                                        const Correspondence& corr,
                                                        const Trajectory& dr,
                                                        const PipelineConfig& cfg);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunResult {
  std::vector<SonarImage> images;  // geo-referenced with the final estimates
  /// Every candidate of every associated pair, in processing order.
  std::vector<Correspondence> correspondences;
  /// One per inlier correspondence, in the same order.
  std::vector<LoopClosureConstraint> constraints;
  Trajectory dead_reckoning;
  Trajectory optimized;
  PoseGraph graph;
  GraphSolution solution;
  std::size_t loop_closures = 0;
  std::vector<StageTiming> timings;
  std::vector<std::string> log;
};

/// Processes the images line by line: canonicalize, geo-reference with the
/// current estimates, overlap check against processed same-side images,
/// associate, estimate constraints and update the graph.
[[nodiscard]] RunResult run_pipeline(std::span<const Ping> pings,
                                     std::span<const SurveyLine> lines,
                                     const PipelineConfig& cfg);

/// Full-chain graph plus the given loop closures, solved in batch.
[[nodiscard]] Trajectory solve_with_constraints(std::span<const Ping> pings,
                                                std::span<const LoopClosureConstraint> constraints,
                                                const PipelineConfig& cfg,
                                                std::size_t* used = nullptr);

/// correspondences.csv, constraints.csv + constraints.json, graph.g2o,
/// trajectory.csv, run.log and manifest.json.
void write_results(const fs::path& dir, const RunResult& result, const PipelineConfig& cfg);

/// Ground-truth correspondences between overlapping same-side images:
/// detected source keypoints paired with their truth baseline pixels.
[[nodiscard]] std::vector<Correspondence> annotate_truth(const Dataset& data,
                                                         const PipelineConfig& cfg);

struct TrajectoryMetrics {
  std::string name;
  double ate = 0.0;
  ConsistencyReport detected;   // on the detected inlier correspondences
  ConsistencyReport annotated;  // on the annotated correspondences, if any
};

struct MetricReport {
  double drift_percent = 0.0;
  std::size_t pings = 0;
  std::size_t candidates = 0;
  std::size_t inliers = 0;
  std::size_t loop_closures = 0;
  std::size_t annotated = 0;
  std::vector<TrajectoryMetrics> trajectories;  // dead_reckoning, slam[, slam_annotated]
  EpeReport epe;
  DepthErrorStats depth_with_prior;
  DepthErrorStats depth_without_prior;
};

/// All metrics for dead reckoning and `optimized` against the ground truth.
/// With annotations, also solves and evaluates SLAM on them.
[[nodiscard]] MetricReport evaluate(const Dataset& data,
                                    std::span<const Correspondence> correspondences,
                                    const Trajectory& optimized, const PipelineConfig& cfg,
                                    std::span<const Correspondence> annotations = {});

[[nodiscard]] std::string report_json(const MetricReport& report);
/// metric,value rows.
[[nodiscard]] std::string report_summary_csv(const MetricReport& report);
/// Per image pair consistency of every trajectory, plus overall rows.
[[nodiscard]] std::string report_consistency_csv(const MetricReport& report);
/// Per image pair EPE (u, v), plus an overall row.
[[nodiscard]] std::string report_epe_csv(const MetricReport& report);
/// report.json, summary.csv, consistency.csv, epe.csv.
void write_report(const fs::path& dir, const MetricReport& report);

/// manifest.json content: version, config hash, seeds, command.
[[nodiscard]] std::string manifest_json(const PipelineConfig& cfg, const std::string& command);

}  // namespace sss
