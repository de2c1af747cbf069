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

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>

#include <gtest/gtest.h>

#include "sss/io.hpp"
#include "sss/pipeline.hpp"
#include "support.hpp"

namespace sss {
namespace {

namespace fs = std::filesystem;

PipelineConfig small(std::uint64_t seed) { return test::reduced_config(seed, 2, 150.0); }

// Simulated once and shared: the datasets take seconds to build.
const Dataset& drifted() {
  static const Dataset d = simulate_dataset(small(2));
  return d;
}

TEST(Dataset, ZeroDriftMatchesTruth) {
  PipelineConfig cfg = small(1);
  cfg.zero_drift = true;
  const Dataset d = simulate_dataset(cfg);
  ASSERT_EQ(d.truth.size(), d.pings.size());
  for (std::size_t k = 0; k < d.pings.size(); ++k) {
    EXPECT_EQ(d.pings[k].dr_pose.position(), d.truth[k].pose.position());
  }
  EXPECT_DOUBLE_EQ(d.drift.final_error, 0.0);
}

TEST(Dataset, WriteReadRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "sss_pipeline_dataset";
  fs::remove_all(dir);
  const Dataset& d = drifted();
  write_dataset(dir, d, small(2));
  for (const char* f : {"heightmap.asc", "reflectivity.asc", "truth.csv", "dead_reckoning.csv",
                        "pings.jsonl", "lines.csv", "annotations.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const Dataset r = read_dataset(dir);
  ASSERT_EQ(r.pings.size(), d.pings.size());
  EXPECT_EQ(r.map.depth(), d.map.depth());
  EXPECT_EQ(r.lines.size(), d.lines.size());
  ASSERT_EQ(r.truth.size(), d.truth.size());
  const Trajectory dr_read = dead_reckoning(r.pings);
  const Trajectory dr = dead_reckoning(d.pings);
  for (std::size_t k = 0; k < d.truth.size(); ++k) {
    EXPECT_EQ(r.truth[k].ping_id, d.truth[k].ping_id);
    EXPECT_LT((r.truth[k].pose.position() - d.truth[k].pose.position()).norm(), 1e-9);
    EXPECT_LT(test::angle_between(r.truth[k].pose, d.truth[k].pose), 1e-9);
    EXPECT_LT((dr_read[k].pose.position() - dr[k].pose.position()).norm(), 1e-9);
    EXPECT_LT(test::angle_between(dr_read[k].pose, dr[k].pose), 1e-9);
  }
  fs::remove_all(dir);
}

TEST(Run, ZeroDriftIsAFixedPoint) {
  PipelineConfig cfg = small(3);
  cfg.zero_drift = true;
  const Dataset d = simulate_dataset(cfg);
  const RunResult r = run_pipeline(d.pings, d.lines, cfg);
  EXPECT_GT(r.loop_closures, 0U);
  EXPECT_LT(ate(r.optimized, d.truth), 0.05);
}

TEST(Run, CorrespondenceCountsPerPair) {
  const PipelineConfig cfg = small(2);
  const RunResult r = run_pipeline(drifted().pings, drifted().lines, cfg);
  std::map<std::pair<int, int>, int> inliers;
  for (const Correspondence& c : r.correspondences) {
    if (c.inlier) ++inliers[{c.source.image_id, c.target.image_id}];
    EXPECT_EQ(c.source.side, c.target.side);
    EXPECT_NE(c.source.image_id / 2, c.target.image_id / 2);
  }
  ASSERT_FALSE(inliers.empty());
  for (const auto& [pair, n] : inliers) {
    EXPECT_GE(n, 5) << pair.first << "->" << pair.second;
    EXPECT_LE(n, 500) << pair.first << "->" << pair.second;
  }
  std::size_t usable = 0;
  for (const LoopClosureConstraint& c : r.constraints) usable += c.usable() ? 1 : 0;
  EXPECT_EQ(usable, r.loop_closures);
  EXPECT_EQ(r.optimized.size(), drifted().pings.size());
}

TEST(Run, Deterministic) {
  const PipelineConfig cfg = small(2);
  const RunResult a = run_pipeline(drifted().pings, drifted().lines, cfg);
  const RunResult b = run_pipeline(drifted().pings, drifted().lines, cfg);
  EXPECT_EQ(io::correspondences_csv(a.correspondences), io::correspondences_csv(b.correspondences));
  EXPECT_EQ(io::trajectory_csv(a.optimized), io::trajectory_csv(b.optimized));
  EXPECT_EQ(io::g2o_text(a.graph), io::g2o_text(b.graph));
}

TEST(Run, NodeStrideKeepsEveryPing) {
  PipelineConfig cfg = small(2);
  cfg.node_stride = 4;
  cfg.finalize();
  const RunResult r = run_pipeline(drifted().pings, drifted().lines, cfg);
  EXPECT_EQ(r.optimized.size(), drifted().pings.size());
  EXPECT_LE(r.graph.nodes().size(), drifted().pings.size() / 4 + 2);
  EXPECT_GT(r.loop_closures, 0U);
}

TEST(Run, BatchModeSolvesOnce) {
  PipelineConfig cfg = small(2);
  cfg.mode = SolveMode::kBatch;
  const RunResult r = run_pipeline(drifted().pings, drifted().lines, cfg);
  EXPECT_GT(r.loop_closures, 0U);
  EXPECT_TRUE(std::none_of(r.log.begin(), r.log.end(), [](const std::string& l) {
    return l.find("loop closures, cost") != std::string::npos;
  }));
  EXPECT_TRUE(r.solution.converged);
}

TEST(Run, NonOverlappingLinesLeaveDeadReckoning) {
  PipelineConfig cfg = small(4);
  cfg.survey.line_spacing = 400.0;
  cfg.bathymetry.width = 2 * 200.0 + 400.0;
  // Room for the 200 m radius turn past the north end.
  cfg.bathymetry.length += 200.0;
  cfg.finalize();
  const Dataset d = simulate_dataset(cfg);
  const RunResult r = run_pipeline(d.pings, d.lines, cfg);
  EXPECT_EQ(r.loop_closures, 0U);
  ASSERT_EQ(r.optimized.size(), r.dead_reckoning.size());
  for (std::size_t k = 0; k < r.optimized.size(); ++k) {
    EXPECT_LT((r.optimized[k].pose.position() - r.dead_reckoning[k].pose.position()).norm(), 1e-9);
  }
  EXPECT_TRUE(std::any_of(r.log.begin(), r.log.end(), [](const std::string& l) {
    return l.find("warning") != std::string::npos;
  }));
}

TEST(Evaluate, ReportOrdersTrajectories) {
  const PipelineConfig cfg = small(2);
  const RunResult r = run_pipeline(drifted().pings, drifted().lines, cfg);
  const MetricReport m = evaluate(drifted(), r.correspondences, r.optimized, cfg);
  ASSERT_GE(m.trajectories.size(), 2U);
  EXPECT_EQ(m.trajectories[0].name, "dead_reckoning");
  EXPECT_EQ(m.trajectories[1].name, "slam");
  EXPECT_NEAR(m.trajectories[0].ate, ate(dead_reckoning(drifted().pings), drifted().truth), 1e-12);
  EXPECT_GT(m.pings, 0U);
  EXPECT_EQ(m.inliers, static_cast<std::size_t>(std::count_if(
      r.correspondences.begin(), r.correspondences.end(), [](const Correspondence& c) { return c.inlier; })));
  EXPECT_GT(m.loop_closures, 0U);
  const std::string csv = report_summary_csv(m);
  EXPECT_EQ(csv.rfind("metric,value", 0), 0U);
}

}  // namespace
}  // namespace sss
