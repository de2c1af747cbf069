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

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sss/io.hpp"
#include "support.hpp"

namespace sss {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sss_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

void expect_pose_eq(const Pose& a, const Pose& b, double tol) {
  EXPECT_LT((a.position() - b.position()).norm(), tol);
  EXPECT_LT(test::angle_between(a, b), tol);
}

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 12345.0}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(std::stof(io::format_float(0.1F)), 0.1F);
}

TEST_F(IoTest, TrajectoryRoundTrip) {
  std::mt19937_64 rng(1);
  Trajectory t;
  for (int k = 0; k < 50; ++k) t.push_back(10 + k, 0.25 * k, test::random_pose(rng, 100.0, 1.0));
  const fs::path p = dir_ / "t.csv";
  io::write_trajectory_csv(p, t);
  const Trajectory r = io::read_trajectory_csv(p);
  ASSERT_EQ(r.size(), t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_EQ(r[k].ping_id, t[k].ping_id);
    EXPECT_DOUBLE_EQ(r[k].time, t[k].time);
    expect_pose_eq(r[k].pose, t[k].pose, 1e-12);
  }
}

TEST_F(IoTest, MalformedTrajectoryNamesLine) {
  const fs::path p = dir_ / "bad.csv";
  io::write_text(p, "ping_id,t,x,y,z,roll,pitch,yaw\n1,0,0,0,0,0,0,0\n2,0,zz,0,0,0,0,0\n");
  try {
    static_cast<void>(io::read_trajectory_csv(p));
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST_F(IoTest, PingsRoundTrip) {
  std::vector<Ping> pings(3);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 3; ++k) {
    pings[k].ping_id = k;
    pings[k].time = 0.25 * k;
    pings[k].dr_pose = test::random_pose(rng, 50.0, 0.5);
    pings[k].altitude = 17.5 + k;
    pings[k].port = {0.0F, 0.125F, 1.0F / 3.0F};
    pings[k].starboard = {2.0F, 0.0F, 1e-7F};
  }
  const fs::path p = dir_ / "pings.jsonl";
  io::write_pings_jsonl(p, pings);
  const auto r = io::read_pings_jsonl(p);
  ASSERT_EQ(r.size(), pings.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    EXPECT_EQ(r[k].ping_id, pings[k].ping_id);
    EXPECT_DOUBLE_EQ(r[k].altitude, pings[k].altitude);
    EXPECT_EQ(r[k].port, pings[k].port);
    EXPECT_EQ(r[k].starboard, pings[k].starboard);
    expect_pose_eq(r[k].dr_pose, pings[k].dr_pose, 1e-12);
  }
}

TEST_F(IoTest, HeightmapRoundTrip) {
  BathymetryParams b;
  b.width = 40.0;
  b.length = 30.0;
  b.num_marks = 2;
  b.num_patches = 20;
  const Heightmap m = generate_bathymetry(3, b);
  io::write_heightmap(dir_ / "d.asc", dir_ / "r.asc", m);
  const Heightmap r = io::read_heightmap(dir_ / "d.asc", dir_ / "r.asc");
  EXPECT_EQ(r.depth(), m.depth());
  EXPECT_EQ(r.reflectivity(), m.reflectivity());
  EXPECT_DOUBLE_EQ(r.x0(), m.x0());
  EXPECT_DOUBLE_EQ(r.y0(), m.y0());
  EXPECT_DOUBLE_EQ(r.cell_size(), m.cell_size());
}

TEST_F(IoTest, LinesRoundTrip) {
  const std::vector<SurveyLine> lines = {{0, 0, 99, true}, {1, 150, 249, false}};
  io::write_lines_csv(dir_ / "l.csv", lines);
  const auto r = io::read_lines_csv(dir_ / "l.csv");
  ASSERT_EQ(r.size(), 2U);
  EXPECT_EQ(r[1].first_ping, 150);
  EXPECT_EQ(r[1].last_ping, 249);
  EXPECT_FALSE(r[1].heading_north);
}

TEST_F(IoTest, CorrespondencesRoundTrip) {
  std::vector<Correspondence> c(2);
  auto kp = [](int image, int row, int col) {
    Keypoint k;
    k.image_id = image;
    k.row = row;
    k.col = col;
    return k;
  };
  c[0].source = kp(1, 10, 20);
  c[0].target = kp(3, 11, 25);
  c[0].descriptor_distance = 0.25;
  c[0].inlier = true;
  c[1].source = kp(1, 40, 50);
  c[1].target = kp(3, 45, 52);
  c[1].descriptor_distance = std::nan("");
  c[1].inlier = false;
  io::write_correspondences_csv(dir_ / "c.csv", c);
  const auto r = io::read_correspondences_csv(dir_ / "c.csv");
  ASSERT_EQ(r.size(), 2U);
  EXPECT_EQ(r[0].source.image_id, 1);
  EXPECT_EQ(r[0].target.row, 11);
  EXPECT_EQ(r[0].target.col, 25);
  EXPECT_DOUBLE_EQ(r[0].descriptor_distance, 0.25);
  EXPECT_TRUE(r[0].inlier);
  EXPECT_TRUE(std::isnan(r[1].descriptor_distance));
  EXPECT_FALSE(r[1].inlier);
  EXPECT_EQ(io::correspondences_csv(r), io::correspondences_csv(c));

  io::write_text(dir_ / "short.csv", "src_image,src_row,src_col,tgt_image,tgt_row,tgt_col\n1,2,3,4,5,6\n");
  const auto s = io::read_correspondences_csv(dir_ / "short.csv");
  ASSERT_EQ(s.size(), 1U);
  EXPECT_TRUE(s[0].inlier);
}

TEST_F(IoTest, ConstraintsRoundTrip) {
  std::mt19937_64 rng(4);
  std::vector<LoopClosureConstraint> cs(3);
  for (int k = 0; k < 3; ++k) {
    cs[k].ping_i = k;
    cs[k].ping_j = 100 + k;
    cs[k].relative = test::random_pose(rng, 30.0, 0.3);
    Mat6 a = Mat6::Random();
    cs[k].covariance = a * a.transpose() + Mat6::Identity();
    cs[k].converged = k != 1;
    cs[k].outlier = k == 2;
    cs[k].final_cost = 1.5 * k;
    cs[k].landmark.position = Vec3(k, 2.0 * k, 40.0);
  }
  io::write_constraints(dir_ / "c.csv", dir_ / "c.json", cs);
  const auto r = io::read_constraints(dir_ / "c.csv", dir_ / "c.json");
  ASSERT_EQ(r.size(), cs.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    EXPECT_EQ(r[k].ping_i, cs[k].ping_i);
    EXPECT_EQ(r[k].ping_j, cs[k].ping_j);
    EXPECT_EQ(r[k].converged, cs[k].converged);
    EXPECT_EQ(r[k].outlier, cs[k].outlier);
    EXPECT_EQ(r[k].covariance, cs[k].covariance);
    EXPECT_EQ(r[k].landmark.position, cs[k].landmark.position);
    expect_pose_eq(r[k].relative, cs[k].relative, 1e-12);
  }
}

TEST_F(IoTest, G2oRoundTripSwapsInformationBlocks) {
  PoseGraph g;
  g.add_node(0, Pose(), true);
  g.add_node(1, Pose::translation(1, 0, 0));
  g.add_node(2, Pose::translation(2, 0, 0));
  Mat6 cov = Mat6::Identity();
  cov.diagonal() << 1e-4, 2e-4, 3e-4, 0.1, 0.2, 0.3;
  g.add_factor({FactorKind::kOdometry, 0, 1, Pose::translation(1, 0, 0), cov});
  g.add_factor({FactorKind::kOdometry, 1, 2, Pose::translation(1, 0, 0), cov});
  g.add_factor({FactorKind::kLoopClosure, 0, 2, Pose::translation(2, 0.1, 0), cov});
  const std::string text = io::g2o_text(g);
  // Translation-first information: first diagonal entry is 1 / 0.1.
  const auto edge = text.find("EDGE_SE3");
  ASSERT_NE(edge, std::string::npos);
  EXPECT_NE(text.find(" 10 ", edge), std::string::npos);
  io::write_g2o(dir_ / "g.g2o", g);
  const PoseGraph r = io::read_g2o(dir_ / "g.g2o");
  ASSERT_EQ(r.nodes().size(), 3U);
  ASSERT_EQ(r.factors().size(), 3U);
  EXPECT_TRUE(r.node(0).fixed);
  EXPECT_EQ(r.num_loop_closures(), 1U);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_LT((r.factors()[k].covariance - g.factors()[k].covariance).norm(), 1e-12);
  }
  EXPECT_EQ(io::g2o_text(r), text);
}

TEST_F(IoTest, MissingFileIsError) {
  EXPECT_THROW(static_cast<void>(io::read_text(dir_ / "nope.txt")), std::runtime_error);
}

}  // namespace
}  // namespace sss
