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
#include <optional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sss/evaluation.hpp"
#include "sss/pipeline.hpp"
#include "support.hpp"

namespace sss {
namespace {

Trajectory line_trajectory(int n, double dy) {
  Trajectory t;
  for (int k = 0; k < n; ++k) t.push_back(k, 0.25 * k, Pose::translation(0.0, dy * k, 20.0));
  return t;
}

TEST(Ate, ZeroForIdenticalAndHorizontalOnly) {
  const Trajectory a = line_trajectory(50, 0.5);
  EXPECT_DOUBLE_EQ(ate(a, a), 0.0);
  Trajectory deeper;
  for (const auto& e : a.entries()) {
    deeper.push_back(e.ping_id, e.time, Pose::translation(e.pose.position() + Vec3(0, 0, 5)));
  }
  EXPECT_DOUBLE_EQ(ate(deeper, a), 0.0);
}

TEST(Ate, TranslationEquivariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  const Trajectory ref = line_trajectory(200, 0.5);
  Trajectory est;
  std::vector<Vec2> err;
  for (const auto& e : ref.entries()) {
    const Vec2 d(g(rng), g(rng));
    err.push_back(d);
    est.push_back(e.ping_id, e.time, Pose::translation(e.pose.position() + Vec3(d.x(), d.y(), 0)));
  }
  const Vec2 offset(3.0, -1.5);
  Trajectory moved;
  double sum = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    moved.push_back(est[k].ping_id, est[k].time,
                    Pose::translation(est[k].pose.position() + Vec3(offset.x(), offset.y(), 0)));
    sum += (err[k] + offset).squaredNorm();
  }
  EXPECT_NEAR(ate(moved, ref), std::sqrt(sum / static_cast<double>(err.size())), 1e-12);
}

TEST(Ate, RejectsMismatchedTrajectories) {
  const Trajectory a = line_trajectory(10, 0.5);
  const Trajectory b = line_trajectory(11, 0.5);
  EXPECT_THROW(static_cast<void>(ate(a, b)), std::invalid_argument);
  Trajectory c;
  for (int k = 0; k < 10; ++k) c.push_back(k + 1, 0.0, Pose());
  EXPECT_THROW(static_cast<void>(ate(a, c)), std::invalid_argument);
}

TEST(Ray, HitsFlatFloorAtSlantRange) {
  const Heightmap m = generate_bathymetry(1, test::flat_floor(40.0));
  const Pose body = Pose::from_rpy(Vec3(0, 100, 20), 0, 0, test::kPi / 2);
  for (double slant : {25.0, 60.0, 120.0}) {
    const Ray ray = keypoint_ray(body, Pose(), Side::kStarboard, slant, 20.0);
    EXPECT_NEAR(ray.direction.norm(), 1.0, 1e-12);
    const auto hit = raycast(ray.origin, ray.direction, m);
    ASSERT_TRUE(hit.has_value());
    EXPECT_NEAR((*hit - ray.origin).norm(), slant, 1e-3);
    EXPECT_GT(hit->x(), 0.0);  // starboard of a north heading is east
  }
}

TEST(Epe, RowAndColumnDifferences) {
  std::vector<Correspondence> det(2);
  std::vector<std::optional<Keypoint>> base(2);
  det[0].target.row = 10;
  det[0].target.col = 20;
  det[1].target.row = 5;
  det[1].target.col = 5;
  Keypoint b0 = det[0].target;
  b0.row = 12;
  b0.col = 17;
  base[0] = b0;
  const EpeReport r = epe(det, base);
  EXPECT_EQ(r.count, 1U);
  EXPECT_EQ(r.missing, 1U);
  EXPECT_DOUBLE_EQ(r.mean_u, 2.0);
  EXPECT_DOUBLE_EQ(r.mean_v, 3.0);
}

TEST(DepthError, MeanAndStd) {
  const Heightmap m = generate_bathymetry(1, test::flat_floor(40.0));
  std::vector<LandmarkEstimate> lms(3);
  lms[0].position = Vec3(0, 100, 41.0);
  lms[1].position = Vec3(0, 100, 37.0);
  lms[2].position = Vec3(1e6, 0, 40.0);
  const DepthErrorStats s = landmark_depth_error(lms, m);
  EXPECT_EQ(s.count, 2U);
  EXPECT_EQ(s.skipped, 1U);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
}

// Two starboard images of parallel lines 50 m apart over relief, recorded
// on the true trajectory.
struct TwoLines {
  PipelineConfig cfg;
  Heightmap map;
  Trajectory truth;
  std::vector<SonarImage> images;
};

TwoLines two_lines() {
  TwoLines t;
  t.cfg = test::reduced_config(3, 2, 100.0);
  t.map = generate_bathymetry(3, t.cfg.bathymetry);
  const Survey s = simulate_survey(t.map, t.cfg.survey, t.cfg.sonar, t.cfg.simulation, 3);
  for (std::size_t k = 0; k < s.pings.size(); ++k) {
    t.truth.push_back(s.pings[k].ping_id, s.pings[k].time, s.truth[k]);
  }
  t.images = build_images(s.pings, s.lines, t.cfg);
  return t;
}

// Pixel that recorded seafloor point `p`: the row whose ping plane passes
// nearest p, and the canonical column whose slant range equals |p - sensor|.
Keypoint oracle_pixel(const SonarImage& im, const Vec3& p) {
  int best = 0;
  double dist = 1e300;
  for (int r = 0; r < im.num_rows(); ++r) {
    const Pose& pose = im.rows[r].pose;
    const double along = std::abs((p - pose.position()).dot(pose.rotation().col(0)));
    if (along < dist) {
      dist = along;
      best = r;
    }
  }
  const Vec3 sensor = (im.rows[best].pose * im.sensor_offset).position();
  const double slant = (p - sensor).norm();
  const double alt = im.rows[best].altitude;
  const double ground = std::sqrt(slant * slant - alt * alt);
  Keypoint k;
  k.image_id = im.image_id;
  k.side = im.side;
  k.row = best;
  k.col = static_cast<int>(std::lround(ground / im.column_resolution - 0.5));
  return k;
}

TEST(Consistency, TruePosesBoundedByDiscretization) {
  const TwoLines t = two_lines();
  const SonarImage& a = find_image(t.images, 1);
  const SonarImage& b = find_image(t.images, 3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(12.0, 38.0);
  std::uniform_real_distribution<double> uy(20.0, 80.0);
  std::vector<Correspondence> corrs;
  for (int k = 0; k < 100; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    const Vec3 p(x, y, *t.map.depth_at(x, y));
    Correspondence c;
    c.source = oracle_pixel(a, p);
    c.target = oracle_pixel(b, p);
    corrs.push_back(c);
  }
  const ConsistencyReport r = landmark_consistency(corrs, t.images, t.truth, t.map);
  EXPECT_EQ(r.count + r.skipped, corrs.size());
  EXPECT_GE(r.count, 95U);
  EXPECT_LT(r.overall, 2 * t.cfg.bathymetry.cell_size);
  ASSERT_EQ(r.pairs.size(), 1U);
  EXPECT_EQ(r.pairs[0].source_image, 1);
  EXPECT_EQ(r.pairs[0].target_image, 3);

  // A 3 m error on the second line shows up as inconsistency.
  Trajectory shifted;
  for (const auto& e : t.truth.entries()) {
    const bool second = e.ping_id >= b.rows.front().ping_id;
    shifted.push_back(e.ping_id, e.time,
                      second ? Pose::translation(0, 3, 0) * e.pose : e.pose);
  }
  const ConsistencyReport bad = landmark_consistency(corrs, t.images, shifted, t.map);
  EXPECT_GT(bad.overall, 2.0);
}

TEST(Baseline, MatchesOraclePixel) {
  const TwoLines t = two_lines();
  const SonarImage& b = find_image(t.images, 3);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(12.0, 38.0);
  std::uniform_real_distribution<double> uy(20.0, 80.0);
  int found = 0;
  for (int k = 0; k < 30; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    const Vec3 p(x, y, *t.map.depth_at(x, y));
    const Keypoint want = oracle_pixel(b, p);
    const auto got = baseline_correspondence(p, b, t.truth, t.map, 0.5);
    if (!got) continue;
    ++found;
    EXPECT_LE(std::abs(got->row - want.row), 1);
    EXPECT_LE(std::abs(got->col - want.col), 1);
  }
  EXPECT_GE(found, 27);
}

}  // namespace
}  // namespace sss
