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
#include <vector>

#include <gtest/gtest.h>

#include "sss/pipeline.hpp"
#include "sss/simulator.hpp"
#include "sss/sonar_image.hpp"
#include "support.hpp"

namespace sss {
namespace {

using test::kPi;

struct FlatLine {
  PipelineConfig cfg;
  Heightmap map;
  Survey survey;
};

FlatLine flat_line(int lines = 1, double length = 60.0) {
  FlatLine f;
  f.cfg.bathymetry = test::flat_floor(30.0);
  f.cfg.bathymetry.length = length + 120.0;
  f.cfg.survey.num_lines = lines;
  f.cfg.survey.line_length = length;
  f.cfg.finalize();
  f.map = generate_bathymetry(1, f.cfg.bathymetry);
  f.survey = simulate_survey(f.map, f.cfg.survey, f.cfg.sonar, f.cfg.simulation, 2);
  return f;
}

TEST(Downsample, IntervalMean) {
  const std::vector<float> raw = {1, 2, 3, 4};
  EXPECT_EQ(downsample_ping(raw, 2), (std::vector<float>{1.5F, 3.5F}));
  EXPECT_EQ(downsample_ping(raw, 4), raw);
}

TEST(Waterfall, PreservesRowsAndOrder) {
  const FlatLine f = flat_line();
  const SurveyLine& line = f.survey.lines[0];
  const std::span<const Ping> pings(f.survey.pings.data() + line.first_ping,
                                    static_cast<std::size_t>(line.last_ping - line.first_ping + 1));
  const SonarImage raw = build_waterfall(pings, Side::kStarboard, 1, 0, f.cfg.sonar);
  const SonarImage canon = canonicalize(raw, f.cfg.sonar);
  const SonarImage geo = georeference(canon);
  for (const SonarImage* im : {&raw, &canon, &geo}) {
    ASSERT_EQ(im->num_rows(), static_cast<int>(pings.size()));
    for (int r = 0; r < im->num_rows(); ++r) EXPECT_EQ(im->rows[r].ping_id, pings[r].ping_id);
  }
  EXPECT_TRUE(canon.canonical);
  EXPECT_EQ(canon.num_cols(), f.cfg.sonar.canonical_columns());
}

TEST(Canonical, IdempotentAndColumnsAreGroundRange) {
  const FlatLine f = flat_line();
  const auto images = build_images(f.survey.pings, f.survey.lines, f.cfg);
  const SonarImage& im = images[1];
  const SonarImage again = canonicalize(im, f.cfg.sonar);
  EXPECT_EQ(again.pixels, im.pixels);
  for (int c : {0, 10, 100, 250}) EXPECT_DOUBLE_EQ(im.ground_range(c), (c + 0.5) * 0.5);
}

TEST(Canonical, BeyondMaxRangeIsMasked) {
  const FlatLine f = flat_line();
  const auto images = build_images(f.survey.pings, f.survey.lines, f.cfg);
  const SonarImage& im = images[0];
  for (int r = 0; r < im.num_rows(); r += 7) {
    const double alt = im.rows[r].altitude;
    const double reach = std::sqrt(f.cfg.sonar.max_range * f.cfg.sonar.max_range - alt * alt);
    // Within one raw bin of nadir the interpolation reads water-column bins.
    const double bin = f.cfg.sonar.bin_size();
    const double nadir = std::sqrt((alt + bin) * (alt + bin) - alt * alt);
    for (int c = 0; c < im.num_cols(); ++c) {
      const double g = im.ground_range(c);
      if (g > reach + 1.0) {
        EXPECT_FALSE(is_valid_pixel(im.pixels(r, c)));
      } else if (g > nadir + 1.0 && g < reach - 1.0) {
        EXPECT_TRUE(is_valid_pixel(im.pixels(r, c))) << r << "," << c;
      }
    }
  }
}

TEST(Georeference, FlatFloorPixelsOnTheSeafloor) {
  const FlatLine f = flat_line();
  const auto images = build_images(f.survey.pings, f.survey.lines, f.cfg);
  for (const SonarImage& im : images) {
    for (int r = 0; r < im.num_rows(); r += 17) {
      const Vec3 origin = im.geo_origin(r);
      for (int c = 5; c < im.num_cols(); c += 23) {
        const Vec3 p = im.georef(r, c);
        EXPECT_NEAR(p.z(), 30.0, 0.1);
        EXPECT_NEAR((p - origin).head<2>().norm(), im.ground_range(c), 0.1);
      }
    }
  }
}

TEST(Georeference, SidesPointAway) {
  const FlatLine f = flat_line();
  const auto images = build_images(f.survey.pings, f.survey.lines, f.cfg);
  // Line 0 heads north: port is west, starboard east.
  const Vec3 port = images[0].georef(10, 100);
  const Vec3 stbd = images[1].georef(10, 100);
  EXPECT_LT(port.x(), images[0].geo_origin(10).x());
  EXPECT_GT(stbd.x(), images[1].geo_origin(10).x());
}

TEST(Georeference, GrooveWithinTwoCells) {
  PipelineConfig cfg;
  cfg.bathymetry = test::flat_floor(30.0);
  cfg.bathymetry.length = 180.0;
  TrawlMark mark;
  mark.point = Vec2(35.0, 0.0);
  mark.angle = kPi / 2;
  cfg.bathymetry.marks.push_back(mark);
  cfg.survey.num_lines = 1;
  cfg.survey.line_length = 60.0;
  cfg.simulation.speckle = false;
  cfg.finalize();
  const Heightmap map = generate_bathymetry(1, cfg.bathymetry);
  const Survey s = simulate_survey(map, cfg.survey, cfg.sonar, cfg.simulation, 2);
  const auto images = build_images(s.pings, s.lines, cfg);
  const SonarImage& im = images[1];
  // Groove pixels deviate from the flat-floor level of 1.
  for (int r = 0; r < im.num_rows(); r += 10) {
    double w = 0.0;
    double wx = 0.0;
    for (int c = 40; c < 100; ++c) {
      const float v = im.pixels(r, c);
      if (!is_valid_pixel(v)) continue;
      const double d = std::abs(v - 1.0);
      w += d;
      wx += d * im.georef(r, c).x();
    }
    ASSERT_GT(w, 0.0);
    EXPECT_NEAR(wx / w, 35.0, 2 * cfg.bathymetry.cell_size);
  }
}

TEST(Overlap, ParallelLinesOverlapAndFarImagesDoNot) {
  const FlatLine f = flat_line(3);
  const auto images = build_images(f.survey.pings, f.survey.lines, f.cfg);
  const OverlapReport near = overlap_check(images[1], images[3], 100.0);
  EXPECT_TRUE(near.overlaps);
  EXPECT_GT(near.area, 1000.0);
  // Port of line 0 looks west, starboard of line 2 east, 100 m apart.
  const OverlapReport far = overlap_check(images[0], images[5], 100.0);
  EXPECT_FALSE(far.overlaps);
  EXPECT_DOUBLE_EQ(far.area, 0.0);
}

TEST(Overlap, AreaIsSymmetric) {
  const FlatLine f = flat_line(2);
  const auto images = build_images(f.survey.pings, f.survey.lines, f.cfg);
  EXPECT_NEAR(overlap_check(images[1], images[3], 0.0).area,
              overlap_check(images[3], images[1], 0.0).area, 1e-6);
}

TEST(Ping, ValidateRejectsBadPings) {
  Ping p;
  p.altitude = 10.0;
  p.port.assign(4, 0.5F);
  p.starboard.assign(4, 0.5F);
  EXPECT_NO_THROW(p.validate(4));
  EXPECT_THROW(p.validate(5), std::invalid_argument);
  p.starboard[1] = -1.0F;
  EXPECT_THROW(p.validate(4), std::invalid_argument);
  p.starboard[1] = 0.5F;
  p.altitude = 0.0;
  EXPECT_THROW(p.validate(4), std::invalid_argument);
}

}  // namespace
}  // namespace sss
