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
#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "sss/association.hpp"
#include "sss/pose_graph.hpp"
#include "sss/simulator.hpp"

namespace {

const sss::Heightmap& test_map() {
  static const sss::Heightmap map = [] {
    sss::BathymetryParams p;
    p.width = 200.0;
    p.length = 200.0;
    p.num_patches = 500;
    return sss::generate_bathymetry(7, p);
  }();
  return map;
}

sss::SonarImage textured_image(int rows, int cols) {
  sss::SonarImage img;
  img.pixels = sss::Grid<float>(rows, cols);
  std::mt19937 rng(3);
  std::gamma_distribution<float> speckle(8.0F, 1.0F / 8.0F);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const float base = 0.8F + 0.4F * static_cast<float>((r / 6 + c / 9) % 2);
      img.pixels(r, c) = base * speckle(rng);
    }
  }
  img.column_resolution = 0.5;
  img.canonical = true;
  return img;
}

void BM_Raycast(benchmark::State& state) {
  const sss::Heightmap& map = test_map();
  const sss::Vec3 origin(0.0, 40.0, 20.0);
  double angle = 0.0;
  for (auto _ : state) {
    angle = std::fmod(angle + 0.01, 1.2);
    const sss::Vec3 dir(std::sin(angle + 0.2), 0.0, std::cos(angle + 0.2));
    benchmark::DoNotOptimize(sss::raycast(origin, dir, map));
  }
}
BENCHMARK(BM_Raycast);

void BM_GraphOptimize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<std::int64_t> ids(n);
  std::vector<sss::Pose> truth(n);
  for (int k = 0; k < n; ++k) {
    ids[k] = k;
    truth[k] = sss::Pose::rot_z(0.002 * k, sss::Vec3(0.5 * k, 0.01 * k * k / n, 0.0));
  }
  const sss::OdometryNoise noise;
  const auto chain = sss::make_odometry_chain(ids, truth, noise);
  for (auto _ : state) {
    state.PauseTiming();
    sss::PoseGraph g;
    for (int k = 0; k < n; ++k) {
      g.add_node(k, truth[k] * sss::Pose::translation(0.01 * k, 0.0, 0.0), k == 0);
    }
    for (const auto& f : chain) g.add_factor(f);
    for (int k = 0; k + 50 < n; k += 50) {
      sss::Factor lc;
      lc.kind = sss::FactorKind::kLoopClosure;
      lc.from = k;
      lc.to = k + 50;
      lc.measured = truth[k].inverse() * truth[k + 50];
      lc.covariance = sss::Mat6::Identity() * 1e-3;
      g.add_factor(lc);
    }
    state.ResumeTiming();
    benchmark::DoNotOptimize(g.optimize(sss::GraphConfig{}));
  }
}
BENCHMARK(BM_GraphOptimize)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_DetectCorners(benchmark::State& state) {
  const sss::SonarImage img = textured_image(400, 300);
  const sss::AssociationConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(sss::detect_corners_grid(img, cfg));
}
BENCHMARK(BM_DetectCorners)->Unit(benchmark::kMillisecond);

void BM_Descriptor(benchmark::State& state) {
  const sss::SonarImage img = textured_image(64, 64);
  const sss::Grid<float> smoothed = sss::smooth_image(img.pixels, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(sss::compute_descriptor(smoothed, 32, 32));
}
BENCHMARK(BM_Descriptor);

}  // namespace

BENCHMARK_MAIN();
