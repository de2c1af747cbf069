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

#include "sss/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace sss {

Ray keypoint_ray(const Pose& body, const Pose& sensor_offset, Side side, double slant,
                 double altitude) {
  if (!(slant > 0.0)) throw std::invalid_argument("keypoint_ray: slant must be > 0");
  const Pose sensor = body * sensor_offset;
  const double sin_dep = std::clamp(altitude / slant, 0.0, 1.0);
  const double cos_dep = std::sqrt(1.0 - sin_dep * sin_dep);
  const Vec3 dir = cos_dep * side_direction(sensor, side) + sin_dep * Vec3::UnitZ();
  return {sensor.position(), dir.normalized()};
}

std::optional<Vec3> project_pixel(const SonarImage& image, int row, double col,
                                  const Pose& body, const Heightmap& map) {
  const ImageRow& meta = image.rows.at(static_cast<std::size_t>(row));
  const double slant = image.slant_range(row, col);
  const Ray ray = keypoint_ray(body, image.sensor_offset, image.side, slant, meta.altitude);
  // Point of the ping plane at `slant` with depression angle a, and its
  // height below the mesh (positive once under the seafloor).
  const Vec3 side = (ray.direction - ray.direction.z() * Vec3::UnitZ()).normalized();
  auto point = [&](double a) {
    return Vec3(ray.origin + slant * (std::cos(a) * side + std::sin(a) * Vec3::UnitZ()));
  };
  auto below = [&](double a) -> std::optional<double> {
    const Vec3 p = point(a);
    const auto z = map.depth_at(p.x(), p.y());
    if (!z) return std::nullopt;
    return p.z() - *z;
  };
  const double a0 = std::asin(std::clamp(ray.direction.z(), -1.0, 1.0));
  const auto g0 = below(a0);
  if (!g0) return std::nullopt;
  if (*g0 == 0.0) return point(a0);
  // March away from the flat-floor angle in 0.25 m arc steps until the
  // sign flips, then bisect.
  const double step = (*g0 > 0.0 ? -1.0 : 1.0) * 0.25 / slant;
  constexpr double kHalfPi = 1.57079632679489661923;
  double lo = a0;
  double hi = a0;
  bool bracketed = false;
  while (!bracketed) {
    hi = lo + step;
    if (hi > kHalfPi || hi < -kHalfPi) return std::nullopt;
    const auto g = below(hi);
    if (!g) return std::nullopt;
    if ((*g > 0.0) != (*g0 > 0.0) || *g == 0.0) {
      bracketed = true;
    } else {
      lo = hi;
    }
  }
  for (int k = 0; k < 60 && slant * std::abs(hi - lo) > 1e-5; ++k) {
    const double mid = 0.5 * (lo + hi);
    const auto g = below(mid);
    if (!g) return std::nullopt;
    if ((*g > 0.0) == (*g0 > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return point(0.5 * (lo + hi));
}

const SonarImage& find_image(std::span<const SonarImage> images, int image_id) {
  for (const SonarImage& im : images) {
    if (im.image_id == image_id) return im;
  }
  throw std::out_of_range("image " + std::to_string(image_id) + " not found");
}

namespace {

std::optional<Vec3> project_keypoint(const Keypoint& kp, std::span<const SonarImage> images,
                                     const Trajectory& poses, const Heightmap& map) {
  const SonarImage& im = find_image(images, kp.image_id);
  const std::int64_t ping = im.rows.at(static_cast<std::size_t>(kp.row)).ping_id;
  return project_pixel(im, kp.row, kp.col, poses.at(ping), map);
}

using PairKey = std::pair<int, int>;

}  // namespace

ConsistencyReport landmark_consistency(std::span<const Correspondence> corrs,
                                       std::span<const SonarImage> images,
                                       const Trajectory& poses, const Heightmap& map) {
  ConsistencyReport report;
  std::map<PairKey, std::pair<double, std::size_t>> acc;
  double total = 0.0;
  for (const Correspondence& c : corrs) {
    const auto a = project_keypoint(c.source, images, poses, map);
    const auto b = project_keypoint(c.target, images, poses, map);
    if (!a || !b) {
      ++report.skipped;
      continue;
    }
    const double d = (*a - *b).norm();
    auto& slot = acc[{c.source.image_id, c.target.image_id}];
    slot.first += d;
    ++slot.second;
    total += d;
    ++report.count;
  }
  for (const auto& [key, v] : acc) {
    PairMetric m;
    m.source_image = key.first;
    m.target_image = key.second;
    m.count = v.second;
    m.mean = v.first / static_cast<double>(v.second);
    report.pairs.push_back(m);
  }
  report.overall = report.count > 0 ? total / static_cast<double>(report.count) : 0.0;
  return report;
}

double ate(const Trajectory& estimate, const Trajectory& reference) {
  if (estimate.size() != reference.size()) {
    throw std::invalid_argument("ate: trajectories have different lengths");
  }
  if (estimate.empty()) throw std::invalid_argument("ate: empty trajectories");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    if (estimate[i].ping_id != reference[i].ping_id) {
      throw std::invalid_argument("ate: ping id mismatch at index " + std::to_string(i));
    }
    sum += (estimate[i].pose.position() - reference[i].pose.position()).head<2>().squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(estimate.size()));
}

std::optional<Keypoint> baseline_correspondence(const Vec3& landmark, const SonarImage& target,
                                                const Trajectory& poses, const Heightmap& map,
                                                double threshold) {
  if (!target.canonical) {
    throw std::invalid_argument("baseline_correspondence: target must be canonical");
  }
  const int rows = target.num_rows();
  const int cols = target.num_cols();
  if (rows == 0 || !(threshold > 0.0)) return std::nullopt;

  // Row whose across-track plane passes closest to the landmark.
  int best_row = -1;
  double best_along = std::numeric_limits<double>::infinity();
  for (int r = 0; r < rows; ++r) {
    const Pose sensor = poses.at(target.rows[static_cast<std::size_t>(r)].ping_id) *
                        target.sensor_offset;
    const Vec3 rel = landmark - sensor.position();
    if (rel.dot(side_direction(sensor, target.side)) <= 0.0) continue;
    const double along = std::abs(sensor.rotation().col(0).dot(rel));
    if (along < best_along) {
      best_along = along;
      best_row = r;
    }
  }
  // Landmarks beyond the first or last ping plane are outside the footprint.
  if (best_row < 0 || best_along > 1.0) return std::nullopt;

  const ImageRow& meta = target.rows[static_cast<std::size_t>(best_row)];
  const Pose sensor = poses.at(meta.ping_id) * target.sensor_offset;
  const double slant = (landmark - sensor.position()).norm();
  const double ground = std::sqrt(std::max(slant * slant - meta.altitude * meta.altitude, 0.0));
  const int col0 = static_cast<int>(std::lround(ground / target.column_resolution - 0.5));
  if (col0 < -3 || col0 >= cols + 3) return std::nullopt;

  double best = std::numeric_limits<double>::infinity();
  Keypoint kp;
  for (int r = std::max(0, best_row - 2); r <= std::min(rows - 1, best_row + 2); ++r) {
    const Pose& body = poses.at(target.rows[static_cast<std::size_t>(r)].ping_id);
    for (int c = std::max(0, col0 - 3); c <= std::min(cols - 1, col0 + 3); ++c) {
      if (!is_valid_pixel(target.pixels(r, c))) continue;
      const auto hit = project_pixel(target, r, c, body, map);
      if (!hit) continue;
      const double d = (*hit - landmark).norm();
      if (d < best) {
        best = d;
        kp.row = r;
        kp.col = c;
        kp.geo = *hit;
      }
    }
  }
  if (!(best < threshold)) return std::nullopt;
  kp.image_id = target.image_id;
  kp.side = target.side;
  if (target.georeferenced()) kp.geo = target.georef(kp.row, kp.col);
  return kp;
}

std::vector<std::optional<Keypoint>> baselines(std::span<const Correspondence> corrs,
                                               std::span<const SonarImage> images,
                                               const Trajectory& poses, const Heightmap& map,
                                               double threshold) {
  std::vector<std::optional<Keypoint>> out;
  out.reserve(corrs.size());
  for (const Correspondence& c : corrs) {
    const auto lm = project_keypoint(c.source, images, poses, map);
    if (!lm) {
      out.emplace_back();
      continue;
    }
    out.push_back(baseline_correspondence(*lm, find_image(images, c.target.image_id), poses,
                                          map, threshold));
  }
  return out;
}

EpeReport epe(std::span<const Correspondence> detected,
              std::span<const std::optional<Keypoint>> baselines) {
  if (detected.size() != baselines.size()) {
    throw std::invalid_argument("epe: one baseline slot per correspondence required");
  }
  EpeReport report;
  struct Acc {
    double u = 0.0;
    double v = 0.0;
    std::size_t n = 0;
  };
  std::map<PairKey, Acc> acc;
  double su = 0.0;
  double sv = 0.0;
  for (std::size_t i = 0; i < detected.size(); ++i) {
    if (!baselines[i]) {
      ++report.missing;
      continue;
    }
    const double du = std::abs(detected[i].target.row - baselines[i]->row);
    const double dv = std::abs(detected[i].target.col - baselines[i]->col);
    Acc& a = acc[{detected[i].source.image_id, detected[i].target.image_id}];
    a.u += du;
    a.v += dv;
    ++a.n;
    su += du;
    sv += dv;
    ++report.count;
  }
  for (const auto& [key, a] : acc) {
    PairMetric m;
    m.source_image = key.first;
    m.target_image = key.second;
    m.count = a.n;
    m.mean_u = a.u / static_cast<double>(a.n);
    m.mean_v = a.v / static_cast<double>(a.n);
    report.pairs.push_back(m);
  }
  if (report.count > 0) {
    report.mean_u = su / static_cast<double>(report.count);
    report.mean_v = sv / static_cast<double>(report.count);
  }
  return report;
}

DepthErrorStats landmark_depth_error(std::span<const LandmarkEstimate> landmarks,
                                     const Heightmap& map) {
  DepthErrorStats s;
  std::vector<double> errors;
  for (const LandmarkEstimate& lm : landmarks) {
    const auto z = map.depth_at(lm.position.x(), lm.position.y());
    if (!z || !lm.position.allFinite()) {
      ++s.skipped;
      continue;
    }
    errors.push_back(std::abs(lm.position.z() - *z));
  }
  s.count = errors.size();
  if (errors.empty()) return s;
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean = sum / static_cast<double>(errors.size());
  double var = 0.0;
  for (double e : errors) var += (e - s.mean) * (e - s.mean);
  s.std = std::sqrt(var / static_cast<double>(errors.size()));
  return s;
}

}  // namespace sss
