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

#include "sss/sonar_image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

namespace sss {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

void SonarConfig::validate() const {
  if (!(max_range > 0.0)) throw std::invalid_argument("sonar.max_range must be > 0");
  if (bins_per_side < 2) throw std::invalid_argument("sonar.bins_per_side must be >= 2");
  if (!(beam_width > 0.0)) throw std::invalid_argument("sonar.beam_width must be > 0");
  if (!(range_std > 0.0)) throw std::invalid_argument("sonar.range_std must be > 0");
  if (!(ping_rate > 0.0)) throw std::invalid_argument("sonar.ping_rate must be > 0");
  if (!(canonical_resolution > 0.0)) {
    throw std::invalid_argument("sonar.canonical_resolution must be > 0");
  }
}

int SonarConfig::canonical_columns() const {
  return static_cast<int>(std::ceil(max_range / canonical_resolution - 1e-9));
}

void Ping::validate(int bins_per_side) const {
  const std::string id = "ping " + std::to_string(ping_id);
  if (!(altitude > 0.0)) throw std::invalid_argument(id + ": altitude must be > 0");
  if (static_cast<int>(port.size()) != bins_per_side ||
      static_cast<int>(starboard.size()) != bins_per_side) {
    throw std::invalid_argument(id + ": intensity arrays must have " +
                                std::to_string(bins_per_side) + " bins");
  }
  auto bad = [](float v) { return !std::isfinite(v) || v < 0.0F; };
  if (std::any_of(port.begin(), port.end(), bad) ||
      std::any_of(starboard.begin(), starboard.end(), bad)) {
    throw std::invalid_argument(id + ": intensities must be finite and >= 0");
  }
}

double SonarImage::slant_range(int row, double col) const {
  if (!canonical) return (col + 0.5) * column_resolution;
  const double g = ground_range(col);
  const double h = rows[row].altitude;
  return std::sqrt(g * g + h * h);
}

Vec3 SonarImage::georef(int row, double col) const {
  if (!georeferenced()) throw std::logic_error("image is not geo-referenced");
  return geo_origin_[row] + ground_range(col) * geo_dir_[row];
}

int SonarImage::row_of(std::int64_t ping_id) const {
  // Rows are time ordered with increasing ping ids.
  auto it = std::lower_bound(rows.begin(), rows.end(), ping_id,
                             [](const ImageRow& r, std::int64_t id) {
                               return r.ping_id < id;
                             });
  if (it == rows.end() || it->ping_id != ping_id) return -1;
  return static_cast<int>(it - rows.begin());
}

std::vector<float> downsample_ping(std::span<const float> raw, int target_bins) {
  if (target_bins <= 0) throw std::invalid_argument("target_bins must be > 0");
  const auto n = static_cast<std::int64_t>(raw.size());
  if (n < target_bins) {
    throw std::invalid_argument("downsample_ping: raw has " + std::to_string(n) +
                                " bins, fewer than target " +
                                std::to_string(target_bins));
  }
  std::vector<float> out(static_cast<std::size_t>(target_bins));
  const double ratio = static_cast<double>(n) / target_bins;
  for (int k = 0; k < target_bins; ++k) {
    const double lo = k * ratio;
    const double hi = (k + 1) * ratio;
    double sum = 0.0;
    auto i = static_cast<std::int64_t>(std::floor(lo));
    for (; i < n && static_cast<double>(i) < hi; ++i) {
      const double w = std::min<double>(i + 1, hi) - std::max<double>(i, lo);
      if (w > 0.0) sum += w * raw[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(k)] = static_cast<float>(sum / (hi - lo));
  }
  return out;
}

SonarImage build_waterfall(std::span<const Ping> pings, Side side, int image_id,
                           int line, const SonarConfig& cfg) {
  cfg.validate();
  SonarImage img;
  img.image_id = image_id;
  img.line = line;
  img.side = side;
  img.column_resolution = cfg.bin_size();
  img.canonical = false;
  img.sensor_offset = cfg.sensor_offset;
  img.pixels = Grid<float>(static_cast<int>(pings.size()), cfg.bins_per_side);
  img.rows.reserve(pings.size());
  for (std::size_t r = 0; r < pings.size(); ++r) {
    const Ping& p = pings[r];
    if (r > 0 && p.ping_id <= pings[r - 1].ping_id) {
      throw std::invalid_argument("build_waterfall: pings must be ordered by id");
    }
    img.rows.push_back({p.ping_id, p.time, p.dr_pose, p.altitude});
    const auto& src = p.side(side);
    auto dst = img.pixels.row(static_cast<int>(r));
    if (static_cast<int>(src.size()) == cfg.bins_per_side) {
      std::copy(src.begin(), src.end(), dst.begin());
    } else {
      const auto ds = downsample_ping(src, cfg.bins_per_side);
      std::copy(ds.begin(), ds.end(), dst.begin());
    }
  }
  return img;
}

SonarImage intensity_correction(const SonarImage& image) {
  if (image.canonical) {
    throw std::invalid_argument("intensity_correction: image is already canonical");
  }
  SonarImage out = image;
  const double bin = image.column_resolution;
  double sum = 0.0;
  std::size_t count = 0;
  for (int r = 0; r < out.num_rows(); ++r) {
    const double h = out.rows[r].altitude;
    if (!(h > 0.0)) {
      throw std::invalid_argument("intensity_correction: ping " +
                                  std::to_string(out.rows[r].ping_id) +
                                  " has non-positive altitude");
    }
    auto row = out.pixels.row(r);
    for (int b = 0; b < out.num_cols(); ++b) {
      const double s = (b + 0.5) * bin;
      float& v = row[static_cast<std::size_t>(b)];
      if (s < h || !is_valid_pixel(v)) {
        v = kInvalidPixel;
        continue;
      }
      const double cos_theta = h / s;
      v = static_cast<float>(v / (cos_theta * cos_theta));
      sum += v;
      ++count;
    }
  }
  if (count > 0 && sum > 0.0) {
    const auto scale = static_cast<float>(static_cast<double>(count) / sum);
    for (float& v : out.pixels.data()) {
      if (is_valid_pixel(v)) v *= scale;
    }
  }
  return out;
}

SonarImage slant_range_correction(const SonarImage& image, const SonarConfig& cfg,
                                  double out_resolution) {
  if (image.canonical) {
    throw std::invalid_argument("slant_range_correction: image is already canonical");
  }
  if (!(out_resolution > 0.0)) {
    throw std::invalid_argument("slant_range_correction: resolution must be > 0");
  }
  const double bin = image.column_resolution;
  const int in_cols = image.num_cols();
  const int out_cols =
      static_cast<int>(std::ceil(cfg.max_range / out_resolution - 1e-9));
  SonarImage out = image;
  out.pixels = Grid<float>(image.num_rows(), out_cols, kInvalidPixel);
  out.column_resolution = out_resolution;
  out.canonical = true;
  for (int r = 0; r < image.num_rows(); ++r) {
    const double h = image.rows[r].altitude;
    const auto src = image.pixels.row(r);
    auto dst = out.pixels.row(r);
    for (int c = 0; c < out_cols; ++c) {
      const double g = (c + 0.5) * out_resolution;
      const double s = std::sqrt(g * g + h * h);
      const double u = s / bin - 0.5;
      const auto b0 = static_cast<int>(std::floor(u));
      if (b0 < 0 || b0 + 1 >= in_cols) continue;
      const float v0 = src[static_cast<std::size_t>(b0)];
      const float v1 = src[static_cast<std::size_t>(b0 + 1)];
      if (!is_valid_pixel(v0) || !is_valid_pixel(v1)) continue;
      const double f = u - b0;
      dst[static_cast<std::size_t>(c)] = static_cast<float>((1.0 - f) * v0 + f * v1);
    }
  }
  return out;
}

SonarImage canonicalize(const SonarImage& image, const SonarConfig& cfg) {
  if (image.canonical) return image;
  return slant_range_correction(intensity_correction(image), cfg,
                                cfg.canonical_resolution);
}

SonarImage georeference(const SonarImage& image, std::span<const Pose> row_poses) {
  if (!image.canonical) {
    throw std::invalid_argument("georeference: image must be canonical");
  }
  if (static_cast<int>(row_poses.size()) != image.num_rows()) {
    throw std::invalid_argument("georeference: one pose per row required");
  }
  SonarImage out = image;
  out.geo_origin_.resize(row_poses.size());
  out.geo_dir_.resize(row_poses.size());
  for (std::size_t r = 0; r < row_poses.size(); ++r) {
    const Pose sensor = row_poses[r] * image.sensor_offset;
    Vec3 origin = sensor.position();
    origin.z() += image.rows[r].altitude;
    out.geo_origin_[r] = origin;
    out.geo_dir_[r] = side_direction(sensor, image.side);
    out.rows[r].pose = row_poses[r];
  }
  return out;
}

SonarImage georeference(const SonarImage& image) {
  std::vector<Pose> poses;
  poses.reserve(image.rows.size());
  for (const auto& r : image.rows) poses.push_back(r.pose);
  return georeference(image, poses);
}

std::vector<Vec2> footprint_hull(const SonarImage& image) {
  if (!image.georeferenced()) {
    throw std::invalid_argument("footprint_hull: image is not geo-referenced");
  }
  bg::model::multi_point<BgPoint> pts;
  const int n = image.num_rows();
  const int step = std::max(1, n / 64);
  auto add_row = [&](int r) {
    int first = -1;
    int last = -1;
    const auto row = image.pixels.row(r);
    for (int c = 0; c < image.num_cols(); ++c) {
      if (is_valid_pixel(row[static_cast<std::size_t>(c)])) {
        if (first < 0) first = c;
        last = c;
      }
    }
    if (first < 0) return;
    for (int c : {first, last}) {
      const Vec3 p = image.georef(r, c);
      bg::append(pts, BgPoint(p.x(), p.y()));
    }
  };
  for (int r = 0; r < n; r += step) add_row(r);
  if (n > 0) add_row(n - 1);
  BgPolygon hull;
  bg::convex_hull(pts, hull);
  std::vector<Vec2> out;
  for (const auto& p : hull.outer()) out.emplace_back(p.x(), p.y());
  return out;
}

namespace {

BgPolygon to_polygon(const std::vector<Vec2>& ring) {
  BgPolygon poly;
  for (const auto& p : ring) bg::append(poly.outer(), BgPoint(p.x(), p.y()));
  bg::correct(poly);
  return poly;
}

}  // namespace

OverlapReport overlap_check(const SonarImage& a, const SonarImage& b,
                            double min_overlap_area) {
  if (!a.georeferenced() || !b.georeferenced()) {
    throw std::invalid_argument("overlap_check: both images must be geo-referenced");
  }
  const BgPolygon pa = to_polygon(footprint_hull(a));
  const BgPolygon pb = to_polygon(footprint_hull(b));
  BgMultiPolygon inter;
  bg::intersection(pa, pb, inter);
  OverlapReport rep;
  rep.area = bg::area(inter);
  rep.overlaps = rep.area >= min_overlap_area && rep.area > 0.0;
  const BgPolygon* largest = nullptr;
  double best = -1.0;
  for (const auto& p : inter) {
    const double ar = bg::area(p);
    if (ar > best) {
      best = ar;
      largest = &p;
    }
  }
  if (largest != nullptr) {
    for (const auto& p : largest->outer()) rep.polygon.emplace_back(p.x(), p.y());
  }
  return rep;
}

}  // namespace sss
