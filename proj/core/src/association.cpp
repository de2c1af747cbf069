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

#include "sss/association.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>

namespace sss {

void AssociationConfig::validate() const {
  if (cell_size <= 0) throw std::invalid_argument("association.cell_size must be > 0");
  if (max_per_cell <= 0) {
    throw std::invalid_argument("association.max_per_cell must be > 0");
  }
  if (!(corner_threshold > 0.0F)) {
    throw std::invalid_argument("association.corner_threshold must be > 0");
  }
  if (radius < 0.0) throw std::invalid_argument("association.radius must be >= 0");
  if (ransac_row_tolerance < 0) {
    throw std::invalid_argument("association.ransac_row_tolerance must be >= 0");
  }
  if (ransac_iterations <= 0) {
    throw std::invalid_argument("association.ransac_iterations must be > 0");
  }
  if (blur_sigma < 0.0) throw std::invalid_argument("association.blur_sigma must be >= 0");
  if (!(max_invalid_fraction >= 0.0 && max_invalid_fraction <= 1.0)) {
    throw std::invalid_argument("association.max_invalid_fraction must be in [0, 1]");
  }
}

Grid<float> smooth_image(const Grid<float>& pixels, double sigma) {
  if (sigma <= 0.0) return pixels;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k) {
    kernel[static_cast<std::size_t>(k + radius)] =
        std::exp(-0.5 * k * k / (sigma * sigma));
  }
  const int rows = pixels.rows();
  const int cols = pixels.cols();
  // Normalized convolution: smooth value*mask and mask separately.
  Grid<double> num(rows, cols, 0.0);
  Grid<double> den(rows, cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double n = 0.0;
      double d = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int cc = c + k;
        if (cc < 0 || cc >= cols) continue;
        const float v = pixels(r, cc);
        if (!is_valid_pixel(v)) continue;
        const double w = kernel[static_cast<std::size_t>(k + radius)];
        n += w * v;
        d += w;
      }
      num(r, c) = n;
      den(r, c) = d;
    }
  }
  Grid<float> out(rows, cols, kInvalidPixel);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!is_valid_pixel(pixels(r, c))) continue;
      double n = 0.0;
      double d = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int rr = r + k;
        if (rr < 0 || rr >= rows) continue;
        const double w = kernel[static_cast<std::size_t>(k + radius)];
        n += w * num(rr, c);
        d += w * den(rr, c);
      }
      out(r, c) = d > 0.0 ? static_cast<float>(n / d) : kInvalidPixel;
    }
  }
  return out;
}

namespace {

// Bresenham circle of radius 3, clockwise from 12 o'clock, as (drow, dcol).
constexpr std::array<std::array<int, 2>, 16> kCircle{{{-3, 0}, {-3, 1}, {-2, 2},
                                                     {-1, 3}, {0, 3}, {1, 3},
                                                     {2, 2}, {3, 1}, {3, 0},
                                                     {3, -1}, {2, -2}, {1, -3},
                                                     {0, -3}, {-1, -3}, {-2, -2},
                                                     {-3, -1}}};
constexpr int kArcLength = 9;

bool has_arc(const std::array<bool, 16>& flags) {
  int run = 0;
  for (int i = 0; i < 32; ++i) {
    if (flags[static_cast<std::size_t>(i % 16)]) {
      if (++run >= kArcLength) return true;
    } else {
      run = 0;
    }
  }
  return false;
}

}  // namespace

std::optional<float> fast_corner_score(const Grid<float>& img, int row, int col,
                                       float threshold) {
  if (row < 3 || col < 3 || row + 3 >= img.rows() || col + 3 >= img.cols()) {
    return std::nullopt;
  }
  const float center = img(row, col);
  if (!is_valid_pixel(center)) return std::nullopt;
  std::array<bool, 16> bright{};
  std::array<bool, 16> dark{};
  float bright_sum = 0.0F;
  float dark_sum = 0.0F;
  for (std::size_t i = 0; i < kCircle.size(); ++i) {
    const float v = img(row + kCircle[i][0], col + kCircle[i][1]);
    if (!is_valid_pixel(v)) return std::nullopt;
    const float d = v - center;
    if (d > threshold) {
      bright[i] = true;
      bright_sum += d - threshold;
    } else if (-d > threshold) {
      dark[i] = true;
      dark_sum += -d - threshold;
    }
  }
  const bool is_bright = has_arc(bright);
  const bool is_dark = has_arc(dark);
  if (!is_bright && !is_dark) return std::nullopt;
  float score = 0.0F;
  if (is_bright) score = bright_sum;
  if (is_dark) score = std::max(score, dark_sum);
  return score;
}

namespace {

std::vector<Keypoint> detect_on_smoothed(const SonarImage& image,
                                         const Grid<float>& smoothed,
                                         const AssociationConfig& cfg) {
  const int rows = smoothed.rows();
  const int cols = smoothed.cols();
  std::vector<Keypoint> out;
  if (rows < cfg.cell_size || cols < cfg.cell_size) return out;

  Grid<float> score(rows, cols, -1.0F);
  for (int r = 3; r + 3 < rows; ++r) {
    for (int c = 3; c + 3 < cols; ++c) {
      if (auto s = fast_corner_score(smoothed, r, c, cfg.corner_threshold)) {
        score(r, c) = *s;
      }
    }
  }

  // 3x3 non-maximum suppression; equal scores resolved by raster order.
  auto is_local_max = [&](int r, int c) {
    const float s = score(r, c);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int rr = r + dr;
        const int cc = c + dc;
        if (!score.contains(rr, cc)) continue;
        const float n = score(rr, cc);
        if (n > s) return false;
        if (n == s && (dr < 0 || (dr == 0 && dc < 0))) return false;
      }
    }
    return true;
  };

  struct Candidate {
    float score;
    int row;
    int col;
  };
  for (int r0 = 0; r0 < rows; r0 += cfg.cell_size) {
    for (int c0 = 0; c0 < cols; c0 += cfg.cell_size) {
      const int r1 = std::min(rows, r0 + cfg.cell_size);
      const int c1 = std::min(cols, c0 + cfg.cell_size);
      std::size_t invalid = 0;
      std::vector<Candidate> cands;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
          if (!is_valid_pixel(image.pixels(r, c))) ++invalid;
          if (score(r, c) >= 0.0F && is_local_max(r, c)) {
            cands.push_back({score(r, c), r, c});
          }
        }
      }
      const auto area = static_cast<double>((r1 - r0) * (c1 - c0));
      if (static_cast<double>(invalid) > cfg.max_invalid_fraction * area) continue;
      std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(b.score, a.row, a.col) < std::tie(a.score, b.row, b.col);
      });
      const auto keep = std::min<std::size_t>(cands.size(),
                                              static_cast<std::size_t>(cfg.max_per_cell));
      for (std::size_t i = 0; i < keep; ++i) {
        Keypoint kp;
        kp.image_id = image.image_id;
        kp.row = cands[i].row;
        kp.col = cands[i].col;
        kp.side = image.side;
        kp.score = cands[i].score;
        if (image.georeferenced()) kp.geo = image.georef(kp.row, kp.col);
        out.push_back(std::move(kp));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Keypoint> detect_corners_grid(const SonarImage& image,
                                          const AssociationConfig& cfg) {
  cfg.validate();
  return detect_on_smoothed(image, smooth_image(image.pixels, cfg.blur_sigma), cfg);
}

std::optional<std::vector<float>> compute_descriptor(const Grid<float>& smoothed,
                                                     int row, int col) {
  constexpr int kHalf = 8;
  constexpr int kSpatial = 4;
  constexpr int kOrient = 8;
  constexpr double kSigma = 8.0;
  if (row - kDescriptorRadius < 0 || col - kDescriptorRadius < 0 ||
      row + kDescriptorRadius - 1 >= smoothed.rows() ||
      col + kDescriptorRadius - 1 >= smoothed.cols()) {
    return std::nullopt;
  }
  for (int dr = -kDescriptorRadius; dr < kDescriptorRadius; ++dr) {
    for (int dc = -kDescriptorRadius; dc < kDescriptorRadius; ++dc) {
      if (!is_valid_pixel(smoothed(row + dr, col + dc))) return std::nullopt;
    }
  }
  std::array<double, kDescriptorSize> hist{};
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (int dr = -kHalf; dr < kHalf; ++dr) {
    for (int dc = -kHalf; dc < kHalf; ++dc) {
      const int r = row + dr;
      const int c = col + dc;
      const double gx = 0.5 * (smoothed(r, c + 1) - smoothed(r, c - 1));
      const double gy = 0.5 * (smoothed(r + 1, c) - smoothed(r - 1, c));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += kTwoPi;
      const double u = dr + 0.5;
      const double v = dc + 0.5;
      const double weight = mag * std::exp(-(u * u + v * v) / (2.0 * kSigma * kSigma));
      const double yb = (u + kHalf) / 4.0 - 0.5;
      const double xb = (v + kHalf) / 4.0 - 0.5;
      const double ob = theta / kTwoPi * kOrient;
      const int y0 = static_cast<int>(std::floor(yb));
      const int x0 = static_cast<int>(std::floor(xb));
      const int o0 = static_cast<int>(std::floor(ob));
      const double fy = yb - y0;
      const double fx = xb - x0;
      const double fo = ob - o0;
      for (int iy = 0; iy < 2; ++iy) {
        const int y = y0 + iy;
        if (y < 0 || y >= kSpatial) continue;
        const double wy = iy == 0 ? 1.0 - fy : fy;
        for (int ix = 0; ix < 2; ++ix) {
          const int x = x0 + ix;
          if (x < 0 || x >= kSpatial) continue;
          const double wx = ix == 0 ? 1.0 - fx : fx;
          for (int io = 0; io < 2; ++io) {
            const int o = (o0 + io) % kOrient;
            const double wo = io == 0 ? 1.0 - fo : fo;
            hist[static_cast<std::size_t>((y * kSpatial + x) * kOrient + o)] +=
                weight * wy * wx * wo;
          }
        }
      }
    }
  }
  auto normalize = [&hist]() {
    double n = 0.0;
    for (double h : hist) n += h * h;
    n = std::sqrt(n);
    if (n < 1e-12) return false;
    for (double& h : hist) h /= n;
    return true;
  };
  if (!normalize()) return std::nullopt;
  for (double& h : hist) h = std::min(h, 0.2);
  if (!normalize()) return std::nullopt;
  return std::vector<float>(hist.begin(), hist.end());
}

std::vector<Keypoint> extract_features(const SonarImage& image,
                                       const AssociationConfig& cfg, bool half_turn) {
  cfg.validate();
  const Grid<float> smoothed = smooth_image(image.pixels, cfg.blur_sigma);
  std::vector<Keypoint> kps = detect_on_smoothed(image, smoothed, cfg);
  Grid<float> rotated;
  if (half_turn) {
    rotated = smoothed;
    std::reverse(rotated.data().begin(), rotated.data().end());
  }
  std::vector<Keypoint> out;
  out.reserve(kps.size());
  for (auto& kp : kps) {
    auto d = half_turn ? compute_descriptor(rotated, smoothed.rows() - 1 - kp.row,
                                            smoothed.cols() - 1 - kp.col)
                       : compute_descriptor(smoothed, kp.row, kp.col);
    if (d) {
      kp.descriptor = std::move(*d);
      out.push_back(std::move(kp));
    }
  }
  return out;
}

double descriptor_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("descriptor_distance: size mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<Correspondence> match_near_neighbor(std::span<const Keypoint> src,
                                                std::span<const Keypoint> tgt,
                                                double radius) {
  std::vector<Correspondence> out;
  if (!(radius > 0.0)) return out;
  const double r2 = radius * radius;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  // Best claimant per target: (distance, source index).
  std::vector<std::pair<double, std::size_t>> claim(
      tgt.size(), {std::numeric_limits<double>::infinity(), kNone});
  for (std::size_t i = 0; i < src.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = kNone;
    for (std::size_t j = 0; j < tgt.size(); ++j) {
      const double dx = src[i].geo.x() - tgt[j].geo.x();
      const double dy = src[i].geo.y() - tgt[j].geo.y();
      if (dx * dx + dy * dy > r2) continue;
      const double d = descriptor_distance(src[i].descriptor, tgt[j].descriptor);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best_j == kNone) continue;
    if (best < claim[best_j].first) claim[best_j] = {best, i};
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    if (claim[j].second != kNone) pairs.emplace_back(claim[j].second, j);
  }
  std::sort(pairs.begin(), pairs.end());
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    out.push_back({src[i], tgt[j], claim[j].first, false});
  }
  return out;
}

int RowModel::row_difference(const Correspondence& c) const {
  const int t = reversed ? target_rows - 1 - c.target.row : c.target.row;
  return t - c.source.row;
}

RansacResult sliding_compatibility_ransac(std::span<const Correspondence> cands,
                                          const AssociationConfig& cfg,
                                          const RowModel& model) {
  RansacResult result;
  result.candidates.assign(cands.begin(), cands.end());
  for (auto& c : result.candidates) c.inlier = false;
  if (cands.empty()) return result;

  const std::size_t n = cands.size();
  std::vector<std::size_t> canonical(n);
  std::iota(canonical.begin(), canonical.end(), 0);
  auto key = [&](std::size_t i) {
    const auto& c = cands[i];
    return std::make_tuple(c.source.row, c.source.col, c.target.row, c.target.col,
                           c.source.image_id, c.target.image_id);
  };
  std::stable_sort(canonical.begin(), canonical.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<int> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = model.row_difference(cands[i]);

  std::vector<std::size_t> order = canonical;
  std::mt19937_64 rng(cfg.rng_seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t rounds =
      std::min(n, static_cast<std::size_t>(cfg.ransac_iterations));

  std::size_t best_count = 0;
  double best_mean = std::numeric_limits<double>::infinity();
  int best_h = 0;
  for (std::size_t it = 0; it < rounds; ++it) {
    const int h = delta[order[it]];
    std::size_t count = 0;
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int d = std::abs(delta[i] - h);
      if (d <= cfg.ransac_row_tolerance) {
        ++count;
        dev += d;
      }
    }
    const double mean = dev / static_cast<double>(count);
    const bool better = count > best_count ||
                        (count == best_count && mean < best_mean) ||
                        (count == best_count && mean == best_mean && h < best_h);
    if (better) {
      best_count = count;
      best_mean = mean;
      best_h = h;
    }
  }
  result.hypothesis = best_h;
  result.mean_deviation = best_mean;
  for (std::size_t i = 0; i < n; ++i) {
    result.candidates[i].inlier =
        std::abs(delta[i] - best_h) <= cfg.ransac_row_tolerance;
  }
  for (std::size_t i : canonical) {
    if (result.candidates[i].inlier) result.inliers.push_back(result.candidates[i]);
  }
  return result;
}

}  // namespace sss
