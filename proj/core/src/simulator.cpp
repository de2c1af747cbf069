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

#include "sss/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "sss/parallel.hpp"

namespace sss {

Heightmap::Heightmap(double x0, double y0, double cell_size, int nrows, int ncols,
                     double depth, float reflectivity)
    : x0_(x0), y0_(y0), cell_(cell_size), depth_(nrows, ncols, depth),
      reflectivity_(nrows, ncols, reflectivity), zlo_(depth), zhi_(depth) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("heightmap cell size must be > 0");
  if (nrows < 2 || ncols < 2) throw std::invalid_argument("heightmap needs >= 2x2 nodes");
}

void Heightmap::set_depth(int r, int c, double z) {
  depth_(r, c) = z;
  zlo_ = std::min(zlo_, z);
  zhi_ = std::max(zhi_, z);
}

bool Heightmap::contains(double x, double y) const {
  return x >= x0_ && y >= y0_ && x <= x_max() && y <= y_max();
}

namespace {

struct Cell {
  int r;
  int c;
  double fx;
  double fy;
};

Cell locate(double x, double y, double x0, double y0, double cell, int rows, int cols) {
  const double u = (x - x0) / cell;
  const double v = (y - y0) / cell;
  const int c = std::clamp(static_cast<int>(std::floor(u)), 0, cols - 2);
  const int r = std::clamp(static_cast<int>(std::floor(v)), 0, rows - 2);
  return {r, c, u - c, v - r};
}

}  // namespace

std::optional<double> Heightmap::depth_at(double x, double y) const {
  if (!contains(x, y)) return std::nullopt;
  return depth_and_gradient(x, y, nullptr);
}

double Heightmap::depth_and_gradient(double x, double y, Vec2* gradient) const {
  const Cell k = locate(x, y, x0_, y0_, cell_, rows(), cols());
  const double z00 = depth_(k.r, k.c);
  const double z01 = depth_(k.r, k.c + 1);
  const double z10 = depth_(k.r + 1, k.c);
  const double z11 = depth_(k.r + 1, k.c + 1);
  const double a = z00 + (z01 - z00) * k.fx;
  const double b = z10 + (z11 - z10) * k.fx;
  if (gradient != nullptr) {
    const double dzdu = (z01 - z00) * (1.0 - k.fy) + (z11 - z10) * k.fy;
    const double dzdv = b - a;
    *gradient = Vec2(dzdu / cell_, dzdv / cell_);
  }
  return a + (b - a) * k.fy;
}

float Heightmap::reflectivity_at(double x, double y) const {
  const Cell k = locate(x, y, x0_, y0_, cell_, rows(), cols());
  const double a = reflectivity_(k.r, k.c) +
                   (reflectivity_(k.r, k.c + 1) - reflectivity_(k.r, k.c)) * k.fx;
  const double b = reflectivity_(k.r + 1, k.c) +
                   (reflectivity_(k.r + 1, k.c + 1) - reflectivity_(k.r + 1, k.c)) * k.fx;
  return static_cast<float>(a + (b - a) * k.fy);
}

double Heightmap::min_depth() const {
  return *std::min_element(depth_.data().begin(), depth_.data().end());
}

double Heightmap::max_depth() const {
  return *std::max_element(depth_.data().begin(), depth_.data().end());
}

void Heightmap::validate() const {
  if (!(cell_ > 0.0)) throw std::invalid_argument("heightmap cell size must be > 0");
  if (rows() < 2 || cols() < 2) throw std::invalid_argument("heightmap needs >= 2x2 nodes");
  if (!std::all_of(depth_.data().begin(), depth_.data().end(),
                   [](double z) { return std::isfinite(z); })) {
    throw std::invalid_argument("heightmap depths must be finite");
  }
  if (reflectivity_.rows() != rows() || reflectivity_.cols() != cols()) {
    throw std::invalid_argument("reflectivity grid does not match the depth grid");
  }
}

void BathymetryParams::validate() const {
  if (!(cell_size > 0.0) || !(width > cell_size) || !(length > cell_size)) {
    throw std::invalid_argument("bathymetry extent and cell size must be positive");
  }
  if (noise_amplitude < 0.0 || !(noise_wavelength > 0.0) || texture_amplitude < 0.0 ||
      !(texture_wavelength > 0.0)) {
    throw std::invalid_argument("bathymetry noise parameters out of range");
  }
  if (num_marks < 0 || num_patches < 0) {
    throw std::invalid_argument("bathymetry feature counts must be >= 0");
  }
  if (mark_depth_min > mark_depth_max || mark_width_min > mark_width_max ||
      !(mark_width_min > 0.0) || patch_radius_min > patch_radius_max ||
      !(patch_radius_min > 0.0)) {
    throw std::invalid_argument("bathymetry feature ranges are invalid");
  }
  if (reflectivity_mean < 0.0 || reflectivity_mean > 1.0) {
    throw std::invalid_argument("bathymetry.reflectivity_mean must be in [0, 1]");
  }
}

namespace {

// Value noise on a square lattice with smoothstep interpolation, in [-1, 1].
class ValueNoise {
 public:
  ValueNoise(std::mt19937_64& rng, double x0, double y0, double width, double length,
             double spacing)
      : x0_(x0), y0_(y0), spacing_(spacing),
        lattice_(static_cast<int>(std::ceil(length / spacing)) + 2,
                 static_cast<int>(std::ceil(width / spacing)) + 2) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : lattice_.data()) v = u(rng);
  }

  [[nodiscard]] double operator()(double x, double y) const {
    const Cell k = locate(x, y, x0_, y0_, spacing_, lattice_.rows(), lattice_.cols());
    const double sx = k.fx * k.fx * (3.0 - 2.0 * k.fx);
    const double sy = k.fy * k.fy * (3.0 - 2.0 * k.fy);
    const double a = lattice_(k.r, k.c) + (lattice_(k.r, k.c + 1) - lattice_(k.r, k.c)) * sx;
    const double b =
        lattice_(k.r + 1, k.c) + (lattice_(k.r + 1, k.c + 1) - lattice_(k.r + 1, k.c)) * sx;
    return a + (b - a) * sy;
  }

 private:
  double x0_;
  double y0_;
  double spacing_;
  Grid<double> lattice_;
};

void carve_mark(Heightmap& map, const TrawlMark& m) {
  const Vec2 dir(std::cos(m.angle), std::sin(m.angle));
  const Vec2 normal(-dir.y(), dir.x());
  const double half = 0.5 * m.width;
  for (int r = 0; r < map.rows(); ++r) {
    const double y = map.y0() + r * map.cell_size();
    for (int c = 0; c < map.cols(); ++c) {
      const double x = map.x0() + c * map.cell_size();
      const double d = std::abs((Vec2(x, y) - m.point).dot(normal));
      if (d < half) {
        map.set_depth(r, c, map.depth()(r, c) +
                                m.depth * 0.5 * (1.0 + std::cos(std::numbers::pi * d / half)));
      }
    }
  }
}

}  // namespace

Heightmap generate_bathymetry(std::uint64_t seed, const BathymetryParams& p) {
  p.validate();
  const int ncols = static_cast<int>(std::floor(p.width / p.cell_size)) + 1;
  const int nrows = static_cast<int>(std::floor(p.length / p.cell_size)) + 1;
  Heightmap map(p.x0, p.y0, p.cell_size, nrows, ncols, p.base_depth,
                static_cast<float>(p.reflectivity_mean));
  std::mt19937_64 rng(seed);
  const ValueNoise relief(rng, p.x0, p.y0, p.width, p.length, p.noise_wavelength);
  const ValueNoise relief_fine(rng, p.x0, p.y0, p.width, p.length, 0.5 * p.noise_wavelength);
  const ValueNoise texture(rng, p.x0, p.y0, p.width, p.length, p.texture_wavelength);

  auto& refl = map.reflectivity();
  for (int r = 0; r < nrows; ++r) {
    const double y = p.y0 + r * p.cell_size;
    for (int c = 0; c < ncols; ++c) {
      const double x = p.x0 + c * p.cell_size;
      double z = p.base_depth + p.slope_x * (x - p.x0) + p.slope_y * (y - p.y0);
      if (p.noise_amplitude > 0.0) {
        z += p.noise_amplitude * (relief(x, y) + 0.5 * relief_fine(x, y)) / 1.5;
      }
      map.set_depth(r, c, z);
      if (p.texture_amplitude > 0.0) {
        refl(r, c) = static_cast<float>(p.reflectivity_mean + p.texture_amplitude * texture(x, y));
      }
    }
  }

  std::uniform_real_distribution<double> ux(p.x0, p.x0 + p.width);
  std::uniform_real_distribution<double> uy(p.y0, p.y0 + p.length);
  std::uniform_real_distribution<double> uangle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> udepth(p.mark_depth_min, p.mark_depth_max);
  std::uniform_real_distribution<double> uwidth(p.mark_width_min, p.mark_width_max);
  std::vector<TrawlMark> marks;
  marks.reserve(static_cast<std::size_t>(p.num_marks) + p.marks.size());
  for (int k = 0; k < p.num_marks; ++k) {
    TrawlMark m;
    m.point = Vec2(ux(rng), uy(rng));
    m.angle = uangle(rng);
    m.depth = udepth(rng);
    m.width = uwidth(rng);
    marks.push_back(m);
  }
  marks.insert(marks.end(), p.marks.begin(), p.marks.end());
  for (const TrawlMark& m : marks) carve_mark(map, m);

  std::uniform_real_distribution<double> uradius(p.patch_radius_min, p.patch_radius_max);
  std::bernoulli_distribution bright(0.5);
  for (int k = 0; k < p.num_patches; ++k) {
    const double cx = ux(rng);
    const double cy = uy(rng);
    const double radius = uradius(rng);
    const double amp = (bright(rng) ? 1.0 : -1.0) * p.patch_contrast;
    const int c0 = std::max(0, static_cast<int>(std::floor((cx - radius - p.x0) / p.cell_size)));
    const int c1 = std::min(ncols - 1, static_cast<int>(std::ceil((cx + radius - p.x0) / p.cell_size)));
    const int r0 = std::max(0, static_cast<int>(std::floor((cy - radius - p.y0) / p.cell_size)));
    const int r1 = std::min(nrows - 1, static_cast<int>(std::ceil((cy + radius - p.y0) / p.cell_size)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double dx = p.x0 + c * p.cell_size - cx;
        const double dy = p.y0 + r * p.cell_size - cy;
        const double q = (dx * dx + dy * dy) / (radius * radius);
        if (q < 1.0) refl(r, c) += static_cast<float>(amp * (1.0 - q) * (1.0 - q));
      }
    }
  }
  for (float& v : refl.data()) v = std::clamp(v, 0.0F, 1.0F);
  return map;
}

std::optional<Vec3> raycast(const Vec3& origin, const Vec3& direction, const Heightmap& map) {
  const double n = direction.norm();
  if (!(n > 0.0)) return std::nullopt;
  const Vec3 d = direction / n;
  if (!map.contains(origin.x(), origin.y())) return std::nullopt;
  // Positive when the ray point is below the surface.
  auto below = [&](double t, bool* inside) {
    const Vec3 p = origin + t * d;
    *inside = map.contains(p.x(), p.y());
    if (!*inside) return 0.0;
    return p.z() - map.depth_and_gradient(p.x(), p.y(), nullptr);
  };
  const double zmin = map.depth_lower_bound();
  double t = 0.0;
  if (origin.z() < zmin) {
    if (d.z() <= 0.0) return std::nullopt;
    t = (zmin - origin.z()) / d.z();
  }
  bool inside = true;
  if (below(t, &inside) >= 0.0) return inside ? std::optional<Vec3>(origin + t * d) : std::nullopt;
  if (!inside) return std::nullopt;
  const double step = 0.25 * map.cell_size();
  const double zmax = map.depth_upper_bound();
  while (true) {
    const double next = t + step;
    const double f = below(next, &inside);
    if (!inside) return std::nullopt;
    if (f >= 0.0) {
      double lo = t;
      double hi = next;
      while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        bool in_mid = true;
        if (below(mid, &in_mid) >= 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return origin + hi * d;
    }
    t = next;
    if (d.z() <= 0.0 && origin.z() + t * d.z() < zmin) return std::nullopt;
    if (origin.z() + t * d.z() > zmax + 1.0) return std::nullopt;
  }
}

void SurveyPlan::validate() const {
  if (num_lines <= 0) throw std::invalid_argument("survey.num_lines must be > 0");
  if (!(line_length > 0.0) || !(line_spacing > 0.0) || !(speed > 0.0) ||
      !(ping_rate > 0.0) || !(altitude > 0.0)) {
    throw std::invalid_argument("survey parameters must be > 0");
  }
  if (depth_smoothing < 0.0) throw std::invalid_argument("survey.depth_smoothing must be >= 0");
}

Survey plan_survey(const Heightmap& map, const SurveyPlan& plan, const SonarConfig& sonar) {
  plan.validate();
  sonar.validate();
  const double ds = plan.ping_spacing();
  std::vector<Vec2> xy;
  std::vector<double> yaw;
  Survey survey;
  const double radius = 0.5 * plan.line_spacing;
  for (int k = 0; k < plan.num_lines; ++k) {
    const bool north = k % 2 == 0;
    const double x = plan.start.x() + k * plan.line_spacing;
    const int n = static_cast<int>(std::floor(plan.line_length / ds + 1e-9)) + 1;
    SurveyLine line;
    line.line = k;
    line.heading_north = north;
    line.first_ping = static_cast<std::int64_t>(xy.size());
    for (int i = 0; i < n; ++i) {
      const double s = i * ds;
      xy.emplace_back(x, north ? plan.start.y() + s : plan.start.y() + plan.line_length - s);
      yaw.push_back(north ? 0.5 * std::numbers::pi : -0.5 * std::numbers::pi);
    }
    line.last_ping = static_cast<std::int64_t>(xy.size()) - 1;
    survey.lines.push_back(line);
    if (k + 1 == plan.num_lines) break;
    const int m = static_cast<int>(std::lround(std::numbers::pi * radius / ds));
    const Vec2 center(x + radius, north ? plan.start.y() + plan.line_length : plan.start.y());
    for (int i = 1; i < m; ++i) {
      const double f = static_cast<double>(i) / m;
      // North end turns clockwise over the top, south end counter-clockwise.
      const double a = north ? std::numbers::pi * (1.0 - f) : std::numbers::pi * (1.0 + f);
      xy.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
      yaw.push_back(north ? std::atan2(-std::cos(a), std::sin(a))
                          : std::atan2(std::cos(a), -std::sin(a)));
    }
  }

  const std::size_t count = xy.size();
  std::vector<double> floor_depth(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto z = map.depth_at(xy[i].x(), xy[i].y());
    if (!z) throw std::invalid_argument("survey trajectory leaves the heightmap");
    floor_depth[i] = *z;
  }
  const int half = static_cast<int>(std::lround(0.5 * plan.depth_smoothing / ds));
  survey.truth.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
    const std::size_t hi = std::min(count - 1, i + half);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += floor_depth[j];
    const double z = sum / static_cast<double>(hi - lo + 1) - plan.altitude;
    survey.truth.push_back(Pose::rot_z(yaw[i], Vec3(xy[i].x(), xy[i].y(), z)));
  }

  const double reach = sonar.max_range;
  for (const SurveyLine& line : survey.lines) {
    for (std::int64_t i = line.first_ping; i <= line.last_ping; ++i) {
      const Pose sensor = survey.truth[static_cast<std::size_t>(i)] * sonar.sensor_offset;
      const Vec3 side = side_direction(sensor, Side::kStarboard);
      const Vec3 a = sensor.position() + reach * side;
      const Vec3 b = sensor.position() - reach * side;
      if (!map.contains(a.x(), a.y()) || !map.contains(b.x(), b.y())) {
        throw std::invalid_argument("survey swath of line " + std::to_string(line.line) +
                                    " leaves the heightmap");
      }
    }
  }

  survey.pings.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    Ping& p = survey.pings[i];
    p.ping_id = static_cast<std::int64_t>(i);
    p.time = static_cast<double>(i) / plan.ping_rate;
    p.dr_pose = survey.truth[i];
    const Pose sensor = survey.truth[i] * sonar.sensor_offset;
    const auto hit = raycast(sensor.position(), Vec3::UnitZ(), map);
    if (!hit) throw std::invalid_argument("no seafloor below ping " + std::to_string(i));
    p.altitude = hit->z() - sensor.position().z();
  }
  return survey;
}

void simulate_ping(const Heightmap& map, const Pose& sensor, const SonarConfig& sonar,
                   const SimulationConfig& sim, std::uint64_t seed, Ping& ping) {
  const int bins = sonar.bins_per_side;
  const double bin = sonar.bin_size();
  const Vec3 p = sensor.position();
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> speckle(sim.speckle_looks, 1.0 / sim.speckle_looks);
  for (Side side : {Side::kPort, Side::kStarboard}) {
    const Vec3 dir = side_direction(sensor, side);
    std::vector<double> sum(static_cast<std::size_t>(bins), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(bins), 0);
    double min_tan = std::numeric_limits<double>::infinity();
    for (double g = 0.5 * sim.ground_step; g < sonar.max_range; g += sim.ground_step) {
      const double x = p.x() + g * dir.x();
      const double y = p.y() + g * dir.y();
      if (!map.contains(x, y)) break;
      Vec2 grad;
      const double z = map.depth_and_gradient(x, y, &grad);
      const double h = z - p.z();
      if (h <= 0.0) {
        min_tan = std::min(min_tan, h / g);
        continue;
      }
      const double s = std::hypot(g, h);
      if (s >= sonar.max_range) break;
      const auto b = static_cast<std::size_t>(s / bin);
      const double tan_dep = h / g;
      const bool visible = tan_dep <= min_tan;
      min_tan = std::min(min_tan, tan_dep);
      double value = 0.0;
      if (visible) {
        const Vec3 n_up = Vec3(grad.x(), grad.y(), -1.0).normalized();
        const Vec3 to_sensor = Vec3(-g * dir.x(), -g * dir.y(), -h) / s;
        const double c = std::max(0.0, n_up.dot(to_sensor));
        value = sim.intensity_gain * map.reflectivity_at(x, y) * c * c;
      }
      sum[b] += value;
      ++cnt[b];
    }
    std::vector<float>& out = side == Side::kStarboard ? ping.starboard : ping.port;
    out.assign(static_cast<std::size_t>(bins), 0.0F);
    int prev = -1;
    for (int b = 0; b < bins; ++b) {
      if (cnt[static_cast<std::size_t>(b)] == 0) continue;
      const double v = sum[static_cast<std::size_t>(b)] / cnt[static_cast<std::size_t>(b)];
      out[static_cast<std::size_t>(b)] = static_cast<float>(v);
      // Fill bins skipped between two sampled bins.
      if (prev >= 0 && b - prev > 1) {
        const double v0 = out[static_cast<std::size_t>(prev)];
        for (int k = prev + 1; k < b; ++k) {
          const double f = static_cast<double>(k - prev) / (b - prev);
          out[static_cast<std::size_t>(k)] = static_cast<float>(v0 + (v - v0) * f);
        }
      }
      prev = b;
    }
    if (sim.speckle) {
      for (float& v : out) v = static_cast<float>(v * speckle(rng));
    }
  }
}

Survey simulate_survey(const Heightmap& map, const SurveyPlan& plan, const SonarConfig& sonar,
                       const SimulationConfig& sim, std::uint64_t seed, int threads) {
  if (!(sim.ground_step > 0.0) || !(sim.speckle_looks > 0.0) || !(sim.intensity_gain > 0.0)) {
    throw std::invalid_argument("simulation parameters must be > 0");
  }
  Survey survey = plan_survey(map, plan, sonar);
  parallel_for(survey.pings.size(), threads, [&](std::size_t i) {
    const Pose sensor = survey.truth[i] * sonar.sensor_offset;
    simulate_ping(map, sensor, sonar, sim, derive_seed(seed, i), survey.pings[i]);
  });
  return survey;
}

void DriftModel::validate() const {
  if (heading_bias < 0.0 || heading_random_walk < 0.0 || velocity_scale < 0.0 ||
      velocity_random_walk < 0.0 || position_noise < 0.0) {
    throw std::invalid_argument("drift standard deviations must be >= 0");
  }
}

bool DriftModel::zero() const {
  return heading_bias == 0.0 && heading_random_walk == 0.0 && velocity_scale == 0.0 &&
         velocity_random_walk == 0.0 && position_noise == 0.0;
}

double path_length(std::span<const Pose> trajectory) {
  double d = 0.0;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    d += (trajectory[i].position() - trajectory[i - 1].position()).head<2>().norm();
  }
  return d;
}

std::vector<Pose> inject_drift(std::span<const Pose> truth, const DriftModel& model, double dt,
                               DriftReport* report) {
  model.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("inject_drift: dt must be > 0");
  std::vector<Pose> dr(truth.begin(), truth.end());
  if (!model.zero() && truth.size() > 1) {
    std::mt19937_64 rng(model.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution positive(0.5);
    const double heading_bias = (positive(rng) ? 1.0 : -1.0) * model.heading_bias;
    const double scale = (positive(rng) ? 1.0 : -1.0) * model.velocity_scale;
    const double sqrt_dt = std::sqrt(dt);
    double heading_error = 0.0;
    Vec2 velocity_bias = Vec2::Zero();  // body frame (forward, left)
    Vec3 pos = truth[0].position();
    for (std::size_t k = 1; k < truth.size(); ++k) {
      const double yaw_true = truth[k - 1].yaw();
      const Vec2 delta = (truth[k].position() - truth[k - 1].position()).head<2>();
      const Eigen::Rotation2Dd to_body(-yaw_true);
      const Vec2 body = (1.0 + scale) * (to_body * delta) + velocity_bias * dt;
      const Eigen::Rotation2Dd to_world(yaw_true + heading_error);
      const Vec2 step = to_world * body;
      pos.head<2>() += step;
      if (model.position_noise > 0.0) {
        pos.x() += model.position_noise * normal(rng);
        pos.y() += model.position_noise * normal(rng);
      }
      heading_error += heading_bias * dt + model.heading_random_walk * sqrt_dt * normal(rng);
      velocity_bias.x() += model.velocity_random_walk * sqrt_dt * normal(rng);
      velocity_bias.y() += model.velocity_random_walk * sqrt_dt * normal(rng);
      pos.z() = truth[k].position().z();
      const Quat q = Quat(Eigen::AngleAxisd(heading_error, Vec3::UnitZ())) *
                     truth[k].orientation();
      dr[k] = Pose(q, pos);
    }
  }
  if (report != nullptr) {
    report->distance = path_length(truth);
    report->final_error =
        truth.empty() ? 0.0 : (dr.back().position() - truth.back().position()).head<2>().norm();
  }
  return dr;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
  };
  return splitmix(seed ^ splitmix(stream));
}

}  // namespace sss
