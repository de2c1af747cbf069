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

#include "sss/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace sss {

namespace {

using Target = std::variant<double*, float*, int*, bool*, std::uint64_t*, SolveMode*>;

struct Binding {
  std::string section;
  std::string key;
  Target target;
};

std::vector<Binding> bindings(PipelineConfig& c) {
  return {
      {"pipeline", "seed", &c.seed},
      {"pipeline", "threads", &c.threads},
      {"pipeline", "node_stride", &c.node_stride},
      {"pipeline", "min_overlap_area", &c.min_overlap_area},
      {"pipeline", "zero_drift", &c.zero_drift},
      {"pipeline", "mode", &c.mode},
      {"pipeline", "baseline_threshold", &c.baseline_threshold},

      {"sonar", "max_range", &c.sonar.max_range},
      {"sonar", "bins_per_side", &c.sonar.bins_per_side},
      {"sonar", "beam_width", &c.sonar.beam_width},
      {"sonar", "range_std", &c.sonar.range_std},
      {"sonar", "ping_rate", &c.sonar.ping_rate},
      {"sonar", "canonical_resolution", &c.sonar.canonical_resolution},
      {"sonar", "offset_x", &c.offset[0]},
      {"sonar", "offset_y", &c.offset[1]},
      {"sonar", "offset_z", &c.offset[2]},
      {"sonar", "offset_roll", &c.offset[3]},
      {"sonar", "offset_pitch", &c.offset[4]},
      {"sonar", "offset_yaw", &c.offset[5]},

      {"association", "cell_size", &c.association.cell_size},
      {"association", "max_per_cell", &c.association.max_per_cell},
      {"association", "corner_threshold", &c.association.corner_threshold},
      {"association", "radius", &c.association.radius},
      {"association", "ransac_row_tolerance", &c.association.ransac_row_tolerance},
      {"association", "ransac_iterations", &c.association.ransac_iterations},
      {"association", "rng_seed", &c.association.rng_seed},
      {"association", "blur_sigma", &c.association.blur_sigma},
      {"association", "max_invalid_fraction", &c.association.max_invalid_fraction},

      {"estimation", "use_depth_prior", &c.estimation.use_depth_prior},
      {"estimation", "depth_prior_scale", &c.estimation.depth_prior_scale},
      {"estimation", "min_depth_std", &c.estimation.min_depth_std},
      {"estimation", "max_iterations", &c.estimation.max_iterations},
      {"estimation", "relative_cost_tolerance", &c.estimation.relative_cost_tolerance},
      {"estimation", "gradient_tolerance", &c.estimation.gradient_tolerance},
      {"estimation", "initial_lambda", &c.estimation.initial_lambda},
      {"estimation", "outlier_sigma", &c.estimation.outlier_sigma},
      {"estimation", "odometry_scale", &c.estimation.odometry_scale},

      {"odometry", "rotation_variance_per_meter", &c.odometry.rotation_variance_per_meter},
      {"odometry", "translation_variance_per_meter",
       &c.odometry.translation_variance_per_meter},
      {"odometry", "attitude_variance_per_meter", &c.odometry.attitude_variance_per_meter},
      {"odometry", "depth_variance_per_meter", &c.odometry.depth_variance_per_meter},
      {"odometry", "min_distance", &c.odometry.min_distance},

      {"graph", "max_iterations", &c.graph.max_iterations},
      {"graph", "relative_cost_tolerance", &c.graph.relative_cost_tolerance},
      {"graph", "gradient_tolerance", &c.graph.gradient_tolerance},
      {"graph", "initial_lambda", &c.graph.initial_lambda},
      {"graph", "robust_loop_closures", &c.graph.robust_loop_closures},
      {"graph", "huber_threshold", &c.graph.huber_threshold},
      {"graph", "lc_covariance_scale", &c.graph.lc_covariance_scale},
      {"graph", "incremental_horizon", &c.graph.incremental_horizon},
      {"graph", "full_every", &c.graph.full_every},

      {"drift", "heading_bias", &c.drift.heading_bias},
      {"drift", "heading_random_walk", &c.drift.heading_random_walk},
      {"drift", "velocity_scale", &c.drift.velocity_scale},
      {"drift", "velocity_random_walk", &c.drift.velocity_random_walk},
      {"drift", "position_noise", &c.drift.position_noise},

      {"survey", "num_lines", &c.survey.num_lines},
      {"survey", "line_length", &c.survey.line_length},
      {"survey", "line_spacing", &c.survey.line_spacing},
      {"survey", "speed", &c.survey.speed},
      {"survey", "altitude", &c.survey.altitude},
      {"survey", "start_x", &c.survey.start.x()},
      {"survey", "start_y", &c.survey.start.y()},
      {"survey", "depth_smoothing", &c.survey.depth_smoothing},

      {"bathymetry", "x0", &c.bathymetry.x0},
      {"bathymetry", "y0", &c.bathymetry.y0},
      {"bathymetry", "width", &c.bathymetry.width},
      {"bathymetry", "length", &c.bathymetry.length},
      {"bathymetry", "cell_size", &c.bathymetry.cell_size},
      {"bathymetry", "base_depth", &c.bathymetry.base_depth},
      {"bathymetry", "slope_x", &c.bathymetry.slope_x},
      {"bathymetry", "slope_y", &c.bathymetry.slope_y},
      {"bathymetry", "noise_amplitude", &c.bathymetry.noise_amplitude},
      {"bathymetry", "noise_wavelength", &c.bathymetry.noise_wavelength},
      {"bathymetry", "num_marks", &c.bathymetry.num_marks},
      {"bathymetry", "mark_depth_min", &c.bathymetry.mark_depth_min},
      {"bathymetry", "mark_depth_max", &c.bathymetry.mark_depth_max},
      {"bathymetry", "mark_width_min", &c.bathymetry.mark_width_min},
      {"bathymetry", "mark_width_max", &c.bathymetry.mark_width_max},
      {"bathymetry", "reflectivity_mean", &c.bathymetry.reflectivity_mean},
      {"bathymetry", "texture_amplitude", &c.bathymetry.texture_amplitude},
      {"bathymetry", "texture_wavelength", &c.bathymetry.texture_wavelength},
      {"bathymetry", "num_patches", &c.bathymetry.num_patches},
      {"bathymetry", "patch_radius_min", &c.bathymetry.patch_radius_min},
      {"bathymetry", "patch_radius_max", &c.bathymetry.patch_radius_max},
      {"bathymetry", "patch_contrast", &c.bathymetry.patch_contrast},

      {"simulation", "ground_step", &c.simulation.ground_step},
      {"simulation", "speckle", &c.simulation.speckle},
      {"simulation", "speckle_looks", &c.simulation.speckle_looks},
      {"simulation", "intensity_gain", &c.simulation.intensity_gain},
  };
}

template <typename T>
T parse_number(std::string_view s, const std::string& key) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("config key " + key + ": cannot parse '" + std::string(s) + "'");
  }
  return v;
}

void assign(const Target& target, const std::string& value, const std::string& key) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") {
            *p = true;
          } else if (value == "false" || value == "0") {
            *p = false;
          } else {
            throw std::invalid_argument("config key " + key + ": expected true/false");
          }
        } else if constexpr (std::is_same_v<T, SolveMode>) {
          if (value == "batch") {
            *p = SolveMode::kBatch;
          } else if (value == "incremental") {
            *p = SolveMode::kIncremental;
          } else {
            throw std::invalid_argument("config key " + key + ": expected batch|incremental");
          }
        } else {
          *p = parse_number<T>(value, key);
        }
      },
      target);
}

std::string format(const Target& target) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, SolveMode>) {
          return *p == SolveMode::kBatch ? "batch" : "incremental";
        } else {
          std::array<char, 64> buf{};
          const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *p);
          return std::string(buf.data(), res.ptr);
        }
      },
      target);
}

std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_of("#;");
    if (pos != std::string::npos) line.erase(pos);
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

void PipelineConfig::finalize() {
  constexpr double kDeg = std::numbers::pi / 180.0;
  sonar.sensor_offset = Pose::from_rpy(Vec3(offset[0], offset[1], offset[2]),
                                       offset[3] * kDeg, offset[4] * kDeg, offset[5] * kDeg);
  survey.ping_rate = sonar.ping_rate;
  sonar.validate();
  association.validate();
  estimation.validate();
  odometry.validate();
  graph.validate();
  drift.validate();
  survey.validate();
  bathymetry.validate();
  if (threads < 1) throw std::invalid_argument("pipeline.threads must be >= 1");
  if (node_stride < 1) throw std::invalid_argument("pipeline.node_stride must be >= 1");
  if (!(min_overlap_area >= 0.0)) {
    throw std::invalid_argument("pipeline.min_overlap_area must be >= 0");
  }
  if (!(baseline_threshold > 0.0)) {
    throw std::invalid_argument("pipeline.baseline_threshold must be > 0");
  }
  if (!(simulation.ground_step > 0.0) || !(simulation.speckle_looks > 0.0) ||
      !(simulation.intensity_gain > 0.0)) {
    throw std::invalid_argument("simulation parameters must be > 0");
  }
}

PipelineConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(strip_comments(text));
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.message() + " at line " +
                                std::to_string(e.line()));
  }
  PipelineConfig cfg;
  const auto table = bindings(cfg);
  for (const auto& [section, keys] : tree) {
    if (keys.empty()) {
      throw std::invalid_argument("config: key '" + section + "' outside a section");
    }
    for (const auto& [key, node] : keys) {
      const std::string full = section + "." + key;
      auto it = std::find_if(table.begin(), table.end(), [&](const Binding& b) {
        return b.section == section && b.key == key;
      });
      if (it == table.end()) throw std::invalid_argument("config: unknown key " + full);
      assign(it->target, node.get_value<std::string>(), full);
    }
  }
  cfg.finalize();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  std::ostringstream out;
  std::string section;
  for (const Binding& b : bindings(copy)) {
    if (b.section != section) {
      if (!section.empty()) out << '\n';
      section = b.section;
      out << '[' << section << "]\n";
    }
    out << b.key << " = " << format(b.target) << '\n';
  }
  return out.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[v & 0xFU];
    v >>= 4U;
  }
  return s;
}

}  // namespace sss
