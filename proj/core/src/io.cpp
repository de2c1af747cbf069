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

#include "sss/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

namespace sss::io {

using nlohmann::json;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                  : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse(std::string_view s, const fs::path& path, std::size_t line) {
  s = trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(path, line, "cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

/// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!trim(line).empty()) out.emplace_back(n, line);
  }
  return out;
}

json pose_json(const Pose& p) {
  const Quat& q = p.orientation();
  const Vec3& t = p.position();
  return json::array({t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()});
}

Pose pose_from(const json& j) {
  if (!j.is_array() || j.size() != 7) throw std::runtime_error("pose must have 7 numbers");
  const Quat q(j[3].get<double>(), j[4].get<double>(), j[5].get<double>(), j[6].get<double>());
  return {q.normalized(), Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>())};
}

std::string pose_numbers(const Pose& p) {
  const Quat& q = p.orientation();
  const Vec3& t = p.position();
  std::string s;
  for (double v : {t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()}) {
    if (!s.empty()) s += ',';
    s += format_double(v);
  }
  return s;
}

void append_floats(std::string& out, std::span<const float> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_float(values[i]);
  }
  out += ']';
}

// Twist order is (rotation, translation); g2o uses (translation, rotation).
Mat6 swap_blocks(const Mat6& m) {
  Mat6 out;
  out.topLeftCorner<3, 3>() = m.bottomRightCorner<3, 3>();
  out.topRightCorner<3, 3>() = m.bottomLeftCorner<3, 3>();
  out.bottomLeftCorner<3, 3>() = m.topRightCorner<3, 3>();
  out.bottomRightCorner<3, 3>() = m.topLeftCorner<3, 3>();
  return out;
}

void write_grid_header(std::string& out, const Heightmap& map) {
  out += "ncols " + std::to_string(map.cols()) + "\n";
  out += "nrows " + std::to_string(map.rows()) + "\n";
  out += "x0 " + format_double(map.x0()) + "\n";
  out += "y0 " + format_double(map.y0()) + "\n";
  out += "cellsize " + format_double(map.cell_size()) + "\n";
}

struct GridFile {
  int ncols = 0;
  int nrows = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double cell = 0.0;
  std::vector<double> values;
};

GridFile read_grid(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 5) fail(path, lines.empty() ? 0 : lines.back().first, "truncated header");
  GridFile g;
  const std::array<std::string_view, 5> keys{"ncols", "nrows", "x0", "y0", "cellsize"};
  for (std::size_t k = 0; k < keys.size(); ++k) {
    std::istringstream ss(lines[k].second);
    std::string key;
    std::string value;
    ss >> key >> value;
    if (key != keys[k]) fail(path, lines[k].first, "expected '" + std::string(keys[k]) + "'");
    switch (k) {
      case 0: g.ncols = parse<int>(value, path, lines[k].first); break;
      case 1: g.nrows = parse<int>(value, path, lines[k].first); break;
      case 2: g.x0 = parse<double>(value, path, lines[k].first); break;
      case 3: g.y0 = parse<double>(value, path, lines[k].first); break;
      default: g.cell = parse<double>(value, path, lines[k].first); break;
    }
  }
  if (g.ncols < 2 || g.nrows < 2) fail(path, lines[1].first, "grid must be at least 2x2");
  if (lines.size() != 5 + static_cast<std::size_t>(g.nrows)) {
    fail(path, lines.back().first, "expected " + std::to_string(g.nrows) + " grid rows");
  }
  g.values.reserve(static_cast<std::size_t>(g.ncols) * static_cast<std::size_t>(g.nrows));
  for (std::size_t r = 5; r < lines.size(); ++r) {
    std::string_view rest = trim(lines[r].second);
    int count = 0;
    while (!rest.empty()) {
      const std::size_t sp = rest.find(' ');
      g.values.push_back(parse<double>(rest.substr(0, sp), path, lines[r].first));
      ++count;
      rest = sp == std::string_view::npos ? std::string_view{} : trim(rest.substr(sp + 1));
    }
    if (count != g.ncols) fail(path, lines[r].first, "expected " + std::to_string(g.ncols) + " values");
  }
  return g;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

std::string format_float(float v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("error writing " + path.string());
}

void write_pings_jsonl(const fs::path& path, std::span<const Ping> pings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::string line;
  for (const Ping& p : pings) {
    line.clear();
    line += "{\"ping_id\":" + std::to_string(p.ping_id);
    line += ",\"t\":" + format_double(p.time);
    line += ",\"pose\":[" + pose_numbers(p.dr_pose) + "]";
    line += ",\"altitude\":" + format_double(p.altitude);
    line += ",\"port\":";
    append_floats(line, p.port);
    line += ",\"stbd\":";
    append_floats(line, p.starboard);
    line += "}\n";
    out << line;
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

std::vector<Ping> read_pings_jsonl(const fs::path& path) {
  std::vector<Ping> pings;
  for (const auto& [n, text] : read_lines(path)) {
    try {
      const json j = json::parse(text);
      Ping p;
      p.ping_id = j.at("ping_id").get<std::int64_t>();
      p.time = j.at("t").get<double>();
      p.dr_pose = pose_from(j.at("pose"));
      p.altitude = j.at("altitude").get<double>();
      p.port = j.at("port").get<std::vector<float>>();
      p.starboard = j.at("stbd").get<std::vector<float>>();
      pings.push_back(std::move(p));
    } catch (const json::exception& e) {
      fail(path, n, e.what());
    } catch (const std::runtime_error& e) {
      fail(path, n, e.what());
    }
  }
  return pings;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "ping_id,t,x,y,z,roll,pitch,yaw\n";
  for (const Trajectory::Entry& e : trajectory.entries()) {
    const Vec3& t = e.pose.position();
    const Vec3 rpy = e.pose.rpy() * kDeg;
    out += std::to_string(e.ping_id) + "," + format_double(e.time);
    for (double v : {t.x(), t.y(), t.z(), rpy.x(), rpy.y(), rpy.z()}) {
      out += "," + format_double(v);
    }
    out += "\n";
  }
  return out;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& trajectory) {
  write_text(path, trajectory_csv(trajectory));
}

Trajectory read_trajectory_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || trim(lines[0].second) != "ping_id,t,x,y,z,roll,pitch,yaw") {
    fail(path, 1, "unexpected trajectory header");
  }
  Trajectory traj;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [n, text] = lines[i];
    const auto f = split(text, ',');
    if (f.size() != 8) fail(path, n, "expected 8 fields");
    std::array<double, 6> v{};
    for (std::size_t k = 0; k < 6; ++k) v[k] = parse<double>(f[k + 2], path, n);
    try {
      traj.push_back(parse<std::int64_t>(f[0], path, n), parse<double>(f[1], path, n),
                     Pose::from_rpy(Vec3(v[0], v[1], v[2]), v[3] / kDeg, v[4] / kDeg,
                                    v[5] / kDeg));
    } catch (const std::invalid_argument& e) {
      fail(path, n, e.what());
    }
  }
  return traj;
}

void write_heightmap(const fs::path& depth_path, const fs::path& reflectivity_path,
                     const Heightmap& map) {
  std::string depth;
  std::string refl;
  write_grid_header(depth, map);
  write_grid_header(refl, map);
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      if (c > 0) {
        depth += ' ';
        refl += ' ';
      }
      depth += format_double(map.depth()(r, c));
      refl += format_float(map.reflectivity()(r, c));
    }
    depth += '\n';
    refl += '\n';
  }
  write_text(depth_path, depth);
  write_text(reflectivity_path, refl);
}

Heightmap read_heightmap(const fs::path& depth_path, const fs::path& reflectivity_path) {
  const GridFile d = read_grid(depth_path);
  const GridFile f = read_grid(reflectivity_path);
  if (d.ncols != f.ncols || d.nrows != f.nrows || d.x0 != f.x0 || d.y0 != f.y0 ||
      d.cell != f.cell) {
    throw std::runtime_error(reflectivity_path.string() +
                             ": header differs from " + depth_path.string());
  }
  Heightmap map(d.x0, d.y0, d.cell, d.nrows, d.ncols, d.values.front());
  for (int r = 0; r < d.nrows; ++r) {
    for (int c = 0; c < d.ncols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(d.ncols) +
                            static_cast<std::size_t>(c);
      map.set_depth(r, c, d.values[i]);
      map.reflectivity()(r, c) = static_cast<float>(f.values[i]);
    }
  }
  map.validate();
  return map;
}

void write_lines_csv(const fs::path& path, std::span<const SurveyLine> lines) {
  std::string out = "line,first_ping,last_ping,heading_north\n";
  for (const SurveyLine& l : lines) {
    out += std::to_string(l.line) + "," + std::to_string(l.first_ping) + "," +
           std::to_string(l.last_ping) + "," + (l.heading_north ? "1" : "0") + "\n";
  }
  write_text(path, out);
}

std::vector<SurveyLine> read_lines_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || trim(lines[0].second) != "line,first_ping,last_ping,heading_north") {
    fail(path, 1, "unexpected lines header");
  }
  std::vector<SurveyLine> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [n, text] = lines[i];
    const auto f = split(text, ',');
    if (f.size() != 4) fail(path, n, "expected 4 fields");
    SurveyLine l;
    l.line = parse<int>(f[0], path, n);
    l.first_ping = parse<std::int64_t>(f[1], path, n);
    l.last_ping = parse<std::int64_t>(f[2], path, n);
    l.heading_north = parse<int>(f[3], path, n) != 0;
    if (l.last_ping < l.first_ping) fail(path, n, "last_ping < first_ping");
    out.push_back(l);
  }
  return out;
}

std::string correspondences_csv(std::span<const Correspondence> corrs) {
  std::string out = "src_image,src_row,src_col,tgt_image,tgt_row,tgt_col,desc_dist,inlier\n";
  for (const Correspondence& c : corrs) {
    out += std::to_string(c.source.image_id) + "," + std::to_string(c.source.row) + "," +
           std::to_string(c.source.col) + "," + std::to_string(c.target.image_id) + "," +
           std::to_string(c.target.row) + "," + std::to_string(c.target.col) + ",";
    if (!std::isnan(c.descriptor_distance)) out += format_double(c.descriptor_distance);
    out += c.inlier ? ",1\n" : ",0\n";
  }
  return out;
}

void write_correspondences_csv(const fs::path& path, std::span<const Correspondence> corrs) {
  write_text(path, correspondences_csv(corrs));
}

std::vector<Correspondence> read_correspondences_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) fail(path, 1, "empty file");
  const auto header = split(trim(lines[0].second), ',');
  if (header.size() < 6 || header[0] != "src_image" || header[5] != "tgt_col") {
    fail(path, lines[0].first, "unexpected correspondence header");
  }
  std::vector<Correspondence> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [n, text] = lines[i];
    const auto f = split(trim(text), ',');
    if (f.size() < 6 || f.size() > 8) fail(path, n, "expected 6 to 8 fields");
    Correspondence c;
    c.source.image_id = parse<int>(f[0], path, n);
    c.source.row = parse<int>(f[1], path, n);
    c.source.col = parse<int>(f[2], path, n);
    c.target.image_id = parse<int>(f[3], path, n);
    c.target.row = parse<int>(f[4], path, n);
    c.target.col = parse<int>(f[5], path, n);
    c.descriptor_distance = std::numeric_limits<double>::quiet_NaN();
    if (f.size() > 6 && !trim(f[6]).empty()) c.descriptor_distance = parse<double>(f[6], path, n);
    c.inlier = f.size() < 8 || trim(f[7]).empty() || parse<int>(f[7], path, n) != 0;
    out.push_back(std::move(c));
  }
  return out;
}

std::string constraints_csv(std::span<const LoopClosureConstraint> constraints) {
  std::string out = "ping_i,ping_j,tx,ty,tz,rx,ry,rz,cost,converged\n";
  for (const LoopClosureConstraint& c : constraints) {
    const Vec3& t = c.relative.position();
    const Vec3 r = so3_log(c.relative.orientation());
    out += std::to_string(c.ping_i) + "," + std::to_string(c.ping_j);
    for (double v : {t.x(), t.y(), t.z(), r.x(), r.y(), r.z(), c.final_cost}) {
      out += "," + format_double(v);
    }
    out += c.converged ? ",1\n" : ",0\n";
  }
  return out;
}

std::string constraints_json(std::span<const LoopClosureConstraint> constraints) {
  json arr = json::array();
  for (const LoopClosureConstraint& c : constraints) {
    json cov = json::array();
    for (int r = 0; r < 6; ++r) {
      for (int k = 0; k < 6; ++k) cov.push_back(c.covariance(r, k));
    }
    arr.push_back({{"ping_i", c.ping_i},
                   {"ping_j", c.ping_j},
                   {"relative", pose_json(c.relative)},
                   {"covariance", cov},
                   {"converged", c.converged},
                   {"outlier", c.outlier},
                   {"initial_cost", c.initial_cost},
                   {"final_cost", c.final_cost},
                   {"iterations", c.iterations},
                   {"max_normalized_residual", c.max_normalized_residual},
                   {"landmark",
                    {{"position", {c.landmark.position.x(), c.landmark.position.y(),
                                   c.landmark.position.z()}},
                     {"prior_mean", c.landmark.prior_mean},
                     {"prior_std", c.landmark.prior_std}}}});
  }
  json doc = {{"covariance_order", "rx,ry,rz,tx,ty,tz"}, {"constraints", arr}};
  return doc.dump(1) + "\n";
}

void write_constraints(const fs::path& csv_path, const fs::path& json_path,
                       std::span<const LoopClosureConstraint> constraints) {
  write_text(csv_path, constraints_csv(constraints));
  write_text(json_path, constraints_json(constraints));
}

std::vector<LoopClosureConstraint> read_constraints(const fs::path& csv_path,
                                                    const fs::path& json_path) {
  const auto lines = read_lines(csv_path);
  const json doc = json::parse(read_text(json_path));
  const json& arr = doc.at("constraints");
  if (lines.empty() || arr.size() + 1 != lines.size()) {
    throw std::runtime_error(json_path.string() + ": constraint count differs from " +
                             csv_path.string());
  }
  std::vector<LoopClosureConstraint> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& j = arr[i];
    LoopClosureConstraint c;
    c.ping_i = j.at("ping_i").get<std::int64_t>();
    c.ping_j = j.at("ping_j").get<std::int64_t>();
    const auto f = split(trim(lines[i + 1].second), ',');
    if (f.size() != 10 || parse<std::int64_t>(f[0], csv_path, lines[i + 1].first) != c.ping_i ||
        parse<std::int64_t>(f[1], csv_path, lines[i + 1].first) != c.ping_j) {
      fail(csv_path, lines[i + 1].first, "row does not match the sidecar");
    }
    c.relative = pose_from(j.at("relative"));
    const json& cov = j.at("covariance");
    if (cov.size() != 36) throw std::runtime_error(json_path.string() + ": covariance needs 36 values");
    for (int r = 0; r < 6; ++r) {
      for (int k = 0; k < 6; ++k) c.covariance(r, k) = cov[static_cast<std::size_t>(6 * r + k)].get<double>();
    }
    c.converged = j.at("converged").get<bool>();
    c.outlier = j.at("outlier").get<bool>();
    c.initial_cost = j.at("initial_cost").get<double>();
    c.final_cost = j.at("final_cost").get<double>();
    c.iterations = j.at("iterations").get<int>();
    c.max_normalized_residual = j.at("max_normalized_residual").get<double>();
    const json& lm = j.at("landmark");
    const json& p = lm.at("position");
    c.landmark.position = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    c.landmark.prior_mean = lm.at("prior_mean").get<double>();
    c.landmark.prior_std = lm.at("prior_std").get<double>();
    out.push_back(c);
  }
  return out;
}

std::string g2o_text(const PoseGraph& graph) {
  std::string out;
  for (const PoseNode& n : graph.nodes()) {
    const Vec3& t = n.estimate.position();
    const Quat& q = n.estimate.orientation();
    out += "VERTEX_SE3:QUAT " + std::to_string(n.id);
    for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) out += " " + format_double(v);
    out += "\n";
  }
  for (const PoseNode& n : graph.nodes()) {
    if (n.fixed) out += "FIX " + std::to_string(n.id) + "\n";
  }
  for (const Factor& f : graph.factors()) {
    if (f.kind == FactorKind::kPrior) continue;
    const Vec3& t = f.measured.position();
    const Quat& q = f.measured.orientation();
    out += "EDGE_SE3:QUAT " + std::to_string(f.from) + " " + std::to_string(f.to);
    for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) out += " " + format_double(v);
    const Mat6 info = swap_blocks(f.covariance.inverse());
    for (int r = 0; r < 6; ++r) {
      for (int k = r; k < 6; ++k) out += " " + format_double(info(r, k));
    }
    out += "\n";
  }
  return out;
}

void write_g2o(const fs::path& path, const PoseGraph& graph) { write_text(path, g2o_text(graph)); }

PoseGraph read_g2o(const fs::path& path) {
  struct Vertex {
    std::int64_t id;
    Pose pose;
  };
  struct Edge {
    std::size_t line;
    std::int64_t from;
    std::int64_t to;
    Pose measured;
    Mat6 covariance;
  };
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<std::int64_t> fixed;
  for (const auto& [n, text] : read_lines(path)) {
    std::istringstream ss(text);
    std::string tag;
    ss >> tag;
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    auto num = [&](std::size_t k) { return parse<double>(tok.at(k), path, n); };
    auto pose_at = [&](std::size_t k) {
      const Quat q(num(k + 6), num(k + 3), num(k + 4), num(k + 5));
      return Pose(q.normalized(), Vec3(num(k), num(k + 1), num(k + 2)));
    };
    if (tag == "VERTEX_SE3:QUAT" || tag == "VERTEX_SE3") {
      if (tok.size() != 8) fail(path, n, "VERTEX_SE3 needs id and 7 numbers");
      vertices.push_back({parse<std::int64_t>(tok[0], path, n), pose_at(1)});
    } else if (tag == "EDGE_SE3:QUAT" || tag == "EDGE_SE3") {
      if (tok.size() != 30) fail(path, n, "EDGE_SE3 needs 2 ids, 7 pose and 21 information values");
      Mat6 info;
      std::size_t k = 9;
      for (int r = 0; r < 6; ++r) {
        for (int c = r; c < 6; ++c) {
          info(r, c) = num(k++);
          info(c, r) = info(r, c);
        }
      }
      const Eigen::LLT<Mat6> llt(info);
      if (llt.info() != Eigen::Success) fail(path, n, "information matrix is not positive definite");
      edges.push_back({n, parse<std::int64_t>(tok[0], path, n), parse<std::int64_t>(tok[1], path, n),
                       pose_at(2), swap_blocks(info.inverse())});
    } else if (tag == "FIX") {
      if (tok.size() != 1) fail(path, n, "FIX needs one id");
      fixed.push_back(parse<std::int64_t>(tok[0], path, n));
    } else {
      fail(path, n, "unknown record '" + tag + "'");
    }
  }
  if (vertices.empty()) throw std::runtime_error(path.string() + ": no vertices");
  if (fixed.size() > 1) throw std::runtime_error(path.string() + ": more than one FIX");
  const std::int64_t anchor = fixed.empty() ? vertices.front().id : fixed.front();

  PoseGraph graph;
  std::unordered_map<std::int64_t, std::size_t> order;
  for (const Vertex& v : vertices) {
    order.emplace(v.id, order.size());
    graph.add_node(v.id, v.pose, v.id == anchor);
  }
  for (const Edge& e : edges) {
    const auto a = order.find(e.from);
    const auto b = order.find(e.to);
    if (a == order.end() || b == order.end()) fail(path, e.line, "edge references an unknown vertex");
    Factor f;
    f.kind = b->second == a->second + 1 ? FactorKind::kOdometry : FactorKind::kLoopClosure;
    f.from = e.from;
    f.to = e.to;
    f.measured = e.measured;
    f.covariance = e.covariance;
    graph.add_factor(f);
  }
  return graph;
}

void write_pgm16(const fs::path& path, const SonarImage& image) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (float v : image.pixels.data()) {
    if (!is_valid_pixel(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool any = lo <= hi;
  const double span = any && hi > lo ? static_cast<double>(hi - lo) : 1.0;
  std::string out = "P5\n" + std::to_string(image.num_cols()) + " " +
                    std::to_string(image.num_rows()) + "\n65535\n";
  out.reserve(out.size() + 2 * image.pixels.data().size());
  for (float v : image.pixels.data()) {
    unsigned value = 0;
    if (is_valid_pixel(v)) {
      value = 1U + static_cast<unsigned>(std::lround((v - lo) / span * 65534.0));
    }
    out += static_cast<char>((value >> 8U) & 0xFFU);
    out += static_cast<char>(value & 0xFFU);
  }
  write_text(path, out);

  json meta = {{"image_id", image.image_id},
               {"line", image.line},
               {"side", side_name(image.side)},
               {"rows", image.num_rows()},
               {"cols", image.num_cols()},
               {"canonical", image.canonical},
               {"column_resolution", image.column_resolution},
               {"first_ping", image.rows.empty() ? 0 : image.rows.front().ping_id},
               {"last_ping", image.rows.empty() ? 0 : image.rows.back().ping_id},
               {"intensity_min", any ? lo : 0.0F},
               {"intensity_max", any ? hi : 0.0F},
               {"invalid_value", 0}};
  fs::path sidecar = path;
  sidecar.replace_extension(".json");
  write_text(sidecar, meta.dump(1) + "\n");
}

}  // namespace sss::io
