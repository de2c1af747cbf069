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

#include "sss/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "sss/io.hpp"
#include "sss/parallel.hpp"

namespace sss {

using nlohmann::json;

namespace {

constexpr std::uint64_t kBathymetryStream = 0;
constexpr std::uint64_t kSurveyStream = 1;
constexpr std::uint64_t kDriftStream = 2;

class Stopwatch {
 public:
  [[nodiscard]] double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::unordered_map<std::int64_t, std::size_t> index_pings(std::span<const Ping> pings) {
  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < pings.size(); ++i) {
    if (i > 0 && pings[i].ping_id <= pings[i - 1].ping_id) {
      throw std::invalid_argument("pings must be ordered by strictly increasing id");
    }
    index.emplace(pings[i].ping_id, i);
  }
  return index;
}

bool inside_polygon(const Vec2& p, std::span<const Vec2> ring) {
  bool in = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      in = !in;
    }
  }
  return in;
}

/// Per-ping graph with optional node subsampling. Pings that are not nodes
/// follow the preceding node through the dead-reckoning offset.
class GraphBuilder {
 public:
  GraphBuilder(std::span<const Ping> pings, const PipelineConfig& cfg)
      : pings_(pings), cfg_(cfg), dr_(dead_reckoning(pings)), is_node_(pings.size(), 0),
        node_before_(pings.size(), 0) {
    const auto stride = static_cast<std::size_t>(cfg.node_stride);
    for (std::size_t k = 0; k < pings.size(); ++k) {
      if (k % stride == 0 || k + 1 == pings.size()) is_node_[k] = 1;
      node_before_[k] = is_node_[k] ? k : node_before_[k - 1];
    }
    index_ = index_pings(pings);
  }

  [[nodiscard]] const Trajectory& dead_reckoning_poses() const { return dr_; }
  [[nodiscard]] PoseGraph& graph() { return graph_; }
  [[nodiscard]] const PoseGraph& graph() const { return graph_; }

  std::size_t index_of(std::int64_t ping) const {
    const auto it = index_.find(ping);
    if (it == index_.end()) throw std::out_of_range("unknown ping " + std::to_string(ping));
    return it->second;
  }

  /// Adds nodes and odometry factors for every ping up to index `last`.
  void add_upto(std::size_t last) {
    for (; next_ <= last && next_ < pings_.size(); ++next_) {
      if (!is_node_[next_]) continue;
      const std::int64_t id = pings_[next_].ping_id;
      const Pose& dr = dr_[next_].pose;
      if (!have_node_) {
        graph_.add_node(id, dr, true);
        have_node_ = true;
      } else {
        const std::int64_t prev = pings_[last_node_].ping_id;
        const Pose odo = relative(dr_[last_node_].pose, dr);
        graph_.add_node(id, graph_.node(prev).estimate * odo);
        Factor f;
        f.kind = FactorKind::kOdometry;
        f.from = prev;
        f.to = id;
        f.measured = odo;
        f.covariance = cfg_.odometry.covariance(odo.position().norm());
        graph_.add_factor(f);
      }
      last_node_ = next_;
    }
  }

  /// Loop closure re-expressed between the nodes at or before its pings.
  /// Returns the new factor index, or nothing if both pings share a node or
  /// the constraint is unusable.
  std::optional<std::size_t> add_loop_closure(const LoopClosureConstraint& c) {
    if (!c.usable()) return std::nullopt;
    const std::size_t i = index_of(c.ping_i);
    const std::size_t j = index_of(c.ping_j);
    const std::size_t a = node_before_[i];
    const std::size_t b = node_before_[j];
    if (a == b) return std::nullopt;
    LoopClosureConstraint n = c;
    n.ping_i = pings_[a].ping_id;
    n.ping_j = pings_[b].ping_id;
    if (a != i || b != j) {
      const Pose off_i = relative(dr_[a].pose, dr_[i].pose);
      const Pose off_j = relative(dr_[b].pose, dr_[j].pose);
      n.relative = off_i * c.relative * off_j.inverse();
      const Mat6 ad = adjoint(off_j);
      n.covariance = ad * c.covariance * ad.transpose();
      n.covariance = 0.5 * (n.covariance + n.covariance.transpose()).eval();
    }
    return graph_.add_loop_closure(n, cfg_.graph.lc_covariance_scale);
  }

  /// Current estimate of every ping.
  [[nodiscard]] Trajectory estimates() const {
    Trajectory out;
    std::size_t anchor = 0;
    bool have = false;
    for (std::size_t k = 0; k < pings_.size(); ++k) {
      if (is_node_[k] && graph_.has_node(pings_[k].ping_id)) {
        anchor = k;
        have = true;
      }
      Pose p = dr_[k].pose;
      if (have) {
        p = graph_.node(pings_[anchor].ping_id).estimate *
            relative(dr_[anchor].pose, dr_[k].pose);
      }
      out.push_back(pings_[k].ping_id, pings_[k].time, p);
    }
    return out;
  }

 private:
  std::span<const Ping> pings_;
  const PipelineConfig& cfg_;
  Trajectory dr_;
  std::vector<char> is_node_;
  std::vector<std::size_t> node_before_;
  std::unordered_map<std::int64_t, std::size_t> index_;
  PoseGraph graph_;
  std::size_t next_ = 0;
  std::size_t last_node_ = 0;
  bool have_node_ = false;
};

std::vector<LoopClosureConstraint> estimate_all(std::span<const SonarImage> images,
                                                std::span<const Correspondence> corrs,
                                                const Trajectory& dr, const PipelineConfig& cfg) {
  std::vector<LoopClosureConstraint> out(corrs.size());
  parallel_for(corrs.size(), cfg.threads, [&](std::size_t k) {
    const Correspondence& c = corrs[k];
    out[k] = estimate_constraint(find_image(images, c.source.image_id),
                                 find_image(images, c.target.image_id), c, dr, cfg);
  });
  return out;
}

std::vector<Correspondence> inliers_of(std::span<const Correspondence> corrs) {
  std::vector<Correspondence> out;
  for (const Correspondence& c : corrs) {
    if (c.inlier) out.push_back(c);
  }
  return out;
}

json consistency_json(const ConsistencyReport& r) {
  json pairs = json::array();
  for (const PairMetric& m : r.pairs) {
    pairs.push_back({{"source_image", m.source_image},
                     {"target_image", m.target_image},
                     {"count", m.count},
                     {"mean", m.mean}});
  }
  return {{"overall", r.overall}, {"count", r.count}, {"skipped", r.skipped}, {"pairs", pairs}};
}

json depth_json(const DepthErrorStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}, {"skipped", s.skipped}};
}

}  // namespace

Dataset simulate_dataset(const PipelineConfig& cfg) {
  Dataset data;
  data.map = generate_bathymetry(derive_seed(cfg.seed, kBathymetryStream), cfg.bathymetry);
  Survey survey = simulate_survey(data.map, cfg.survey, cfg.sonar, cfg.simulation,
                                  derive_seed(cfg.seed, kSurveyStream), cfg.threads);
  DriftModel drift = cfg.drift;
  drift.seed = derive_seed(cfg.seed, kDriftStream);
  if (cfg.zero_drift) drift = DriftModel{0.0, 0.0, 0.0, 0.0, 0.0, drift.seed};
  const std::vector<Pose> dr =
      inject_drift(survey.truth, drift, 1.0 / cfg.survey.ping_rate, &data.drift);
  for (std::size_t i = 0; i < survey.pings.size(); ++i) {
    survey.pings[i].dr_pose = dr[i];
    data.truth.push_back(survey.pings[i].ping_id, survey.pings[i].time, survey.truth[i]);
  }
  data.pings = std::move(survey.pings);
  data.lines = std::move(survey.lines);
  return data;
}

void write_dataset(const fs::path& dir, const Dataset& data, const PipelineConfig& cfg) {
  fs::create_directories(dir);
  io::write_heightmap(dir / "heightmap.asc", dir / "reflectivity.asc", data.map);
  io::write_trajectory_csv(dir / "truth.csv", data.truth);
  io::write_trajectory_csv(dir / "dead_reckoning.csv", dead_reckoning(data.pings));
  io::write_pings_jsonl(dir / "pings.jsonl", data.pings);
  io::write_lines_csv(dir / "lines.csv", data.lines);
  io::write_correspondences_csv(dir / "annotations.csv", annotate_truth(data, cfg));
  json manifest = json::parse(manifest_json(cfg, "simulate"));
  manifest["drift"] = {{"distance", data.drift.distance},
                       {"final_error", data.drift.final_error},
                       {"percent", data.drift.percent()}};
  manifest["pings"] = data.pings.size();
  io::write_text(dir / "manifest.json", manifest.dump(1) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  Dataset data;
  data.map = io::read_heightmap(dir / "heightmap.asc", dir / "reflectivity.asc");
  data.pings = io::read_pings_jsonl(dir / "pings.jsonl");
  data.truth = io::read_trajectory_csv(dir / "truth.csv");
  data.lines = io::read_lines_csv(dir / "lines.csv");
  if (data.truth.size() != data.pings.size()) {
    throw std::runtime_error(dir.string() + ": truth and pings have different lengths");
  }
  std::vector<Pose> truth;
  std::vector<Pose> dr;
  for (std::size_t i = 0; i < data.pings.size(); ++i) {
    truth.push_back(data.truth[i].pose);
    dr.push_back(data.pings[i].dr_pose);
  }
  data.drift.distance = path_length(truth);
  if (!dr.empty()) {
    data.drift.final_error = (dr.back().position() - truth.back().position()).head<2>().norm();
  }
  return data;
}

Trajectory dead_reckoning(std::span<const Ping> pings) {
  Trajectory t;
  for (const Ping& p : pings) t.push_back(p.ping_id, p.time, p.dr_pose);
  return t;
}

int image_id_of(int line, Side side) { return 2 * line + (side == Side::kStarboard ? 1 : 0); }

std::vector<SonarImage> build_images(std::span<const Ping> pings,
                                     std::span<const SurveyLine> lines,
                                     const PipelineConfig& cfg) {
  const auto index = index_pings(pings);
  std::vector<SonarImage> images(2 * lines.size());
  parallel_for(images.size(), cfg.threads, [&](std::size_t k) {
    const SurveyLine& line = lines[k / 2];
    const Side side = k % 2 == 0 ? Side::kPort : Side::kStarboard;
    const auto first = index.find(line.first_ping);
    const auto last = index.find(line.last_ping);
    if (first == index.end() || last == index.end() || last->second < first->second) {
      throw std::invalid_argument("survey line " + std::to_string(line.line) +
                                  " references unknown pings");
    }
    const auto slice = pings.subspan(first->second, last->second - first->second + 1);
    for (const Ping& p : slice) p.validate(cfg.sonar.bins_per_side);
    const SonarImage raw =
        build_waterfall(slice, side, image_id_of(line.line, side), line.line, cfg.sonar);
    images[k] = georeference(canonicalize(raw, cfg.sonar));
  });
  std::sort(images.begin(), images.end(),
            [](const SonarImage& a, const SonarImage& b) { return a.image_id < b.image_id; });
  return images;
}

SonarImage georeference_with(const SonarImage& image, const Trajectory& poses) {
  SonarImage out = image;
  std::vector<Pose> row_poses;
  row_poses.reserve(out.rows.size());
  for (ImageRow& r : out.rows) {
    r.pose = poses.at(r.ping_id);
    row_poses.push_back(r.pose);
  }
  return georeference(out, row_poses);
}

bool anti_parallel(const SonarImage& a, const SonarImage& b) {
  auto heading = [](const SonarImage& im) -> Vec2 {
    if (im.rows.size() < 2) throw std::invalid_argument("image needs at least 2 rows");
    return (im.rows.back().pose.position() - im.rows.front().pose.position()).head<2>();
  };
  return heading(a).dot(heading(b)) < 0.0;
}

PairAssociation associate(const SonarImage& source, const SonarImage& target,
                          std::span<const Keypoint> source_features,
                          std::span<const Keypoint> target_features,
                          const AssociationConfig& cfg) {
  if (source.side != target.side) {
    throw std::invalid_argument("associate: images must be from the same side");
  }
  auto refresh = [](const SonarImage& im, std::span<const Keypoint> kps) {
    std::vector<Keypoint> out(kps.begin(), kps.end());
    for (Keypoint& k : out) k.geo = im.georef(k.row, k.col);
    return out;
  };
  const auto src = refresh(source, source_features);
  const auto tgt = refresh(target, target_features);
  PairAssociation pa;
  pa.source_image = source.image_id;
  pa.target_image = target.image_id;
  const auto cands = match_near_neighbor(src, tgt, cfg.radius);
  if (cands.empty()) return pa;
  const RowModel model{anti_parallel(source, target), target.num_rows()};
  pa.candidates = sliding_compatibility_ransac(cands, cfg, model).candidates;
  return pa;
}

LoopClosureConstraint estimate_constraint(const SonarImage& source, const SonarImage& target,
                                          const Correspondence& corr, const Trajectory& dr,
                                          const PipelineConfig& cfg) {
  const PingObservation obs_i = observe(source, corr.source);
  const PingObservation obs_j = observe(target, corr.target);
  const Pose odometry = relative(dr.at(obs_i.ping_id), dr.at(obs_j.ping_id));
  const Mat6 cov = cfg.odometry.covariance(dr.travelled(obs_i.ping_id, obs_j.ping_id));
  return estimate_relative_pose(obs_i, obs_j, odometry, cov, cfg.sonar, cfg.estimation);
}

RunResult run_pipeline(std::span<const Ping> pings, std::span<const SurveyLine> lines,
                       const PipelineConfig& cfg) {
  if (pings.empty()) throw std::invalid_argument("run: no pings");
  RunResult res;
  Stopwatch watch;
  GraphBuilder builder(pings, cfg);
  res.dead_reckoning = builder.dead_reckoning_poses();

  res.images = build_images(pings, lines, cfg);
  res.timings.push_back({"canonicalize", watch.lap()});

  const std::size_t n_images = res.images.size();
  std::vector<std::vector<Keypoint>> native(n_images);
  std::vector<std::vector<Keypoint>> turned(n_images);
  parallel_for(2 * n_images, cfg.threads, [&](std::size_t k) {
    const std::size_t i = k / 2;
    if (k % 2 == 0) {
      native[i] = extract_features(res.images[i], cfg.association, false);
    } else {
      turned[i] = extract_features(res.images[i], cfg.association, true);
    }
  });
  for (std::size_t i = 0; i < n_images; ++i) {
    res.log.push_back("image " + std::to_string(res.images[i].image_id) + ": " +
                      std::to_string(res.images[i].num_rows()) + " rows, " +
                      std::to_string(native[i].size()) + " features");
  }
  res.timings.push_back({"features", watch.lap()});

  IncrementalSolver solver(cfg.graph);
  const bool incremental = cfg.mode == SolveMode::kIncremental;
  Trajectory current = res.dead_reckoning;
  std::vector<std::size_t> processed;
  double t_assoc = 0.0;
  double t_estimate = 0.0;
  double t_graph = 0.0;

  for (const SurveyLine& line : lines) {
    builder.add_upto(builder.index_of(line.last_ping));
    current = builder.estimates();
    for (const Side side : {Side::kPort, Side::kStarboard}) {
      const auto it = std::find_if(res.images.begin(), res.images.end(), [&](const SonarImage& im) {
        return im.image_id == image_id_of(line.line, side);
      });
      const auto cur = static_cast<std::size_t>(it - res.images.begin());
      res.images[cur] = georeference_with(res.images[cur], current);

      std::vector<Correspondence> inliers;
      for (std::size_t p : processed) {
        if (res.images[p].side != side || res.images[p].line == line.line) continue;
        res.images[p] = georeference_with(res.images[p], current);
        const OverlapReport ov =
            overlap_check(res.images[p], res.images[cur], cfg.min_overlap_area);
        if (!ov.overlaps) continue;
        const bool anti = anti_parallel(res.images[p], res.images[cur]);
        PairAssociation pa = associate(res.images[p], res.images[cur], native[p],
                                       anti ? turned[cur] : native[cur], cfg.association);
        std::size_t n_in = 0;
        for (Correspondence& c : pa.candidates) {
          if (c.inlier) {
            inliers.push_back(c);
            ++n_in;
          }
          res.correspondences.push_back(std::move(c));
        }
        res.log.push_back("pair " + std::to_string(res.images[p].image_id) + " -> " +
                          std::to_string(res.images[cur].image_id) + ": overlap " +
                          io::format_double(std::round(ov.area)) + " m^2, " +
                          std::to_string(pa.candidates.size()) + " candidates, " +
                          std::to_string(n_in) + " inliers" + (anti ? " (anti-parallel)" : ""));
      }
      t_assoc += watch.lap();

      std::vector<LoopClosureConstraint> cons =
          estimate_all(res.images, inliers, res.dead_reckoning, cfg);
      t_estimate += watch.lap();

      std::vector<std::size_t> new_factors;
      for (LoopClosureConstraint& c : cons) {
        if (auto f = builder.add_loop_closure(c)) new_factors.push_back(*f);
        res.constraints.push_back(std::move(c));
      }
      res.loop_closures += new_factors.size();
      if (incremental && !new_factors.empty()) {
        const GraphSolution s = solver.update(builder.graph(), new_factors);
        res.log.push_back("image " + std::to_string(res.images[cur].image_id) + ": " +
                          std::to_string(new_factors.size()) + " loop closures, cost " +
                          io::format_double(s.initial_cost) + " -> " +
                          io::format_double(s.final_cost));
        current = builder.estimates();
      }
      t_graph += watch.lap();
      processed.push_back(cur);
    }
  }
  builder.add_upto(pings.size() - 1);
  res.timings.push_back({"association", t_assoc});
  res.timings.push_back({"estimation", t_estimate});

  if (res.loop_closures == 0) {
    res.log.push_back("warning: no loop closures; output equals dead reckoning");
  }
  res.solution = incremental ? solver.finish(builder.graph()) : builder.graph().optimize(cfg.graph);
  res.log.push_back("final solve: cost " + io::format_double(res.solution.initial_cost) + " -> " +
                    io::format_double(res.solution.final_cost) + " in " +
                    std::to_string(res.solution.iterations) + " iterations" +
                    (res.solution.converged ? "" : " (not converged)"));
  res.optimized = builder.estimates();
  for (SonarImage& im : res.images) im = georeference_with(im, res.optimized);
  res.graph = std::move(builder.graph());
  t_graph += watch.lap();
  res.timings.push_back({"graph", t_graph});
  return res;
}

Trajectory solve_with_constraints(std::span<const Ping> pings,
                                  std::span<const LoopClosureConstraint> constraints,
                                  const PipelineConfig& cfg, std::size_t* used) {
  GraphBuilder builder(pings, cfg);
  builder.add_upto(pings.size() - 1);
  std::size_t n = 0;
  for (const LoopClosureConstraint& c : constraints) {
    if (builder.add_loop_closure(c)) ++n;
  }
  if (used != nullptr) *used = n;
  if (n > 0) (void)builder.graph().optimize(cfg.graph);
  return builder.estimates();
}

void write_results(const fs::path& dir, const RunResult& result, const PipelineConfig& cfg) {
  fs::create_directories(dir / "images");
  io::write_correspondences_csv(dir / "correspondences.csv", result.correspondences);
  io::write_constraints(dir / "constraints.csv", dir / "constraints.json", result.constraints);
  io::write_g2o(dir / "graph.g2o", result.graph);
  io::write_trajectory_csv(dir / "trajectory.csv", result.optimized);
  for (const SonarImage& im : result.images) {
    io::write_pgm16(dir / "images" / ("image_" + std::to_string(im.image_id) + ".pgm"), im);
  }
  std::string log;
  for (const std::string& line : result.log) log += line + "\n";
  for (const StageTiming& t : result.timings) {
    log += "timing " + t.stage + " " + io::format_double(t.seconds) + " s\n";
  }
  io::write_text(dir / "run.log", log);
  json manifest = json::parse(manifest_json(cfg, "run"));
  manifest["loop_closures"] = result.loop_closures;
  manifest["correspondences"] = result.correspondences.size();
  io::write_text(dir / "manifest.json", manifest.dump(1) + "\n");
}

std::vector<Correspondence> annotate_truth(const Dataset& data, const PipelineConfig& cfg) {
  std::vector<SonarImage> images = build_images(data.pings, data.lines, cfg);
  for (SonarImage& im : images) im = georeference_with(im, data.truth);
  std::vector<std::vector<Keypoint>> features(images.size());
  parallel_for(images.size(), cfg.threads, [&](std::size_t i) {
    features[i] = detect_corners_grid(images[i], cfg.association);
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::vector<Vec2>> rings;
  for (std::size_t a = 0; a < images.size(); ++a) {
    for (std::size_t b = a + 1; b < images.size(); ++b) {
      if (images[a].side != images[b].side || images[a].line == images[b].line) continue;
      OverlapReport ov = overlap_check(images[a], images[b], cfg.min_overlap_area);
      if (!ov.overlaps || ov.polygon.size() < 3) continue;
      pairs.emplace_back(a, b);
      rings.push_back(std::move(ov.polygon));
    }
  }
  std::vector<std::vector<Correspondence>> found(pairs.size());
  parallel_for(pairs.size(), cfg.threads, [&](std::size_t k) {
    const SonarImage& src = images[pairs[k].first];
    const SonarImage& tgt = images[pairs[k].second];
    for (const Keypoint& kp : features[pairs[k].first]) {
      if (!inside_polygon(kp.geo.head<2>(), rings[k])) continue;
      const auto lm = project_pixel(src, kp.row, kp.col, data.truth.at(src.rows[kp.row].ping_id),
                                    data.map);
      if (!lm) continue;
      const auto hit =
          baseline_correspondence(*lm, tgt, data.truth, data.map, cfg.baseline_threshold);
      if (!hit) continue;
      Correspondence c;
      c.source = kp;
      c.target = *hit;
      c.descriptor_distance = std::numeric_limits<double>::quiet_NaN();
      c.inlier = true;
      found[k].push_back(std::move(c));
    }
  });
  std::vector<Correspondence> out;
  for (auto& f : found) {
    for (auto& c : f) out.push_back(std::move(c));
  }
  return out;
}

MetricReport evaluate(const Dataset& data, std::span<const Correspondence> correspondences,
                      const Trajectory& optimized, const PipelineConfig& cfg,
                      std::span<const Correspondence> annotations) {
  MetricReport rep;
  rep.drift_percent = data.drift.percent();
  rep.pings = data.pings.size();
  rep.candidates = correspondences.size();
  const std::vector<Correspondence> detected = inliers_of(correspondences);
  rep.inliers = detected.size();
  rep.annotated = annotations.size();

  const Trajectory dr = dead_reckoning(data.pings);
  const std::vector<SonarImage> images = build_images(data.pings, data.lines, cfg);

  // Loop closures the run would have accepted, re-estimated on dead-reckoning
  // geo-references with and without the landmark depth prior.
  PipelineConfig no_prior = cfg;
  no_prior.estimation.use_depth_prior = false;
  PipelineConfig with_prior = cfg;
  with_prior.estimation.use_depth_prior = true;
  const auto cons_prior = estimate_all(images, detected, dr, with_prior);
  const auto cons_free = estimate_all(images, detected, dr, no_prior);
  std::vector<LandmarkEstimate> lm_prior;
  std::vector<LandmarkEstimate> lm_free;
  for (std::size_t k = 0; k < detected.size(); ++k) {
    if (cons_prior[k].usable()) ++rep.loop_closures;
    if (cons_prior[k].converged && cons_free[k].converged) {
      lm_prior.push_back(cons_prior[k].landmark);
      lm_free.push_back(cons_free[k].landmark);
    }
  }
  rep.depth_with_prior = landmark_depth_error(lm_prior, data.map);
  rep.depth_without_prior = landmark_depth_error(lm_free, data.map);

  auto metrics = [&](const std::string& name, const Trajectory& poses) {
    TrajectoryMetrics m;
    m.name = name;
    m.ate = ate(poses, data.truth);
    m.detected = landmark_consistency(detected, images, poses, data.map);
    if (!annotations.empty()) {
      m.annotated = landmark_consistency(annotations, images, poses, data.map);
    }
    return m;
  };
  rep.trajectories.push_back(metrics("dead_reckoning", dr));
  rep.trajectories.push_back(metrics("slam", optimized));
  if (!annotations.empty()) {
    const auto ann = estimate_all(images, annotations, dr, with_prior);
    rep.trajectories.push_back(
        metrics("slam_annotated", solve_with_constraints(data.pings, ann, cfg)));
  }
  const auto base = baselines(detected, images, data.truth, data.map, cfg.baseline_threshold);
  rep.epe = epe(detected, base);
  return rep;
}

std::string report_json(const MetricReport& report) {
  json trajectories = json::object();
  for (const TrajectoryMetrics& m : report.trajectories) {
    json t = {{"ate", m.ate}, {"consistency_detected", consistency_json(m.detected)}};
    if (report.annotated > 0) t["consistency_annotated"] = consistency_json(m.annotated);
    trajectories[m.name] = t;
  }
  json epe_pairs = json::array();
  for (const PairMetric& m : report.epe.pairs) {
    epe_pairs.push_back({{"source_image", m.source_image},
                         {"target_image", m.target_image},
                         {"count", m.count},
                         {"u", m.mean_u},
                         {"v", m.mean_v}});
  }
  json doc = {{"drift_percent", report.drift_percent},
              {"pings", report.pings},
              {"candidates", report.candidates},
              {"inliers", report.inliers},
              {"loop_closures", report.loop_closures},
              {"annotated", report.annotated},
              {"trajectories", trajectories},
              {"epe",
               {{"u", report.epe.mean_u},
                {"v", report.epe.mean_v},
                {"count", report.epe.count},
                {"missing", report.epe.missing},
                {"pairs", epe_pairs}}},
              {"depth_error",
               {{"with_prior", depth_json(report.depth_with_prior)},
                {"without_prior", depth_json(report.depth_without_prior)}}}};
  return doc.dump(1) + "\n";
}

std::string report_summary_csv(const MetricReport& report) {
  using io::format_double;
  std::string out = "metric,value\n";
  auto row = [&](const std::string& k, const std::string& v) { out += k + "," + v + "\n"; };
  row("drift_percent", format_double(report.drift_percent));
  row("pings", std::to_string(report.pings));
  row("candidates", std::to_string(report.candidates));
  row("inliers", std::to_string(report.inliers));
  row("loop_closures", std::to_string(report.loop_closures));
  row("annotated", std::to_string(report.annotated));
  for (const TrajectoryMetrics& m : report.trajectories) {
    row("ate_" + m.name, format_double(m.ate));
    row("consistency_detected_" + m.name, format_double(m.detected.overall));
    if (report.annotated > 0) {
      row("consistency_annotated_" + m.name, format_double(m.annotated.overall));
    }
  }
  row("epe_u", format_double(report.epe.mean_u));
  row("epe_v", format_double(report.epe.mean_v));
  row("depth_error_with_prior_mean", format_double(report.depth_with_prior.mean));
  row("depth_error_with_prior_std", format_double(report.depth_with_prior.std));
  row("depth_error_without_prior_mean", format_double(report.depth_without_prior.mean));
  row("depth_error_without_prior_std", format_double(report.depth_without_prior.std));
  return out;
}

std::string report_consistency_csv(const MetricReport& report) {
  using io::format_double;
  std::string out = "set,source_image,target_image,count";
  for (const TrajectoryMetrics& m : report.trajectories) out += "," + m.name;
  out += "\n";
  auto emit = [&](const std::string& set, auto member) {
    if (report.trajectories.empty()) return;
    const ConsistencyReport& first = report.trajectories.front().*member;
    for (std::size_t p = 0; p < first.pairs.size(); ++p) {
      out += set + "," + std::to_string(first.pairs[p].source_image) + "," +
             std::to_string(first.pairs[p].target_image) + "," +
             std::to_string(first.pairs[p].count);
      for (const TrajectoryMetrics& m : report.trajectories) {
        const ConsistencyReport& r = m.*member;
        // Ray misses can differ per trajectory; match pairs by id.
        const auto it = std::find_if(r.pairs.begin(), r.pairs.end(), [&](const PairMetric& x) {
          return x.source_image == first.pairs[p].source_image &&
                 x.target_image == first.pairs[p].target_image;
        });
        out += "," + (it == r.pairs.end() ? std::string() : format_double(it->mean));
      }
      out += "\n";
    }
    out += set + ",all,all," + std::to_string(first.count);
    for (const TrajectoryMetrics& m : report.trajectories) {
      out += "," + format_double((m.*member).overall);
    }
    out += "\n";
  };
  emit("detected", &TrajectoryMetrics::detected);
  if (report.annotated > 0) emit("annotated", &TrajectoryMetrics::annotated);
  return out;
}

std::string report_epe_csv(const MetricReport& report) {
  using io::format_double;
  std::string out = "source_image,target_image,count,u,v\n";
  for (const PairMetric& m : report.epe.pairs) {
    out += std::to_string(m.source_image) + "," + std::to_string(m.target_image) + "," +
           std::to_string(m.count) + "," + format_double(m.mean_u) + "," +
           format_double(m.mean_v) + "\n";
  }
  out += "all,all," + std::to_string(report.epe.count) + "," + format_double(report.epe.mean_u) +
         "," + format_double(report.epe.mean_v) + "\n";
  return out;
}

void write_report(const fs::path& dir, const MetricReport& report) {
  fs::create_directories(dir);
  io::write_text(dir / "report.json", report_json(report));
  io::write_text(dir / "summary.csv", report_summary_csv(report));
  io::write_text(dir / "consistency.csv", report_consistency_csv(report));
  io::write_text(dir / "epe.csv", report_epe_csv(report));
}

std::string manifest_json(const PipelineConfig& cfg, const std::string& command) {
  const std::string ini = to_ini(cfg);
  json doc = {{"version", kVersion},
              {"command", command},
              {"config_hash", hex64(fnv1a(ini))},
              {"seed", cfg.seed},
              {"seeds",
               {{"bathymetry", derive_seed(cfg.seed, kBathymetryStream)},
                {"survey", derive_seed(cfg.seed, kSurveyStream)},
                {"drift", derive_seed(cfg.seed, kDriftStream)},
                {"ransac", cfg.association.rng_seed}}},
              {"config", ini}};
  return doc.dump(1) + "\n";
}

}  // namespace sss
