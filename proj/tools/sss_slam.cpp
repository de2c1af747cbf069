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

// sss_slam: simulate surveys, run side-scan SLAM and evaluate the results.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sss/config.hpp"
#include "sss/estimation.hpp"
#include "sss/io.hpp"
#include "sss/pipeline.hpp"
#include "sss/pose_graph.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> node_stride;
  std::optional<std::string> mode;
  bool no_depth_prior = false;
  bool zero_drift = false;
  std::string out;
  std::string dataset;
  std::string results;
  std::string annotated;
  std::string input;
  int trials = 100;
};

/// Error tagged with the pipeline stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what) {}
};

template <typename F>
auto stage(const std::string& name, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

/// --config if given, else the configuration recorded in `dataset`'s
/// manifest, else defaults; then command-line overrides.
sss::PipelineConfig load(const Options& o, const std::string& dataset = {}) {
  return stage("config", [&] {
    sss::PipelineConfig cfg;
    if (!o.config.empty()) {
      cfg = sss::load_config(o.config);
    } else if (!dataset.empty() && fs::exists(fs::path(dataset) / "manifest.json")) {
      const auto manifest =
          nlohmann::json::parse(sss::io::read_text(fs::path(dataset) / "manifest.json"));
      cfg = sss::parse_config(manifest.at("config").get<std::string>());
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) cfg.threads = *o.threads;
    if (o.node_stride) cfg.node_stride = *o.node_stride;
    if (o.mode) cfg.mode = *o.mode == "batch" ? sss::SolveMode::kBatch : sss::SolveMode::kIncremental;
    if (o.no_depth_prior) cfg.estimation.use_depth_prior = false;
    if (o.zero_drift) cfg.zero_drift = true;
    cfg.finalize();
    return cfg;
  });
}

int cmd_simulate(const Options& o) {
  const sss::PipelineConfig cfg = load(o);
  const sss::Dataset data = stage("simulate", [&] { return sss::simulate_dataset(cfg); });
  stage("write", [&] {
    sss::write_dataset(o.out, data, cfg);
    return 0;
  });
  std::printf("%zu pings, %zu lines, dead-reckoning drift %.3f%% of %.0f m -> %s\n",
              data.pings.size(), data.lines.size(), data.drift.percent(), data.drift.distance,
              o.out.c_str());
  return 0;
}

int cmd_run(const Options& o) {
  const sss::PipelineConfig cfg = load(o, o.dataset);
  const sss::Dataset data = stage("read", [&] { return sss::read_dataset(o.dataset); });
  const sss::RunResult res =
      stage("run", [&] { return sss::run_pipeline(data.pings, data.lines, cfg); });
  stage("write", [&] {
    sss::write_results(o.out, res, cfg);
    return 0;
  });
  for (const std::string& line : res.log) {
    if (line.rfind("warning", 0) == 0) std::fprintf(stderr, "%s\n", line.c_str());
  }
  std::printf("%zu candidates, %zu constraints, %zu loop closures -> %s\n",
              res.correspondences.size(), res.constraints.size(), res.loop_closures,
              o.out.c_str());
  return 0;
}

int cmd_eval(const Options& o) {
  const sss::PipelineConfig cfg = load(o, o.dataset);
  const sss::Dataset data = stage("read", [&] { return sss::read_dataset(o.dataset); });
  const fs::path results(o.results);
  const auto corrs = stage("read", [&] {
    return sss::io::read_correspondences_csv(results / "correspondences.csv");
  });
  const auto optimized =
      stage("read", [&] { return sss::io::read_trajectory_csv(results / "trajectory.csv"); });
  std::vector<sss::Correspondence> annotations;
  if (!o.annotated.empty()) {
    annotations = stage("read", [&] { return sss::io::read_correspondences_csv(o.annotated); });
  }
  const sss::MetricReport rep = stage("eval", [&] {
    return sss::evaluate(data, corrs, optimized, cfg, annotations);
  });
  const fs::path out = o.out.empty() ? results / "report" : fs::path(o.out);
  stage("write", [&] {
    sss::write_report(out, rep);
    return 0;
  });
  std::cout << sss::report_summary_csv(rep);
  return 0;
}

int cmd_jacobian_check(const Options& o) {
  std::mt19937_64 rng(o.seed.value_or(1));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < o.trials; ++k) {
    const sss::Pose body = sss::Pose::from_rpy(sss::Vec3(50 * u(rng), 50 * u(rng), 5 * u(rng)),
                                               0.2 * u(rng), 0.2 * u(rng), 3.0 * u(rng));
    const sss::Pose offset =
        sss::Pose::from_rpy(sss::Vec3(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)), 0.1 * u(rng),
                            0.1 * u(rng), 0.1 * u(rng));
    const sss::Pose sensor = body * offset;
    const sss::Vec3 local(5.0 * u(rng), 40.0 * u(rng), 10.0 + 20.0 * (u(rng) + 1.0));
    const double err = sss::check_jacobians(body, offset, sensor * local);
    worst = std::max(worst, err);
  }
  std::printf("max relative jacobian error over %d configurations: %.3e\n", o.trials, worst);
  return worst < 1e-5 ? 0 : 1;
}

int cmd_graph_solve(const Options& o) {
  sss::PipelineConfig cfg = load(o);
  sss::PoseGraph graph = stage("read", [&] { return sss::io::read_g2o(o.input); });
  const sss::GraphSolution s = stage("solve", [&] { return graph.optimize(cfg.graph); });
  stage("write", [&] {
    sss::io::write_g2o(o.out, graph);
    return 0;
  });
  std::printf("%zu nodes, %zu factors: cost %.6g -> %.6g in %d iterations%s\n",
              graph.nodes().size(), graph.factors().size(), s.initial_cost, s.final_cost,
              s.iterations, s.converged ? "" : " (not converged)");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Side-scan sonar SLAM: simulation, pipeline and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* sim = app.add_subcommand("simulate", "Simulate a survey dataset");
  common(sim);
  sim->add_option("--out", o.out, "Dataset directory")->required();
  sim->add_flag("--zero-drift", o.zero_drift, "Dead reckoning equals the ground truth");

  auto* run = app.add_subcommand("run", "Run the SLAM pipeline on a dataset");
  common(run);
  run->add_option("--dataset", o.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  run->add_option("--out", o.out, "Results directory")->required();
  run->add_option("--node-stride", o.node_stride, "Keep every n-th ping as a graph node")
      ->check(CLI::PositiveNumber);
  run->add_option("--mode", o.mode, "Graph solving mode")
      ->check(CLI::IsMember({"incremental", "batch"}));
  run->add_flag("--no-depth-prior", o.no_depth_prior, "Disable the landmark depth prior");

  auto* ev = app.add_subcommand("eval", "Evaluate run results against the ground truth");
  common(ev);
  ev->add_option("--dataset", o.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--results", o.results, "Results directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--annotated", o.annotated, "Annotated correspondence CSV")->check(CLI::ExistingFile);
  ev->add_option("--out", o.out, "Report directory (default <results>/report)");
  ev->add_flag("--no-depth-prior", o.no_depth_prior, "Disable the landmark depth prior");

  auto* jac = app.add_subcommand("jacobian-check", "Compare measurement Jacobians with finite differences");
  jac->add_option("--seed", o.seed, "Random seed");
  jac->add_option("--trials", o.trials, "Random configurations")->check(CLI::PositiveNumber);

  auto* gs = app.add_subcommand("graph-solve", "Optimize a g2o pose graph file");
  gs->add_option("--config", o.config, "Configuration file (graph section)")->check(CLI::ExistingFile);
  gs->add_option("--input", o.input, "Input g2o file")->required()->check(CLI::ExistingFile);
  gs->add_option("--out", o.out, "Output g2o file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (run->parsed()) return cmd_run(o);
    if (ev->parsed()) return cmd_eval(o);
    if (jac->parsed()) return cmd_jacobian_check(o);
    if (gs->parsed()) return cmd_graph_solve(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
