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

/**
 * @file pose_graph.hpp
 * @brief Per-ping pose graph with odometry and loop-closure factors, solved
 * by sparse Levenberg-Marquardt on SE(3).
 *
 * A factor between nodes i and j with measurement Z contributes
 * e^T Sigma^-1 e with e = log(Z^-1 * T_i^-1 * T_j). Exactly one node is
 * fixed; it anchors the gauge.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "sss/estimation.hpp"
#include "sss/geometry.hpp"

namespace sss {

enum class FactorKind { kOdometry, kLoopClosure, kPrior };
[[nodiscard]] const char* factor_kind_name(FactorKind kind);

struct Factor {
  FactorKind kind = FactorKind::kOdometry;
  std::int64_t from = 0;
  std::int64_t to = 0;  // ignored for priors
  Pose measured;
  Mat6 covariance = Mat6::Identity();
};

struct PoseNode {
  std::int64_t id = 0;
  Pose estimate;
  bool fixed = false;
};

struct GraphConfig {
  int max_iterations = 100;
  double relative_cost_tolerance = 1e-12;
  double gradient_tolerance = 1e-10;
  double initial_lambda = 1e-6;
  /// Huber kernel on loop-closure factors (threshold in whitened units).
  bool robust_loop_closures = false;
  double huber_threshold = 3.0;
  /// Multiplies every loop-closure covariance on insertion.
  double lc_covariance_scale = 1.0;
  /// Incremental mode: graph hops around new factors that are re-optimized;
  /// 0 re-optimizes every node.
  int incremental_horizon = 400;
  /// Incremental mode: a full solve every this many updates.
  int full_every = 4;

  void validate() const;
};

struct GraphSolution {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Whitened squared residual per factor, in factor order.
  std::vector<double> factor_chi2;
};

struct NormalEquations {
  Eigen::SparseMatrix<double> hessian;  // J^T J over the free nodes
  Eigen::VectorXd gradient;             // J^T r
  std::vector<std::int64_t> node_ids;   // free node of each 6-block
};

class PoseGraph {
 public:
  /// Throws std::invalid_argument on a duplicate id or a second fixed node.
  std::size_t add_node(std::int64_t id, const Pose& estimate, bool fixed = false);
  /// Throws std::invalid_argument on unknown nodes or a non-SPD covariance.
  std::size_t add_factor(const Factor& factor);
  /// Rejects constraints that did not converge or were flagged as outliers.
  std::size_t add_loop_closure(const LoopClosureConstraint& c, double covariance_scale = 1.0);

  [[nodiscard]] bool has_node(std::int64_t id) const { return index_.contains(id); }
  [[nodiscard]] const PoseNode& node(std::int64_t id) const;
  [[nodiscard]] const std::vector<PoseNode>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<Factor>& factors() const { return factors_; }
  [[nodiscard]] std::size_t num_loop_closures() const;
  void set_estimate(std::int64_t id, const Pose& estimate);

  /// Residual twist of one factor at the current estimates.
  [[nodiscard]] Twist residual(std::size_t factor_index) const;
  /// Total (robustified) cost at the current estimates.
  [[nodiscard]] double cost(const GraphConfig& cfg = {}) const;

  /// Batch solve over every free node. Updates the estimates in place.
  GraphSolution optimize(const GraphConfig& cfg);
  /// Solve over the free nodes within cfg.incremental_horizon hops of the
  /// endpoints of `new_factors`; all other nodes are held.
  GraphSolution optimize_local(std::span<const std::size_t> new_factors,
                               const GraphConfig& cfg);

  [[nodiscard]] NormalEquations normal_equations() const;

  /// Ids of free nodes with no path to the fixed node.
  [[nodiscard]] std::vector<std::int64_t> disconnected_nodes() const;

 private:
  GraphSolution solve(const std::vector<char>& active, const GraphConfig& cfg);
  [[nodiscard]] std::vector<std::vector<std::size_t>> adjacency() const;

  std::vector<PoseNode> nodes_;
  std::vector<Factor> factors_;
  std::unordered_map<std::int64_t, std::size_t> index_;
  std::vector<Mat6> sqrt_info_;
  bool has_fixed_ = false;
};

/// One odometry factor per consecutive pair of poses, covariance from the
/// travelled distance. Throws on duplicate ids or mismatched lengths.
[[nodiscard]] std::vector<Factor> make_odometry_chain(std::span<const std::int64_t> ids,
                                                      std::span<const Pose> poses,
                                                      const OdometryNoise& noise);

/// Warm-started incremental solving: local solves around new factors with a
/// periodic full solve.
class IncrementalSolver {
 public:
  explicit IncrementalSolver(GraphConfig cfg) : cfg_(std::move(cfg)) {}

  GraphSolution update(PoseGraph& graph, std::span<const std::size_t> new_factors);
  /// Final full solve.
  GraphSolution finish(PoseGraph& graph);
  [[nodiscard]] int updates() const { return updates_; }

 private:
  GraphConfig cfg_;
  int updates_ = 0;
};

}  // namespace sss
