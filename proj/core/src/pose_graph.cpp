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

#include "sss/pose_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

namespace sss {

const char* factor_kind_name(FactorKind kind) {
  switch (kind) {
    case FactorKind::kOdometry: return "odometry";
    case FactorKind::kLoopClosure: return "loop_closure";
    case FactorKind::kPrior: return "prior";
  }
  return "unknown";
}

void GraphConfig::validate() const {
  if (max_iterations <= 0) throw std::invalid_argument("graph.max_iterations must be > 0");
  if (!(relative_cost_tolerance >= 0.0) || !(gradient_tolerance >= 0.0)) {
    throw std::invalid_argument("graph tolerances must be >= 0");
  }
  if (!(initial_lambda > 0.0)) throw std::invalid_argument("graph.initial_lambda must be > 0");
  if (!(huber_threshold > 0.0)) throw std::invalid_argument("graph.huber_threshold must be > 0");
  if (!(lc_covariance_scale > 0.0)) {
    throw std::invalid_argument("graph.lc_covariance_scale must be > 0");
  }
  if (incremental_horizon < 0) {
    throw std::invalid_argument("graph.incremental_horizon must be >= 0");
  }
  if (full_every <= 0) throw std::invalid_argument("graph.full_every must be > 0");
}

std::size_t PoseGraph::add_node(std::int64_t id, const Pose& estimate, bool fixed) {
  if (index_.contains(id)) {
    throw std::invalid_argument("duplicate node id " + std::to_string(id));
  }
  if (fixed && has_fixed_) throw std::invalid_argument("graph already has a fixed node");
  has_fixed_ = has_fixed_ || fixed;
  index_.emplace(id, nodes_.size());
  nodes_.push_back({id, estimate, fixed});
  return nodes_.size() - 1;
}

std::size_t PoseGraph::add_factor(const Factor& factor) {
  if (!has_node(factor.from) ||
      (factor.kind != FactorKind::kPrior && !has_node(factor.to))) {
    throw std::invalid_argument(std::string(factor_kind_name(factor.kind)) +
                                " factor references an unknown node (" +
                                std::to_string(factor.from) + ", " +
                                std::to_string(factor.to) + ")");
  }
  const Mat6 sym = 0.5 * (factor.covariance + factor.covariance.transpose());
  Eigen::LLT<Mat6> cov_llt(sym);
  if (!sym.allFinite() || cov_llt.info() != Eigen::Success) {
    throw std::invalid_argument("factor covariance is not symmetric positive definite");
  }
  const Mat6 info = cov_llt.solve(Mat6::Identity());
  Eigen::LLT<Mat6> info_llt(0.5 * (info + info.transpose()));
  factors_.push_back(factor);
  sqrt_info_.push_back(info_llt.matrixU());
  return factors_.size() - 1;
}

std::size_t PoseGraph::add_loop_closure(const LoopClosureConstraint& c,
                                        double covariance_scale) {
  if (!c.usable()) {
    throw std::invalid_argument("loop closure " + std::to_string(c.ping_i) + " -> " +
                                std::to_string(c.ping_j) + " is not usable");
  }
  Factor f;
  f.kind = FactorKind::kLoopClosure;
  f.from = c.ping_i;
  f.to = c.ping_j;
  f.measured = c.relative;
  f.covariance = covariance_scale * c.covariance;
  return add_factor(f);
}

const PoseNode& PoseGraph::node(std::int64_t id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown node " + std::to_string(id));
  return nodes_[it->second];
}

std::size_t PoseGraph::num_loop_closures() const {
  return static_cast<std::size_t>(
      std::count_if(factors_.begin(), factors_.end(),
                    [](const Factor& f) { return f.kind == FactorKind::kLoopClosure; }));
}

void PoseGraph::set_estimate(std::int64_t id, const Pose& estimate) {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown node " + std::to_string(id));
  nodes_[it->second].estimate = estimate;
}

namespace {

Twist factor_residual(const Factor& f, const Pose& a, const Pose& b) {
  if (f.kind == FactorKind::kPrior) return pose_residual(f.measured, a);
  return pose_residual(f.measured, a.inverse() * b);
}

struct Robust {
  double cost;
  double weight;
};

Robust robustify(double s, bool robust, double k) {
  if (!robust || s <= k * k) return {s, 1.0};
  const double n = std::sqrt(s);
  return {2.0 * k * n - k * k, k / n};
}

}  // namespace

Twist PoseGraph::residual(std::size_t factor_index) const {
  const Factor& f = factors_.at(factor_index);
  const Pose& a = nodes_[index_.at(f.from)].estimate;
  const Pose& b = f.kind == FactorKind::kPrior ? a : nodes_[index_.at(f.to)].estimate;
  return factor_residual(f, a, b);
}

double PoseGraph::cost(const GraphConfig& cfg) const {
  double total = 0.0;
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const double s = (sqrt_info_[k] * residual(k)).squaredNorm();
    total += robustify(s, cfg.robust_loop_closures &&
                              factors_[k].kind == FactorKind::kLoopClosure,
                       cfg.huber_threshold)
                 .cost;
  }
  return total;
}

std::vector<std::vector<std::size_t>> PoseGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(nodes_.size());
  for (const Factor& f : factors_) {
    if (f.kind == FactorKind::kPrior) continue;
    const std::size_t a = index_.at(f.from);
    const std::size_t b = index_.at(f.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

std::vector<std::int64_t> PoseGraph::disconnected_nodes() const {
  std::vector<char> reached(nodes_.size(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].fixed) {
      reached[i] = 1;
      queue.push_back(i);
    }
  }
  // Prior factors anchor their node as well.
  for (const Factor& f : factors_) {
    if (f.kind != FactorKind::kPrior) continue;
    const std::size_t i = index_.at(f.from);
    if (!reached[i]) {
      reached[i] = 1;
      queue.push_back(i);
    }
  }
  const auto adj = adjacency();
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t j : adj[i]) {
      if (!reached[j]) {
        reached[j] = 1;
        queue.push_back(j);
      }
    }
  }
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!reached[i]) out.push_back(nodes_[i].id);
  }
  return out;
}

namespace {

struct Linearization {
  Eigen::SparseMatrix<double> hessian;
  Eigen::VectorXd gradient;
  double cost = 0.0;
};

}  // namespace

GraphSolution PoseGraph::solve(const std::vector<char>& active, const GraphConfig& cfg) {
  cfg.validate();
  if (!has_fixed_) throw std::invalid_argument("pose graph needs exactly one fixed node");
  if (const auto lost = disconnected_nodes(); !lost.empty()) {
    throw std::runtime_error("pose graph is not connected to the fixed node: " +
                             std::to_string(lost.size()) + " unreachable node(s), first id " +
                             std::to_string(lost.front()));
  }

  // Variable layout over the active free nodes, in node order.
  std::vector<int> var(nodes_.size(), -1);
  int nvar = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (active[i] && !nodes_[i].fixed) var[i] = nvar++;
  }
  GraphSolution sol;
  sol.initial_cost = cost(cfg);
  sol.final_cost = sol.initial_cost;
  if (nvar == 0) {
    sol.converged = true;
  }
  const int dim = 6 * nvar;

  std::vector<std::size_t> touching;
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const Factor& f = factors_[k];
    const int a = var[index_.at(f.from)];
    const int b = f.kind == FactorKind::kPrior ? -1 : var[index_.at(f.to)];
    if (a >= 0 || b >= 0) touching.push_back(k);
  }

  auto linearize = [&]() {
    Linearization lin;
    lin.gradient = Eigen::VectorXd::Zero(dim);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(touching.size() * 4 * 36 + static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) triplets.emplace_back(d, d, 0.0);
    auto add_block = [&triplets](int r0, int c0, const Mat6& m) {
      for (int c = 0; c < 6; ++c) {
        for (int r = 0; r < 6; ++r) triplets.emplace_back(r0 + r, c0 + c, m(r, c));
      }
    };
    for (std::size_t k : touching) {
      const Factor& f = factors_[k];
      const std::size_t ia = index_.at(f.from);
      const Pose& ta = nodes_[ia].estimate;
      const bool prior = f.kind == FactorKind::kPrior;
      const std::size_t ib = prior ? ia : index_.at(f.to);
      const Pose& tb = nodes_[ib].estimate;
      const Twist e = factor_residual(f, ta, tb);
      const Mat6& u = sqrt_info_[k];
      const Vec6 r = u * e;
      const Robust rob = robustify(r.squaredNorm(),
                                   cfg.robust_loop_closures &&
                                       f.kind == FactorKind::kLoopClosure,
                                   cfg.huber_threshold);
      const Mat6 jr_inv = se3_right_jacobian_inverse(e);
      const int a = var[ia];
      const int b = prior ? -1 : var[ib];
      Mat6 ja;
      Mat6 jb = Mat6::Zero();
      if (prior) {
        ja = u * jr_inv;
      } else {
        ja = -u * jr_inv * adjoint(tb.inverse() * ta);
        jb = u * jr_inv;
      }
      const double w = rob.weight;
      if (a >= 0) {
        lin.gradient.segment<6>(6 * a) += w * ja.transpose() * r;
        add_block(6 * a, 6 * a, w * ja.transpose() * ja);
      }
      if (b >= 0) {
        lin.gradient.segment<6>(6 * b) += w * jb.transpose() * r;
        add_block(6 * b, 6 * b, w * jb.transpose() * jb);
      }
      if (a >= 0 && b >= 0) {
        const Mat6 off = w * ja.transpose() * jb;
        add_block(6 * a, 6 * b, off);
        add_block(6 * b, 6 * a, off.transpose());
      }
    }
    lin.hessian.resize(dim, dim);
    lin.hessian.setFromTriplets(triplets.begin(), triplets.end());
    lin.cost = cost(cfg);
    return lin;
  };

  auto apply = [&](const Eigen::VectorXd& step) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (var[i] >= 0) {
        nodes_[i].estimate = nodes_[i].estimate * exp(Twist(step.segment<6>(6 * var[i])));
      }
    }
  };

  if (nvar > 0) {
    Linearization lin = linearize();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.analyzePattern(lin.hessian);
    double lambda = -1.0;
    double nu = 2.0;
    int failures = 0;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
      sol.iterations = iter + 1;
      if (lin.gradient.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance ||
          lin.cost <= 0.0) {
        sol.converged = true;
        sol.iterations = iter;
        break;
      }
      const Eigen::VectorXd diag = lin.hessian.diagonal();
      if (lambda < 0.0) lambda = cfg.initial_lambda * std::max(diag.maxCoeff(), 1e-12);
      Eigen::SparseMatrix<double> damped = lin.hessian;
      for (int d = 0; d < dim; ++d) {
        damped.coeffRef(d, d) += lambda * std::max(diag(d), 1e-9);
      }
      ldlt.factorize(damped);
      if (ldlt.info() != Eigen::Success) {
        if (++failures > 30) {
          throw std::runtime_error(
              "pose graph normal equations are indefinite (" + std::to_string(nvar) +
              " free nodes, " + std::to_string(touching.size()) + " factors)");
        }
        lambda *= nu;
        nu *= 2.0;
        continue;
      }
      const Eigen::VectorXd step = ldlt.solve(-lin.gradient);
      const std::vector<PoseNode> saved = nodes_;
      apply(step);
      const double cand = cost(cfg);
      const double predicted =
          -(2.0 * lin.gradient.dot(step) + step.dot(lin.hessian * step));
      const double rho = predicted > 0.0 ? (lin.cost - cand) / predicted : -1.0;
      if (std::isfinite(cand) && cand < lin.cost && rho > 0.0) {
        const double rel = (lin.cost - cand) / lin.cost;
        lin = linearize();
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        if (rel < cfg.relative_cost_tolerance) {
          sol.converged = true;
          break;
        }
      } else {
        nodes_ = saved;
        // No representable decrease left: the cost is flat at this precision.
        if (std::isfinite(cand) &&
            std::abs(cand - lin.cost) <= cfg.relative_cost_tolerance * lin.cost) {
          sol.converged = true;
          break;
        }
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e30) break;
      }
    }
    sol.final_cost = lin.cost;
  }

  sol.factor_chi2.reserve(factors_.size());
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    sol.factor_chi2.push_back((sqrt_info_[k] * residual(k)).squaredNorm());
  }
  return sol;
}

GraphSolution PoseGraph::optimize(const GraphConfig& cfg) {
  return solve(std::vector<char>(nodes_.size(), 1), cfg);
}

GraphSolution PoseGraph::optimize_local(std::span<const std::size_t> new_factors,
                                        const GraphConfig& cfg) {
  if (cfg.incremental_horizon == 0) return optimize(cfg);
  std::vector<int> depth(nodes_.size(), -1);
  std::deque<std::size_t> queue;
  auto seed = [&](std::int64_t id) {
    const std::size_t i = index_.at(id);
    if (depth[i] < 0) {
      depth[i] = 0;
      queue.push_back(i);
    }
  };
  for (std::size_t k : new_factors) {
    const Factor& f = factors_.at(k);
    seed(f.from);
    if (f.kind != FactorKind::kPrior) seed(f.to);
  }
  const auto adj = adjacency();
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    if (depth[i] >= cfg.incremental_horizon) continue;
    for (std::size_t j : adj[i]) {
      if (depth[j] < 0) {
        depth[j] = depth[i] + 1;
        queue.push_back(j);
      }
    }
  }
  std::vector<char> active(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) active[i] = depth[i] >= 0 ? 1 : 0;
  return solve(active, cfg);
}

NormalEquations PoseGraph::normal_equations() const {
  NormalEquations ne;
  std::vector<int> var(nodes_.size(), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].fixed) {
      var[i] = static_cast<int>(ne.node_ids.size());
      ne.node_ids.push_back(nodes_[i].id);
    }
  }
  const int dim = 6 * static_cast<int>(ne.node_ids.size());
  ne.gradient = Eigen::VectorXd::Zero(dim);
  std::vector<Eigen::Triplet<double>> triplets;
  auto add_block = [&triplets](int r0, int c0, const Mat6& m) {
    for (int c = 0; c < 6; ++c) {
      for (int r = 0; r < 6; ++r) triplets.emplace_back(r0 + r, c0 + c, m(r, c));
    }
  };
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const Factor& f = factors_[k];
    const std::size_t ia = index_.at(f.from);
    const bool prior = f.kind == FactorKind::kPrior;
    const std::size_t ib = prior ? ia : index_.at(f.to);
    const Pose& ta = nodes_[ia].estimate;
    const Pose& tb = nodes_[ib].estimate;
    const Twist e = factor_residual(f, ta, tb);
    const Mat6& u = sqrt_info_[k];
    const Vec6 r = u * e;
    const Mat6 jr_inv = se3_right_jacobian_inverse(e);
    const int a = var[ia];
    const int b = prior ? -1 : var[ib];
    const Mat6 ja = prior ? Mat6(u * jr_inv) : Mat6(-u * jr_inv * adjoint(tb.inverse() * ta));
    const Mat6 jb = u * jr_inv;
    if (a >= 0) {
      ne.gradient.segment<6>(6 * a) += ja.transpose() * r;
      add_block(6 * a, 6 * a, ja.transpose() * ja);
    }
    if (b >= 0) {
      ne.gradient.segment<6>(6 * b) += jb.transpose() * r;
      add_block(6 * b, 6 * b, jb.transpose() * jb);
    }
    if (a >= 0 && b >= 0) {
      add_block(6 * a, 6 * b, ja.transpose() * jb);
      add_block(6 * b, 6 * a, jb.transpose() * ja);
    }
  }
  ne.hessian.resize(dim, dim);
  ne.hessian.setFromTriplets(triplets.begin(), triplets.end());
  return ne;
}

std::vector<Factor> make_odometry_chain(std::span<const std::int64_t> ids,
                                        std::span<const Pose> poses,
                                        const OdometryNoise& noise) {
  if (ids.size() != poses.size()) {
    throw std::invalid_argument("make_odometry_chain: ids and poses differ in length");
  }
  noise.validate();
  std::unordered_set<std::int64_t> seen;
  for (std::int64_t id : ids) {
    if (!seen.insert(id).second) {
      throw std::invalid_argument("make_odometry_chain: duplicate ping id " +
                                  std::to_string(id));
    }
  }
  std::vector<Factor> out;
  for (std::size_t k = 1; k < ids.size(); ++k) {
    Factor f;
    f.kind = FactorKind::kOdometry;
    f.from = ids[k - 1];
    f.to = ids[k];
    f.measured = relative(poses[k - 1], poses[k]);
    f.covariance = noise.covariance(f.measured.position().norm());
    out.push_back(f);
  }
  return out;
}

GraphSolution IncrementalSolver::update(PoseGraph& graph,
                                        std::span<const std::size_t> new_factors) {
  ++updates_;
  if (cfg_.incremental_horizon == 0 || updates_ % cfg_.full_every == 0) {
    return graph.optimize(cfg_);
  }
  return graph.optimize_local(new_factors, cfg_);
}

GraphSolution IncrementalSolver::finish(PoseGraph& graph) { return graph.optimize(cfg_); }

}  // namespace sss
