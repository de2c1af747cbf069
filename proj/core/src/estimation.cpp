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

#include "sss/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace sss {

void OdometryNoise::validate() const {
  if (!(rotation_variance_per_meter > 0.0) || !(translation_variance_per_meter > 0.0) ||
      !(attitude_variance_per_meter > 0.0) || !(depth_variance_per_meter > 0.0)) {
    throw std::invalid_argument("odometry variances must be > 0");
  }
  if (!(min_distance > 0.0)) throw std::invalid_argument("odometry.min_distance must be > 0");
}

Mat6 OdometryNoise::covariance(double distance) const {
  const double d = std::max(distance, min_distance);
  Vec6 diag;
  diag << attitude_variance_per_meter * d, attitude_variance_per_meter * d,
      rotation_variance_per_meter * d, translation_variance_per_meter * d,
      translation_variance_per_meter * d, depth_variance_per_meter * d;
  return diag.asDiagonal();
}

void EstimationConfig::validate() const {
  if (!(depth_prior_scale > 0.0)) {
    throw std::invalid_argument("estimation.depth_prior_scale must be > 0");
  }
  if (!(min_depth_std > 0.0)) throw std::invalid_argument("estimation.min_depth_std must be > 0");
  if (max_iterations <= 0) throw std::invalid_argument("estimation.max_iterations must be > 0");
  if (!(relative_cost_tolerance >= 0.0) || !(gradient_tolerance >= 0.0)) {
    throw std::invalid_argument("estimation tolerances must be >= 0");
  }
  if (!(initial_lambda > 0.0)) throw std::invalid_argument("estimation.initial_lambda must be > 0");
  if (!(outlier_sigma > 0.0)) throw std::invalid_argument("estimation.outlier_sigma must be > 0");
  if (!(odometry_scale > 0.0)) throw std::invalid_argument("estimation.odometry_scale must be > 0");
}

PingObservation observe(const SonarImage& image, const Keypoint& kp) {
  if (!image.canonical || !image.georeferenced()) {
    throw std::invalid_argument("observe: image must be canonical and geo-referenced");
  }
  if (kp.row < 0 || kp.row >= image.num_rows()) {
    throw std::out_of_range("observe: keypoint row outside image");
  }
  const ImageRow& row = image.rows[static_cast<std::size_t>(kp.row)];
  PingObservation obs;
  obs.ping_id = row.ping_id;
  obs.pose = row.pose;
  obs.range = image.slant_range(kp.row, kp.col);
  obs.altitude = row.altitude;
  obs.geo = image.georef(kp.row, kp.col);
  return obs;
}

namespace {

Vec3 to_sensor(const Pose& body, const Pose& sensor_offset, const Vec3& landmark) {
  return sensor_offset.inverse() * (body.inverse() * landmark);
}

}  // namespace

Vec2 predict_measurement(const Pose& body, const Pose& sensor_offset,
                         const Vec3& landmark) {
  const Vec3 s = to_sensor(body, sensor_offset, landmark);
  const double r = s.norm();
  if (!(r > 0.0)) throw std::domain_error("predict_measurement: landmark at sensor origin");
  return {r, s.x()};
}

MeasurementJacobians measurement_jacobians(const Pose& body, const Pose& sensor_offset,
                                           const Vec3& landmark) {
  const Vec3 p_body = body.inverse() * landmark;
  const Vec3 s = sensor_offset.inverse() * p_body;
  const double r = s.norm();
  if (!(r > 0.0)) throw std::domain_error("measurement_jacobians: landmark at sensor origin");
  const Mat3 rs_t = sensor_offset.rotation().transpose();

  Eigen::Matrix<double, 3, 6> ds_dpose;
  ds_dpose << rs_t * skew(p_body), -rs_t;
  const Mat3 ds_dl = rs_t * body.rotation().transpose();

  Mat23 dh_ds;
  dh_ds.row(0) = s.transpose() / r;
  dh_ds.row(1) = Vec3::UnitX().transpose();
  return {dh_ds * ds_dpose, dh_ds * ds_dl};
}

Mat2 measurement_covariance(double range, const SonarConfig& cfg) {
  if (!(range > 0.0)) throw std::invalid_argument("measurement_covariance: range must be > 0");
  Mat2 cov = Mat2::Zero();
  cov(0, 0) = cfg.range_std * cfg.range_std;
  cov(1, 1) = range * range * cfg.beam_width * cfg.beam_width;
  return cov;
}

LandmarkEstimate init_landmark(const PingObservation& a, const PingObservation& b,
                               const EstimationConfig& cfg) {
  const Vec3 mid = 0.5 * (a.geo + b.geo);
  auto horizontal = [&mid](const PingObservation& o) {
    return (mid.head<2>() - o.pose.position().head<2>()).norm();
  };
  const double da = horizontal(a);
  const double db = horizontal(b);
  const PingObservation& nearer = db < da ? b : a;
  LandmarkEstimate lm;
  lm.prior_mean = nearer.pose.position().z() + nearer.altitude;
  lm.prior_std = std::max(cfg.min_depth_std, cfg.depth_prior_scale * std::min(da, db));
  lm.position = Vec3(mid.x(), mid.y(), lm.prior_mean);
  return lm;
}

namespace {

constexpr int kResiduals = 11;  // 2 + 2 measurement, 6 odometry, 1 prior
constexpr int kParams = 9;      // pose_j twist, landmark
using Residual = Eigen::Matrix<double, kResiduals, 1>;
using Jacobian = Eigen::Matrix<double, kResiduals, kParams>;
using Hessian = Eigen::Matrix<double, kParams, kParams>;
using Gradient = Eigen::Matrix<double, kParams, 1>;

struct Problem {
  const PingObservation& obs_i;
  const PingObservation& obs_j;
  Pose odometry;
  Mat6 odometry_sqrt_info;
  Pose sensor_offset;
  Mat2 sqrt_info_i;
  Mat2 sqrt_info_j;
  bool use_prior;
  double prior_mean;
  double prior_std;

  // Whitened residuals; row 10 is zero without the prior.
  Residual residual(const Pose& pose_j, const Vec3& lm, Jacobian* jac) const {
    Residual r = Residual::Zero();
    const Vec2 mi = predict_measurement(obs_i.pose, sensor_offset, lm) -
                    Vec2(obs_i.range, 0.0);
    const Vec2 mj = predict_measurement(pose_j, sensor_offset, lm) -
                    Vec2(obs_j.range, 0.0);
    const Pose pred = obs_i.pose.inverse() * pose_j;
    const Twist e = pose_residual(odometry, pred);
    r.segment<2>(0) = sqrt_info_i * mi;
    r.segment<2>(2) = sqrt_info_j * mj;
    r.segment<6>(4) = odometry_sqrt_info * e;
    if (use_prior) r(10) = (lm.z() - prior_mean) / prior_std;
    if (jac != nullptr) {
      jac->setZero();
      const MeasurementJacobians ji = measurement_jacobians(obs_i.pose, sensor_offset, lm);
      const MeasurementJacobians jj = measurement_jacobians(pose_j, sensor_offset, lm);
      jac->block<2, 3>(0, 6) = sqrt_info_i * ji.landmark;
      jac->block<2, 6>(2, 0) = sqrt_info_j * jj.pose;
      jac->block<2, 3>(2, 6) = sqrt_info_j * jj.landmark;
      jac->block<6, 6>(4, 0) = odometry_sqrt_info * se3_right_jacobian_inverse(e);
      if (use_prior) (*jac)(10, 8) = 1.0 / prior_std;
    }
    return r;
  }

  double max_normalized_measurement(const Residual& r) const {
    return r.head<4>().cwiseAbs().maxCoeff();
  }
};

Mat2 sqrt_information(const Mat2& cov) {
  return cov.diagonal().cwiseSqrt().cwiseInverse().asDiagonal();
}

Mat6 sqrt_information(const Mat6& cov) {
  // Upper Cholesky factor U of the information: U^T U = cov^-1.
  const Mat6 info = cov.inverse();
  Eigen::LLT<Mat6> llt(0.5 * (info + info.transpose()));
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("odometry covariance is not positive definite");
  }
  return llt.matrixU();
}

}  // namespace

LoopClosureConstraint estimate_relative_pose(const PingObservation& obs_i,
                                             const PingObservation& obs_j,
                                             const Pose& odometry,
                                             const Mat6& odometry_cov,
                                             const SonarConfig& sonar,
                                             const EstimationConfig& cfg,
                                             std::optional<Vec3> landmark_init) {
  cfg.validate();
  if (!(obs_i.range > 0.0) || !(obs_j.range > 0.0)) {
    throw std::invalid_argument("estimate_relative_pose: ranges must be > 0");
  }
  LoopClosureConstraint out;
  out.ping_i = obs_i.ping_id;
  out.ping_j = obs_j.ping_id;
  out.landmark = init_landmark(obs_i, obs_j, cfg);
  if (landmark_init) out.landmark.position = *landmark_init;

  const Problem problem{obs_i,
                        obs_j,
                        odometry,
                        sqrt_information(Mat6(cfg.odometry_scale * odometry_cov)),
                        sonar.sensor_offset,
                        sqrt_information(measurement_covariance(obs_i.range, sonar)),
                        sqrt_information(measurement_covariance(obs_j.range, sonar)),
                        cfg.use_depth_prior,
                        out.landmark.prior_mean,
                        out.landmark.prior_std};

  Pose pose_j = obs_i.pose * odometry;
  Vec3 lm = out.landmark.position;
  Jacobian jac;
  Residual r = problem.residual(pose_j, lm, &jac);
  double cost = r.squaredNorm();
  out.initial_cost = cost;

  double lambda = -1.0;
  double nu = 2.0;
  bool converged = false;
  int iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    const Hessian h = jac.transpose() * jac;
    const Gradient g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance || cost < 1e-30) {
      converged = true;
      break;
    }
    if (lambda < 0.0) lambda = cfg.initial_lambda * h.diagonal().maxCoeff();
    const Gradient diag = h.diagonal().cwiseMax(1e-9);
    Hessian damped = h;
    damped.diagonal() += lambda * diag;
    const Gradient step = damped.ldlt().solve(-g);
    if (!step.allFinite()) break;

    const Pose cand_pose = pose_j * exp(step.head<6>());
    const Vec3 cand_lm = lm + step.tail<3>();
    Residual cand_r;
    try {
      cand_r = problem.residual(cand_pose, cand_lm, nullptr);
    } catch (const std::domain_error&) {
      lambda *= nu;
      nu *= 2.0;
      continue;
    }
    const double cand_cost = cand_r.squaredNorm();
    const double predicted = -(2.0 * g.dot(step) + step.dot(h * step));
    const double rho = predicted > 0.0 ? (cost - cand_cost) / predicted : -1.0;
    if (cand_cost < cost && rho > 0.0) {
      const double rel = (cost - cand_cost) / std::max(cost, 1e-300);
      pose_j = cand_pose;
      lm = cand_lm;
      r = problem.residual(pose_j, lm, &jac);
      cost = r.squaredNorm();
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (rel < cfg.relative_cost_tolerance) {
        converged = true;
        ++iter;
        break;
      }
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (lambda > 1e20) break;
    }
  }

  out.iterations = iter;
  out.final_cost = cost;
  out.landmark.position = lm;
  out.relative = obs_i.pose.inverse() * pose_j;
  out.max_normalized_residual = problem.max_normalized_measurement(r);

  const Hessian h = jac.transpose() * jac;
  Eigen::LDLT<Hessian> ldlt(h);
  Hessian cov = ldlt.solve(Hessian::Identity());
  out.covariance = 0.5 * (cov.topLeftCorner<6, 6>() + cov.topLeftCorner<6, 6>().transpose());
  const bool spd = ldlt.info() == Eigen::Success && out.covariance.allFinite() &&
                   Eigen::LLT<Mat6>(out.covariance).info() == Eigen::Success;
  out.converged = converged && spd && cost <= out.initial_cost;
  out.outlier = out.converged && out.max_normalized_residual > cfg.outlier_sigma;
  return out;
}

double check_jacobians(const Pose& body, const Pose& sensor_offset, const Vec3& landmark,
                       double step) {
  const MeasurementJacobians analytic = measurement_jacobians(body, sensor_offset, landmark);
  Eigen::Matrix<double, 2, 9> a;
  a << analytic.pose, analytic.landmark;
  Eigen::Matrix<double, 2, 9> n;
  for (int k = 0; k < 6; ++k) {
    Twist d = Twist::Zero();
    d(k) = step;
    const Vec2 plus = predict_measurement(body * exp(d), sensor_offset, landmark);
    const Vec2 minus = predict_measurement(body * exp(-d), sensor_offset, landmark);
    n.col(k) = (plus - minus) / (2.0 * step);
  }
  for (int k = 0; k < 3; ++k) {
    Vec3 d = Vec3::Zero();
    d(k) = step;
    const Vec2 plus = predict_measurement(body, sensor_offset, landmark + d);
    const Vec2 minus = predict_measurement(body, sensor_offset, landmark - d);
    n.col(6 + k) = (plus - minus) / (2.0 * step);
  }
  return (a - n).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff());
}

}  // namespace sss
