#pragma once

// Constant-velocity linear dynamics with additive Gaussian process noise in
// a standard predict/update Kalman estimator. Measurements are position-only;
// velocities are inferred through the filter cross-covariances.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crosswalk/core.hpp"

namespace crosswalk {

struct NoiseConfig {
  double q_pos = 1e-3;  // process noise variance per position axis, per step
  double q_vel = 1e-2;  // process noise variance per velocity axis, per step
  double r_pos = 1e-2;  // measurement noise variance per position axis

  void validate() const {
    if (q_pos < 0 || q_vel < 0) throw std::invalid_argument("noise: process variances must be >= 0");
    if (r_pos <= 0) throw std::invalid_argument("noise: r_pos must be > 0");
  }
};

// Position-only observation.
struct Measurement {
  double t = 0.0;
  double zx = 0.0;
  double zy = 0.0;
};

inline Matrix4 cv_transition_matrix(double dt) {
  Matrix4 f = Matrix4::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

inline Matrix4 process_noise_matrix(const NoiseConfig& noise) {
  Matrix4 w = Matrix4::Zero();
  w(0, 0) = noise.q_pos;
  w(1, 1) = noise.q_pos;
  w(2, 2) = noise.q_vel;
  w(3, 3) = noise.q_vel;
  return w;
}

inline void symmetrize(Matrix4& m) { m = ((m + m.transpose()) * 0.5).eval(); }

// Mean propagation for one step under the given action. While waiting the
// mean is projected onto the stationarity constraint (position held,
// velocity zeroed); every other action is a plain constant-velocity step.
inline Kinematics cv_mean_step(const Kinematics& kin, double dt, ActionState action) {
  Kinematics out = kin;
  if (action == ActionState::Wait) {
    out.vx = 0.0;
    out.vy = 0.0;
    return out;
  }
  out.x += kin.vx * dt;
  out.y += kin.vy * dt;
  return out;
}

// One predict step: mean per cv_mean_step, covariance always through the full
// constant-velocity transition so that departure from a held state stays
// observable through the position/velocity cross terms.
inline std::pair<Kinematics, Matrix4> cv_predict(const Kinematics& kin, const Matrix4& cov,
                                                 double dt, const NoiseConfig& noise,
                                                 ActionState action) {
  if (dt <= 0.0) throw std::invalid_argument("cv_predict: dt must be > 0");
  const Matrix4 f = cv_transition_matrix(dt);
  Matrix4 cov_out = f * cov * f.transpose() + process_noise_matrix(noise);
  symmetrize(cov_out);
  return {cv_mean_step(kin, dt, action), cov_out};
}

// Linear-Gaussian update with the observation matrix selecting (x, y).
// Joseph-form covariance update keeps the posterior symmetric PSD.
inline std::pair<Kinematics, Matrix4> kalman_update(const Kinematics& kin, const Matrix4& cov,
                                                    const Measurement& z,
                                                    const NoiseConfig& noise) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * noise.r_pos;

  const Eigen::Matrix2d s = h * cov * h.transpose() + r;
  const double det = s.determinant();
  if (!(std::abs(det) > 1e-300) || !std::isfinite(det)) {
    throw std::runtime_error("kalman_update: innovation covariance is singular");
  }
  const Eigen::Matrix<double, 4, 2> k = cov * h.transpose() * s.inverse();

  Eigen::Vector2d innovation(z.zx - kin.x, z.zy - kin.y);
  Eigen::Vector4d mean(kin.x, kin.y, kin.vx, kin.vy);
  mean += k * innovation;

  const Matrix4 ikh = Matrix4::Identity() - k * h;
  Matrix4 cov_out = ikh * cov * ikh.transpose() + k * r * k.transpose();
  symmetrize(cov_out);

  return {Kinematics{mean(0), mean(1), mean(2), mean(3)}, cov_out};
}

// Initial state from two consecutive position fixes. Velocity comes from the
// finite difference; the covariance reflects it exactly (the velocity rows
// inherit the differenced measurement noise, including the cross term with
// the most recent position).
inline std::pair<Kinematics, Matrix4> initialize_from_fixes(const Measurement& first,
                                                            const Measurement& second,
                                                            const NoiseConfig& noise) {
  const double dt = second.t - first.t;
  if (dt <= 0.0) throw std::invalid_argument("initialize_from_fixes: non-increasing timestamps");
  Kinematics kin;
  kin.x = second.zx;
  kin.y = second.zy;
  kin.vx = (second.zx - first.zx) / dt;
  kin.vy = (second.zy - first.zy) / dt;

  const double r = noise.r_pos;
  Matrix4 cov = Matrix4::Zero();
  cov(0, 0) = r;
  cov(1, 1) = r;
  cov(2, 2) = 2.0 * r / (dt * dt);
  cov(3, 3) = 2.0 * r / (dt * dt);
  cov(0, 2) = cov(2, 0) = r / dt;
  cov(1, 3) = cov(3, 1) = r / dt;
  return {kin, cov};
}

// Grid search over process-noise settings, scored by position RMSE of the
// filtered track against ground truth. Small helper for retuning when the
// measurement cadence or noise floor changes.
template <typename TruthSeq>
NoiseConfig tune_noise_grid(const TruthSeq& truth, const std::vector<Measurement>& measurements,
                            const std::vector<double>& q_pos_grid,
                            const std::vector<double>& q_vel_grid, double r_pos) {
  NoiseConfig best;
  best.r_pos = r_pos;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (double qp : q_pos_grid) {
    for (double qv : q_vel_grid) {
      NoiseConfig cand{qp, qv, r_pos};
      auto [kin, cov] = initialize_from_fixes(measurements[0], measurements[1], cand);
      double sum_sq = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 2; i < measurements.size(); ++i) {
        const double dt = measurements[i].t - measurements[i - 1].t;
        std::tie(kin, cov) = cv_predict(kin, cov, dt, cand, ActionState::Approach);
        std::tie(kin, cov) = kalman_update(kin, cov, measurements[i], cand);
        const double ex = kin.x - truth[i].x;
        const double ey = kin.y - truth[i].y;
        sum_sq += ex * ex + ey * ey;
        ++count;
      }
      const double rmse = std::sqrt(sum_sq / static_cast<double>(count));
      if (rmse < best_rmse) {
        best_rmse = rmse;
        best = cand;
      }
    }
  }
  return best;
}

}  // namespace crosswalk
