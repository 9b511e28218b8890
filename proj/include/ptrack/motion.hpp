#pragma once

#include <Eigen/Core>

#include "ptrack/cmc.hpp"
#include "ptrack/geometry.hpp"

namespace ptrack {

/// Constant-velocity point state [x, y, vx, vy] in px and px/frame.
struct KalmanState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();

  Point position() const { return {mean(0), mean(1)}; }
  Point velocity() const { return {mean(2), mean(3)}; }
};

struct MotionConfig {
  double process_noise_pos = 1.0;   // px^2 per frame
  double process_noise_vel = 0.25;  // px^2/frame^2 per frame
  double measurement_noise = 1.0;   // px^2
  double initial_pos_var = 10.0;    // px^2
  double initial_vel_var = 100.0;   // px^2/frame^2

  /// Throws Errc::Config unless every entry is strictly positive.
  void validate() const;
};

KalmanState init_state(const Point& measurement, const MotionConfig& config);

/// One-frame constant-velocity prediction: F P F^T + Q.
KalmanState predict(const KalmanState& state, const MotionConfig& config);

/// Kalman correction with a position measurement and R = measurement_noise * I.
KalmanState update(const KalmanState& state, const Point& measurement,
                   const MotionConfig& config);

/// Maps the state through a camera affine: position M p + b, velocity M v,
/// covariance J P J^T with J = blockdiag(M, M).
KalmanState apply_affine(const KalmanState& state, const AffineTransform& t);

}  // namespace ptrack
