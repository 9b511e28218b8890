#include "ptrack/motion.hpp"

#include <cmath>

#include <Eigen/LU>

#include "ptrack/error.hpp"

namespace ptrack {

namespace {

Eigen::Matrix4d transition() {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = 1.0;
  f(1, 3) = 1.0;
  return f;
}

void symmetrize(Eigen::Matrix4d& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace

void MotionConfig::validate() const {
  if (!(process_noise_pos > 0.0) || !(process_noise_vel > 0.0) || !(measurement_noise > 0.0) ||
      !(initial_pos_var > 0.0) || !(initial_vel_var > 0.0)) {
    throw Error(Errc::Config, "motion noise parameters must be strictly positive");
  }
}

KalmanState init_state(const Point& measurement, const MotionConfig& config) {
  if (!is_finite(measurement)) {
    throw Error(Errc::InvalidMeasurement, "non-finite measurement");
  }
  KalmanState s;
  s.mean << measurement.x, measurement.y, 0.0, 0.0;
  s.covariance = Eigen::Vector4d(config.initial_pos_var, config.initial_pos_var,
                                 config.initial_vel_var, config.initial_vel_var)
                     .asDiagonal();
  return s;
}

KalmanState predict(const KalmanState& state, const MotionConfig& config) {
  const Eigen::Matrix4d f = transition();
  const Eigen::Vector4d q(config.process_noise_pos, config.process_noise_pos,
                          config.process_noise_vel, config.process_noise_vel);
  KalmanState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose();
  out.covariance.diagonal() += q;
  symmetrize(out.covariance);
  return out;
}

KalmanState update(const KalmanState& state, const Point& measurement,
                   const MotionConfig& config) {
  if (!is_finite(measurement)) {
    throw Error(Errc::InvalidMeasurement, "non-finite measurement");
  }
  const Eigen::Matrix4d& p = state.covariance;
  // H selects the position block, so H P H^T and P H^T are sub-blocks of P.
  Eigen::Matrix2d s = p.topLeftCorner<2, 2>();
  s.diagonal().array() += config.measurement_noise;
  const double det = s.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw Error(Errc::Numeric, "singular innovation covariance");
  }
  const Eigen::Matrix<double, 4, 2> gain = p.leftCols<2>() * s.inverse();
  const Eigen::Vector2d innovation(measurement.x - state.mean(0), measurement.y - state.mean(1));

  KalmanState out;
  out.mean = state.mean + gain * innovation;
  // Joseph form keeps the posterior PSD under round-off.
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * h;
  out.covariance = ikh * p * ikh.transpose() +
                   config.measurement_noise * gain * gain.transpose();
  symmetrize(out.covariance);
  return out;
}

KalmanState apply_affine(const KalmanState& state, const AffineTransform& t) {
  if (!t.is_valid()) {
    throw Error(Errc::DegenerateTransform, "affine linear part is degenerate");
  }
  const Eigen::Matrix2d m = t.linear();
  Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
  j.topLeftCorner<2, 2>() = m;
  j.bottomRightCorner<2, 2>() = m;

  KalmanState out;
  out.mean = j * state.mean;
  out.mean(0) += t.t1;
  out.mean(1) += t.t2;
  out.covariance = j * state.covariance * j.transpose();
  symmetrize(out.covariance);
  return out;
}

}  // namespace ptrack
