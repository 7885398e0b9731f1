#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace isac {

/// Monostatic radar observation of a vehicle relative to the sensor.
struct Measurement {
  double t = 0.0;                // s
  double range = 0.0;            // m
  double angle = 0.0;            // rad, atan2(dy, dx)
  double radial_velocity = 0.0;  // m/s, positive when receding
};

struct TrackerConfig {
  Eigen::Vector2d sensor = Eigen::Vector2d::Zero();
  double sigma_range = 0.5;
  double sigma_angle = 0.005;
  double sigma_velocity = 0.2;
  double accel_noise = 0.5;        // white-acceleration spectral density, m^2/s^3
  double maneuver_gate = 3.0;      // per-component innovation gate in sigmas
  int maneuver_confirm = 2;        // consecutive gate hits before flagging
  int bias_window = 10;            // updates averaged by the innovation-bias test
  double bias_gate = 4.0;          // window-mean gate in sigmas of the mean
  double maneuver_inflation = 400.0;  // process-noise multiplier while flagged
};

/// State [px, py, vx, vy] with covariance at time t.
struct KinematicState {
  double t = 0.0;
  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
  Eigen::Vector3d innovation = Eigen::Vector3d::Zero();
  double nis = 0.0;
  bool gate_exceeded = false;
  bool maneuver = false;
};

Eigen::Vector3d measurement_model(const Eigen::Vector4d& x, const Eigen::Vector2d& sensor);
Measurement observe(const Eigen::Vector4d& x, const Eigen::Vector2d& sensor, double t);

/// Constant-velocity extended Kalman filter with two-point initialization
/// and innovation-based maneuver monitoring.
class VehicleTracker {
 public:
  explicit VehicleTracker(TrackerConfig cfg = {});

  /// Returns the filtered state after the measurement.
  const KinematicState& update(const Measurement& z);

  bool has_state() const { return state_.has_value(); }
  const KinematicState& state() const { return *state_; }

  /// State extrapolated under constant velocity to absolute time t.
  Eigen::Vector4d predict_at(double t) const;

  /// Position `horizon` seconds after the last update.
  Eigen::Vector2d predict_position(double horizon) const;

 private:
  Eigen::Matrix4d process_noise(double dt, double scale) const;
  void initialize(const Measurement& first, const Measurement& second);

  TrackerConfig cfg_;
  std::optional<Measurement> first_;
  std::optional<KinematicState> state_;
  int gate_run_ = 0;
  std::deque<Eigen::Vector3d> recent_;  // normalized innovations, newest last
};

std::vector<KinematicState> track_vehicle(std::span<const Measurement> observations, const TrackerConfig& cfg = {});

}  // namespace isac
