#include "isac/tracking.hpp"

#include <cmath>

#include "isac/common.hpp"

namespace isac {
namespace {

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a;
}

Eigen::Vector2d to_position(const Measurement& z, const Eigen::Vector2d& sensor) {
  return sensor + z.range * Eigen::Vector2d(std::cos(z.angle), std::sin(z.angle));
}

Eigen::Matrix2d position_covariance(const Measurement& z, const TrackerConfig& cfg) {
  Eigen::Matrix2d j;
  j << std::cos(z.angle), -z.range * std::sin(z.angle), std::sin(z.angle), z.range * std::cos(z.angle);
  const Eigen::Vector2d var(cfg.sigma_range * cfg.sigma_range, cfg.sigma_angle * cfg.sigma_angle);
  return j * var.asDiagonal() * j.transpose();
}

}  // namespace

Eigen::Vector3d measurement_model(const Eigen::Vector4d& x, const Eigen::Vector2d& sensor) {
  const double dx = x(0) - sensor(0);
  const double dy = x(1) - sensor(1);
  const double r = std::hypot(dx, dy);
  const double rdot = r > 0.0 ? (dx * x(2) + dy * x(3)) / r : 0.0;
  return {r, std::atan2(dy, dx), rdot};
}

Measurement observe(const Eigen::Vector4d& x, const Eigen::Vector2d& sensor, double t) {
  const Eigen::Vector3d h = measurement_model(x, sensor);
  return {t, h(0), h(1), h(2)};
}

VehicleTracker::VehicleTracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
  if (!(cfg_.sigma_range > 0.0 && cfg_.sigma_angle > 0.0 && cfg_.sigma_velocity > 0.0))
    throw InvalidParameter("tracker: measurement sigmas must be > 0");
  if (!(cfg_.accel_noise >= 0.0)) throw InvalidParameter("tracker: accel_noise must be >= 0");
  if (cfg_.maneuver_confirm < 1) throw InvalidParameter("tracker: maneuver_confirm must be >= 1");
  if (cfg_.bias_window < 1) throw InvalidParameter("tracker: bias_window must be >= 1");
  if (!(cfg_.bias_gate > 0.0)) throw InvalidParameter("tracker: bias_gate must be > 0");
}

Eigen::Matrix4d VehicleTracker::process_noise(double dt, double scale) const {
  const double q = cfg_.accel_noise * scale;
  const double a = dt * dt * dt / 3.0 * q;
  const double b = dt * dt / 2.0 * q;
  const double c = dt * q;
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  Q(0, 0) = Q(1, 1) = a;
  Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = b;
  Q(2, 2) = Q(3, 3) = c;
  return Q;
}

void VehicleTracker::initialize(const Measurement& first, const Measurement& second) {
  const double dt = second.t - first.t;
  const Eigen::Vector2d p1 = to_position(first, cfg_.sensor);
  const Eigen::Vector2d p2 = to_position(second, cfg_.sensor);
  const Eigen::Matrix2d r1 = position_covariance(first, cfg_);
  const Eigen::Matrix2d r2 = position_covariance(second, cfg_);
  KinematicState s;
  s.t = second.t;
  s.x << p2, (p2 - p1) / dt;
  s.P.setZero();
  s.P.topLeftCorner<2, 2>() = r2;
  s.P.topRightCorner<2, 2>() = r2 / dt;
  s.P.bottomLeftCorner<2, 2>() = r2 / dt;
  s.P.bottomRightCorner<2, 2>() = (r1 + r2) / (dt * dt);
  state_ = s;
}

const KinematicState& VehicleTracker::update(const Measurement& z) {
  if (!state_) {
    // Single-point state: radial velocity only, tangential component unknown.
    first_ = z;
    KinematicState s;
    s.t = z.t;
    const Eigen::Vector2d u(std::cos(z.angle), std::sin(z.angle));
    s.x << to_position(z, cfg_.sensor), z.radial_velocity * u;
    s.P.setZero();
    s.P.topLeftCorner<2, 2>() = position_covariance(z, cfg_);
    s.P.bottomRightCorner<2, 2>() = Eigen::Matrix2d::Identity() * 1e4;
    state_ = s;
    return *state_;
  }
  if (first_) {
    const Measurement f = *first_;
    first_.reset();
    if (!(z.t > f.t)) throw InvalidParameter("tracker: observations must be strictly increasing in time");
    initialize(f, z);
    return *state_;
  }

  KinematicState& s = *state_;
  const double dt = z.t - s.t;
  if (!(dt > 0.0)) throw InvalidParameter("tracker: observations must be strictly increasing in time");

  Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
  F(0, 2) = F(1, 3) = dt;
  const Eigen::Vector4d xp = F * s.x;
  const Eigen::Matrix4d Pbase = F * s.P * F.transpose();

  const double dx = xp(0) - cfg_.sensor(0);
  const double dy = xp(1) - cfg_.sensor(1);
  const double r2 = dx * dx + dy * dy;
  const double r = std::sqrt(r2);
  const double cross = xp(2) * dy - xp(3) * dx;
  Eigen::Matrix<double, 3, 4> H;
  H << dx / r, dy / r, 0, 0,
       -dy / r2, dx / r2, 0, 0,
       dy * cross / (r2 * r), -dx * cross / (r2 * r), dx / r, dy / r;
  const Eigen::Vector3d R(cfg_.sigma_range * cfg_.sigma_range, cfg_.sigma_angle * cfg_.sigma_angle,
                          cfg_.sigma_velocity * cfg_.sigma_velocity);

  Eigen::Vector3d nu = Eigen::Vector3d(z.range, z.angle, z.radial_velocity) - measurement_model(xp, cfg_.sensor);
  nu(1) = wrap_angle(nu(1));

  auto gain_step = [&](double scale, Eigen::Matrix3d& S) {
    const Eigen::Matrix4d Pp = Pbase + process_noise(dt, scale);
    S = H * Pp * H.transpose();
    S.diagonal() += R;
    return Pp;
  };

  Eigen::Matrix3d S;
  Eigen::Matrix4d Pp = gain_step(1.0, S);
  bool exceeded = false;
  Eigen::Vector3d normalized;
  for (int i = 0; i < 3; ++i) {
    normalized(i) = nu(i) / std::sqrt(S(i, i));
    exceeded = exceeded || std::abs(normalized(i)) > cfg_.maneuver_gate;
  }
  // Sustained bias: a turn shifts the innovations by less than the per-update gate.
  recent_.push_back(normalized);
  if (recent_.size() > static_cast<std::size_t>(cfg_.bias_window)) recent_.pop_front();
  if (recent_.size() == static_cast<std::size_t>(cfg_.bias_window)) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& v : recent_) mean += v;
    mean /= static_cast<double>(cfg_.bias_window);
    const double scale = std::sqrt(static_cast<double>(cfg_.bias_window));
    exceeded = exceeded || mean.cwiseAbs().maxCoeff() * scale > cfg_.bias_gate;
  }
  gate_run_ = exceeded ? gate_run_ + 1 : 0;
  const bool maneuver = gate_run_ >= cfg_.maneuver_confirm;
  if (maneuver) Pp = gain_step(cfg_.maneuver_inflation, S);

  const Eigen::Matrix<double, 4, 3> K = Pp * H.transpose() * S.inverse();
  s.t = z.t;
  s.x = xp + K * nu;
  const Eigen::Matrix4d I_KH = Eigen::Matrix4d::Identity() - K * H;
  // Joseph form keeps P symmetric positive semi-definite.
  s.P = I_KH * Pp * I_KH.transpose() + K * R.asDiagonal() * K.transpose();
  s.innovation = nu;
  s.nis = nu.dot(S.ldlt().solve(nu));
  s.gate_exceeded = exceeded;
  s.maneuver = maneuver;
  return s;
}

Eigen::Vector4d VehicleTracker::predict_at(double t) const {
  if (!state_) throw InvalidParameter("tracker: no state yet");
  const double dt = t - state_->t;
  Eigen::Vector4d x = state_->x;
  x(0) += dt * x(2);
  x(1) += dt * x(3);
  return x;
}

Eigen::Vector2d VehicleTracker::predict_position(double horizon) const {
  const Eigen::Vector4d x = predict_at(state().t + horizon);
  return x.head<2>();
}

std::vector<KinematicState> track_vehicle(std::span<const Measurement> observations, const TrackerConfig& cfg) {
  if (observations.empty()) throw InvalidParameter("track_vehicle: need at least one observation");
  VehicleTracker tracker(cfg);
  std::vector<KinematicState> out;
  out.reserve(observations.size());
  for (const auto& z : observations) out.push_back(tracker.update(z));
  return out;
}

}  // namespace isac
