#include <cmath>
#include <random>

#include "doctest.h"
#include "isac/random.hpp"
#include "isac/tracking.hpp"
#include "isac/v2i_sim.hpp"

using namespace isac;

namespace {

Measurement noisy(const Eigen::Vector4d& x, const TrackerConfig& cfg, double t, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Measurement z = observe(x, cfg.sensor, t);
  z.range += cfg.sigma_range * n(rng);
  z.angle += cfg.sigma_angle * n(rng);
  z.radial_velocity += cfg.sigma_velocity * n(rng);
  return z;
}

}  // namespace

TEST_CASE("noiseless straight line is tracked exactly") {
  VehicleConfig v;
  v.position = {-40.0, 30.0};
  v.velocity = {20.0, 3.0};
  VehicleTracker tracker;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.01 * i;
    tracker.update(observe(v.state_at(t), Eigen::Vector2d::Zero(), t));
  }
  const double t_last = 0.49;
  for (double h : {0.0, 0.5, 2.0}) {
    const Eigen::Vector2d truth = v.state_at(t_last + h).head<2>();
    CHECK((tracker.predict_position(h) - truth).norm() < 1e-6);
  }
}

TEST_CASE("filtered position beats raw measurements") {
  TrackerConfig cfg;
  VehicleConfig v;
  v.position = {-40.0, 30.0};
  v.velocity = {20.0, 0.0};
  double se_filter = 0.0, se_raw = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(7, seed));
    VehicleTracker tracker(cfg);
    for (int i = 0; i < 200; ++i) {
      const double t = 0.01 * i;
      const Eigen::Vector4d x = v.state_at(t);
      const Measurement z = noisy(x, cfg, t, rng);
      const auto& st = tracker.update(z);
      if (i < 100) continue;
      const Eigen::Vector2d raw = cfg.sensor + z.range * Eigen::Vector2d(std::cos(z.angle), std::sin(z.angle));
      se_filter += (st.x.head<2>() - x.head<2>()).squaredNorm();
      se_raw += (raw - x.head<2>()).squaredNorm();
      ++count;
    }
  }
  const double rmse_filter = std::sqrt(se_filter / count);
  const double rmse_raw = std::sqrt(se_raw / count);
  CHECK(rmse_filter < rmse_raw);
  CHECK(rmse_filter < cfg.sigma_range);
}

TEST_CASE("a turn is flagged by innovation monitoring") {
  TrackerConfig cfg;
  cfg.sigma_range = 0.1;
  cfg.sigma_angle = 0.002;
  cfg.sigma_velocity = 0.05;
  VehicleConfig v;
  v.position = {-40.0, 30.0};
  v.velocity = {20.0, 0.0};
  v.maneuver = Maneuver::Turn;
  v.turn_rate = 0.8;
  v.turn_start_s = 1.0;
  Rng rng(11);
  VehicleTracker tracker(cfg);
  bool before = false, after = false;
  for (int i = 0; i < 250; ++i) {
    const double t = 0.01 * i;
    const auto& st = tracker.update(noisy(v.state_at(t), cfg, t, rng));
    if (t < 1.0) before = before || st.maneuver;
    else after = after || st.maneuver;
  }
  CHECK_FALSE(before);
  CHECK(after);
}

TEST_CASE("track_vehicle returns one state per observation") {
  VehicleConfig v;
  std::vector<Measurement> obs;
  for (int i = 0; i < 5; ++i) obs.push_back(observe(v.state_at(0.1 * i), Eigen::Vector2d::Zero(), 0.1 * i));
  const auto states = track_vehicle(obs);
  CHECK(states.size() == obs.size());
  CHECK_THROWS_AS(track_vehicle(std::span<const Measurement>{}), InvalidParameter);
}
