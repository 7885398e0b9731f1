#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isac/common.hpp"
#include "isac/tracking.hpp"

namespace isac {

enum class Maneuver { Straight, Turn, Weave };
enum class Stage { InitialAccess, Connected, BeamFailure, Handover };
enum class Mode { Baseline, SensingAssisted };

std::string to_string(Maneuver m);
std::string to_string(Stage s);
std::string to_string(Mode m);
Maneuver maneuver_from_string(const std::string& s);

/// Vehicle kinematics. Turn: straight until turn_start_s, then a circular
/// arc at turn_rate until the heading has changed by turn_angle_rad.
/// Weave: sinusoidal lateral offset around the straight path.
struct VehicleConfig {
  Eigen::Vector2d position{-15.0, 12.0};
  Eigen::Vector2d velocity{25.0, 0.0};
  Maneuver maneuver = Maneuver::Straight;
  double turn_rate = 0.0;  // rad/s, positive counter-clockwise
  double turn_start_s = 0.0;
  double turn_angle_rad = kPi / 2.0;
  double weave_amplitude_m = 0.0;
  double weave_period_s = 1.0;

  /// [px, py, vx, vy] at time t (s).
  Eigen::Vector4d state_at(double t) const;
  void validate() const;
};

/// DFT beam codebook of a half-wavelength ULA, beams uniformly spaced in
/// u = sin(angle off boresight) across the sector.
struct Codebook {
  int n_beams = 64;
  int n_antennas = 64;
  double sector_rad = 2.0 * kPi / 3.0;
  double boresight_rad = kPi / 2.0;  // absolute direction of broadside

  void validate() const;
  double beam_u(int i) const;
  double spacing_u() const;
  /// sin of the angle between boresight and the direction `absolute_angle`.
  double to_u(double absolute_angle) const;
  bool covers(double absolute_angle) const;
  int best_beam(double u) const;
  /// Array gain toward u with beam i, normalized so the peak equals 1.
  double gain(double u, int i) const;
};

struct GnbConfig {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Codebook codebook;
};

struct TimingConfig {
  int scs_khz = 120;
  double ssb_period_ms = 20.0;
  double burst_window_ms = 5.0;
  int n_ssb = 64;

  double slot_ms() const { return 15.0 / scs_khz; }
};

struct LinkConfig {
  double snr_ref_db = 20.0;       // aligned-beam SNR at ref_distance_m
  double ref_distance_m = 20.0;
  double pathloss_exponent = 2.0;
  double se_cap = 7.6;            // bit/s/Hz
};

struct SensingConfig {
  TrackerConfig tracker;   // sigmas drive both the filter and the echo noise
  bool noiseless = false;  // echo measurements without noise
};

/// latency(n) = fixed_ms + n * per_beam_ms for a sweep over n beams.
struct InitialAccessConfig {
  double fixed_ms = 1.25 - 13.75 / 63.0;
  double per_beam_ms = 13.75 / 63.0;
  double angle_sigma_rad = 0.0;   // sensed-angle error
  double uncertainty_sigmas = 3.0;
};

struct ConnectedConfig {
  double base_pilot_fraction = 0.0;  // pilots kept in both modes
  double csirs_fraction = 0.0;       // CSI-RS share omitted with sensing
  double feedback_fraction = 0.0;    // uplink CSI feedback share omitted with sensing
  int csi_period_slots = 160;
  double duration_ms = 1000.0;
};

struct BeamFailureConfig {
  double bfd_period_ms = 1.25;  // baseline indication period
  int max_count = 4;            // consecutive failed indications
  int sensing_confirm_slots = 20;
  double nominal_rsrp_db = 20.0;
  double threshold_db = 10.0;
  double measurement_sigma_db = 1.5;
  double blockage_loss_db = 25.0;
  double baseline_recovery_ms = 10.0;  // candidate beam search + random access
  double window_ms = 100.0;
};

/// Intersection geometry used by the handover stage: the vehicle heads north
/// along x = 0 and either continues straight or turns east onto y = -20.
VehicleConfig intersection_path(Maneuver m);

struct BlockageEvent {
  double start_ms = 20.0;
};

struct HandoverConfig {
  std::vector<Eigen::Vector2d> cells{{-40.0, -150.0}, {-40.0, 150.0}, {200.0, 40.0}};
  VehicleConfig vehicle = intersection_path(Maneuver::Turn);
  double measurement_period_ms = 5.0;
  double rsrp_sigma_db = 1.0;
  double hysteresis_db = 3.0;
  double time_to_trigger_ms = 160.0;
  double lookahead_s = 2.0;
  double preparation_ms = 50.0;
  double execution_ms = 20.0;
  double duration_s = 14.0;
  double pathloss_exponent = 3.0;
};

struct V2iScenario {
  VehicleConfig vehicle;
  GnbConfig gnb;
  TimingConfig timing;
  LinkConfig link;
  SensingConfig sensing;
  InitialAccessConfig initial_access;
  ConnectedConfig connected;
  BeamFailureConfig beam_failure;
  HandoverConfig handover;
  std::uint64_t seed = 1;

  void validate() const;
};

/// FR2 preset: 120 kHz, 64 SSB beams, 20 ms SSB period, 5 ms burst window.
/// Overhead fractions come from the typical NR slot grid.
V2iScenario paper_fr2_120khz();

struct Event {
  double t_ms = 0.0;
  std::string type;
  std::string detail;
};

struct StageResult {
  Stage stage = Stage::InitialAccess;
  Mode mode = Mode::Baseline;
  double latency_ms = 0.0;
  double overhead_fraction = 0.0;
  double throughput_rel = 1.0;
  std::vector<Event> events;
  std::map<std::string, double> metrics;
  RVec throughput_trace;  // connected stage: per-slot rate (bit/s/Hz)
};

StageResult simulate_initial_access(const V2iScenario& scn, Mode mode);
StageResult simulate_connected(const V2iScenario& scn, Mode mode, double duration_ms);
StageResult simulate_beam_failure(const V2iScenario& scn, Mode mode, std::optional<BlockageEvent> blockage);
StageResult simulate_handover(const V2iScenario& scn, Mode mode);

/// Initial-access sweep latency for n beams.
double sweep_latency_ms(const InitialAccessConfig& cfg, int n_beams);

/// 1 - sensing / baseline.
double reduction(double baseline, double sensing);

}  // namespace isac
