#include "isac/v2i_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "isac/nr_grid.hpp"
#include "isac/random.hpp"

namespace isac {
namespace {

// Stream tags for per-stage random draws.
constexpr std::uint64_t kTagAccess = 1;
constexpr std::uint64_t kTagConnected = 2;
constexpr std::uint64_t kTagFailure = 3;
constexpr std::uint64_t kTagHandover = 4;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double angle_to(const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
  const Eigen::Vector2d d = to - from;
  return std::atan2(d(1), d(0));
}

long long to_slots(double ms, double slot_ms, const char* what) {
  const double n = ms / slot_ms;
  const auto r = std::llround(n);
  if (std::abs(n - static_cast<double>(r)) > 1e-9)
    throw InvalidParameter(std::string(what) + " must be a whole number of slots");
  return r;
}

Measurement noisy_echo(const Eigen::Vector4d& x, const SensingConfig& s, double t, Rng& rng) {
  Measurement z = observe(x, s.tracker.sensor, t);
  if (!s.noiseless) {
    std::normal_distribution<double> n(0.0, 1.0);
    z.range += s.tracker.sigma_range * n(rng);
    z.angle += s.tracker.sigma_angle * n(rng);
    z.radial_velocity += s.tracker.sigma_velocity * n(rng);
  }
  return z;
}

void require_coverage(const Codebook& cb, const Eigen::Vector2d& gnb, const Eigen::Vector2d& p, double t_ms) {
  const double a = angle_to(gnb, p);
  if (!cb.covers(a)) {
    std::ostringstream os;
    os << "vehicle at (" << p(0) << ", " << p(1) << ") outside the codebook sector at t = " << t_ms << " ms";
    throw CoverageError(os.str());
  }
}

}  // namespace

std::string to_string(Maneuver m) {
  switch (m) {
    case Maneuver::Straight: return "straight";
    case Maneuver::Turn: return "turn";
    case Maneuver::Weave: return "weave";
  }
  return "?";
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::InitialAccess: return "initial_access";
    case Stage::Connected: return "connected";
    case Stage::BeamFailure: return "beam_failure";
    case Stage::Handover: return "handover";
  }
  return "?";
}

std::string to_string(Mode m) { return m == Mode::Baseline ? "baseline" : "sensing_assisted"; }

Maneuver maneuver_from_string(const std::string& s) {
  if (s == "straight") return Maneuver::Straight;
  if (s == "turn") return Maneuver::Turn;
  if (s == "weave") return Maneuver::Weave;
  throw InvalidParameter("unknown maneuver '" + s + "'");
}

void VehicleConfig::validate() const {
  if (!(velocity.norm() > 0.0)) throw InvalidParameter("vehicle: velocity must be nonzero");
  if (maneuver == Maneuver::Turn && !(turn_angle_rad >= 0.0))
    throw InvalidParameter("vehicle: turn_angle_rad must be >= 0");
  if (maneuver == Maneuver::Weave && !(weave_period_s > 0.0))
    throw InvalidParameter("vehicle: weave_period_s must be > 0");
}

Eigen::Vector4d VehicleConfig::state_at(double t) const {
  Eigen::Vector4d x;
  switch (maneuver) {
    case Maneuver::Straight:
      x << position + velocity * t, velocity;
      return x;
    case Maneuver::Weave: {
      const Eigen::Vector2d n = Eigen::Vector2d(-velocity(1), velocity(0)).normalized();
      const double w = kTwoPi / weave_period_s;
      x << position + velocity * t + n * weave_amplitude_m * std::sin(w * t),
          velocity + n * weave_amplitude_m * w * std::cos(w * t);
      return x;
    }
    case Maneuver::Turn: {
      if (t <= turn_start_s || turn_rate == 0.0) {
        x << position + velocity * t, velocity;
        return x;
      }
      const double speed = velocity.norm();
      const double phi0 = std::atan2(velocity(1), velocity(0));
      const double arc_time = turn_angle_rad / std::abs(turn_rate);
      const double tau = std::min(t - turn_start_s, arc_time);
      const Eigen::Vector2d ps = position + velocity * turn_start_s;
      const double phi = phi0 + turn_rate * tau;
      const double r = speed / turn_rate;
      const Eigen::Vector2d p =
          ps + r * Eigen::Vector2d(std::sin(phi) - std::sin(phi0), std::cos(phi0) - std::cos(phi));
      const Eigen::Vector2d v = speed * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      x << p + v * (t - turn_start_s - tau), v;
      return x;
    }
  }
  return x;
}

VehicleConfig intersection_path(Maneuver m) {
  VehicleConfig v;
  v.position = {0.0, -120.0};
  v.velocity = {0.0, 15.0};
  v.maneuver = m;
  if (m == Maneuver::Turn) {
    // Right turn of radius 12 m ending on the eastbound road y = -20.
    const double radius = 12.0;
    v.turn_rate = -15.0 / radius;
    v.turn_start_s = (120.0 - 20.0 - radius) / 15.0;
    v.turn_angle_rad = kPi / 2.0;
  }
  return v;
}

void Codebook::validate() const {
  if (n_beams < 1) throw InvalidParameter("codebook: n_beams must be >= 1");
  if (n_antennas < 1) throw InvalidParameter("codebook: n_antennas must be >= 1");
  if (!(sector_rad > 0.0 && sector_rad < kPi)) throw InvalidParameter("codebook: sector_rad must lie in (0, pi)");
}

double Codebook::spacing_u() const { return 2.0 * std::sin(sector_rad / 2.0) / n_beams; }

double Codebook::beam_u(int i) const { return -std::sin(sector_rad / 2.0) + (i + 0.5) * spacing_u(); }

double Codebook::to_u(double absolute_angle) const {
  return std::sin(std::remainder(absolute_angle - boresight_rad, kTwoPi));
}

bool Codebook::covers(double absolute_angle) const {
  const double off = std::remainder(absolute_angle - boresight_rad, kTwoPi);
  return std::abs(off) <= sector_rad / 2.0 + 1e-12;
}

int Codebook::best_beam(double u) const {
  const double idx = (u + std::sin(sector_rad / 2.0)) / spacing_u() - 0.5;
  return static_cast<int>(std::clamp(std::lround(idx), 0L, static_cast<long>(n_beams - 1)));
}

double Codebook::gain(double u, int i) const {
  const double x = kPi * (u - beam_u(i)) / 2.0;
  const double s = std::sin(x);
  if (std::abs(s) < 1e-15) return 1.0;
  const double num = std::sin(n_antennas * x);
  return (num * num) / (static_cast<double>(n_antennas) * n_antennas * s * s);
}

void V2iScenario::validate() const {
  vehicle.validate();
  gnb.codebook.validate();
  if (timing.n_ssb < 1 || timing.n_ssb > 64) throw InvalidParameter("timing: n_ssb must lie in 1..64");
  if (!(timing.burst_window_ms > 0.0 && timing.burst_window_ms <= timing.ssb_period_ms))
    throw InvalidParameter("timing: burst_window_ms must lie in (0, ssb_period_ms]");
  if (timing.scs_khz != 15 && timing.scs_khz != 30 && timing.scs_khz != 60 && timing.scs_khz != 120)
    throw InvalidParameter("timing: scs_khz must be one of 15, 30, 60, 120");
  if (gnb.codebook.n_beams != timing.n_ssb)
    throw InvalidParameter("timing: n_ssb must equal the codebook size (one SSB per beam)");
  if (initial_access.per_beam_ms < 0.0 || initial_access.fixed_ms < 0.0)
    throw InvalidParameter("initial_access: latency constants must be >= 0");
  const auto& c = connected;
  if (c.base_pilot_fraction < 0.0 || c.csirs_fraction < 0.0 || c.feedback_fraction < 0.0 ||
      c.base_pilot_fraction + c.csirs_fraction + c.feedback_fraction >= 1.0)
    throw InvalidParameter("connected: overhead fractions must be >= 0 and sum below 1");
  if (c.csi_period_slots < 1) throw InvalidParameter("connected: csi_period_slots must be >= 1");
  if (beam_failure.max_count < 1 || beam_failure.sensing_confirm_slots < 1)
    throw InvalidParameter("beam_failure: counters must be >= 1");
  if (handover.cells.size() < 2) throw InvalidParameter("handover: need at least two cells");
  if (!(handover.measurement_period_ms > 0.0)) throw InvalidParameter("handover: measurement_period_ms must be > 0");
  if (handover.lookahead_s < 0.0 || handover.time_to_trigger_ms < 0.0)
    throw InvalidParameter("handover: lookahead_s and time_to_trigger_ms must be >= 0");
}

V2iScenario paper_fr2_120khz() {
  V2iScenario s;
  // Overhead shares of the typical NR slot: DMRS and SRS stay, CSI-RS can go.
  const ResourceGrid g = build_grid(grid_preset("typical-nr-slot"));
  const double total = static_cast<double>(g.size());
  s.connected.base_pilot_fraction = static_cast<double>(g.pilot_count() - g.count(ReLabel::CSIRS)) / total;
  s.connected.csirs_fraction = static_cast<double>(g.count(ReLabel::CSIRS)) / total;
  s.connected.feedback_fraction = 0.03;
  // Sweep calibration: 64 beams -> 15 ms, one beam -> 1.25 ms.
  s.initial_access.per_beam_ms = 13.75 / 63.0;
  s.initial_access.fixed_ms = 1.25 - s.initial_access.per_beam_ms;
  s.sensing.tracker.sigma_range = 0.3;
  s.sensing.tracker.sigma_angle = 0.004;
  s.sensing.tracker.sigma_velocity = 0.1;
  s.sensing.tracker.accel_noise = 4.0;
  return s;
}

double sweep_latency_ms(const InitialAccessConfig& cfg, int n_beams) {
  if (n_beams < 0) throw InvalidParameter("sweep: beam count must be >= 0");
  return cfg.fixed_ms + n_beams * cfg.per_beam_ms;
}

double reduction(double baseline, double sensing) {
  if (!(baseline > 0.0)) throw InvalidParameter("reduction: baseline must be > 0");
  return 1.0 - sensing / baseline;
}

StageResult simulate_initial_access(const V2iScenario& scn, Mode mode) {
  scn.validate();
  const Codebook& cb = scn.gnb.codebook;
  const Eigen::Vector4d x = scn.vehicle.state_at(0.0);
  require_coverage(cb, scn.gnb.position, x.head<2>(), 0.0);
  const double angle = angle_to(scn.gnb.position, x.head<2>());
  const int best = cb.best_beam(cb.to_u(angle));

  StageResult r;
  r.stage = Stage::InitialAccess;
  r.mode = mode;
  int swept = scn.timing.n_ssb;
  bool hit = true;
  if (mode == Mode::SensingAssisted) {
    Rng rng = make_rng(scn.seed, kTagAccess);
    std::normal_distribution<double> n(0.0, 1.0);
    const double sensed = angle + scn.initial_access.angle_sigma_rad * n(rng);
    const double w = scn.initial_access.uncertainty_sigmas * scn.initial_access.angle_sigma_rad;
    const double u_lo = cb.to_u(sensed - w);
    const double u_hi = cb.to_u(sensed + w);
    std::vector<int> cand;
    for (int i = 0; i < cb.n_beams; ++i)
      if (cb.beam_u(i) >= std::min(u_lo, u_hi) && cb.beam_u(i) <= std::max(u_lo, u_hi)) cand.push_back(i);
    if (cand.empty()) cand.push_back(cb.best_beam(cb.to_u(sensed)));
    swept = static_cast<int>(cand.size());
    hit = std::find(cand.begin(), cand.end(), best) != cand.end();
    r.events.push_back({0.0, "sensed_angle", "angle_rad=" + fmt(sensed) + " candidates=" + std::to_string(swept)});
    if (!hit) {
      // Missed the aligned beam; fall back to a full sweep.
      r.events.push_back({sweep_latency_ms(scn.initial_access, swept), "candidate_miss", "fallback to full sweep"});
      swept += scn.timing.n_ssb;
    }
  }
  r.latency_ms = sweep_latency_ms(scn.initial_access, swept);
  r.overhead_fraction = std::min(1.0, r.latency_ms / scn.timing.ssb_period_ms);
  r.throughput_rel = 1.0 - r.overhead_fraction;
  r.metrics["beams_swept"] = swept;
  r.metrics["aligned_beam"] = best;
  r.metrics["hit"] = hit ? 1.0 : 0.0;
  r.events.push_back({r.latency_ms, "aligned", "beam=" + std::to_string(best)});
  return r;
}

StageResult simulate_connected(const V2iScenario& scn, Mode mode, double duration_ms) {
  scn.validate();
  const double slot = scn.timing.slot_ms();
  const auto n_slots = static_cast<long long>(std::floor(duration_ms / slot + 1e-9));
  if (n_slots < 1) throw InvalidParameter("connected: duration must cover at least one slot");
  const Codebook& cb = scn.gnb.codebook;
  const auto& cc = scn.connected;
  const double omitted = cc.csirs_fraction + cc.feedback_fraction;
  const double overhead_base = cc.base_pilot_fraction + cc.csirs_fraction + cc.feedback_fraction;
  // With nothing to omit there is no CSI procedure for sensing to replace.
  const bool sensing = mode == Mode::SensingAssisted && omitted > 0.0;
  const double overhead = sensing ? overhead_base - omitted : overhead_base;
  const double data_frac = 1.0 - overhead;

  SensingConfig sc = scn.sensing;
  sc.tracker.sensor = scn.gnb.position;
  VehicleTracker tracker(sc.tracker);
  int n_meas = 0;
  Rng rng = make_rng(scn.seed, kTagConnected);

  StageResult r;
  r.stage = Stage::Connected;
  r.mode = mode;
  r.overhead_fraction = overhead;
  r.throughput_trace.reserve(static_cast<std::size_t>(n_slots));

  auto link_snr = [&](const Eigen::Vector2d& p, double u, int beam) {
    const double d = std::max((p - scn.gnb.position).norm(), 1.0);
    return from_db(scn.link.snr_ref_db) * std::pow(scn.link.ref_distance_m / d, scn.link.pathloss_exponent) *
           cb.gain(u, beam);
  };
  auto se = [&](double snr) { return std::min(std::log2(1.0 + snr), scn.link.se_cap); };

  int beam = -1;
  double sum = 0.0, sum_ref = 0.0, sum_aligned = 0.0;
  bool maneuver_logged = false;
  for (long long i = 0; i < n_slots; ++i) {
    const double t_ms = static_cast<double>(i) * slot;
    const double t = t_ms / 1000.0;
    const Eigen::Vector4d x = scn.vehicle.state_at(t);
    require_coverage(cb, scn.gnb.position, x.head<2>(), t_ms);
    const double u = cb.to_u(angle_to(scn.gnb.position, x.head<2>()));
    const int ideal = cb.best_beam(u);

    int next = beam;
    if (i == 0) {
      next = ideal;  // both modes start from the initial-access beam
    } else if (!sensing) {
      if (i % cc.csi_period_slots == 0) next = ideal;
    } else if (n_meas >= 2) {
      const Eigen::Vector4d xp = tracker.predict_at(t);
      next = cb.best_beam(cb.to_u(angle_to(scn.gnb.position, xp.head<2>())));
    }
    if (next != beam) {
      r.events.push_back({t_ms, "beam_switch", std::to_string(beam) + "->" + std::to_string(next)});
      beam = next;
    }

    const double s = se(link_snr(x.head<2>(), u, beam));
    const double s_ref = se(link_snr(x.head<2>(), u, ideal));
    r.throughput_trace.push_back(data_frac * s);
    sum += data_frac * s;
    sum_ref += s_ref;
    sum_aligned += beam == ideal ? 1.0 : 0.0;

    if (sensing) {
      const auto& st = tracker.update(noisy_echo(x, sc, t, rng));
      ++n_meas;
      if (st.maneuver && !maneuver_logged) {
        r.events.push_back({t_ms, "maneuver", "innovation gate exceeded"});
        maneuver_logged = true;
      }
    }
  }
  r.throughput_rel = sum / sum_ref;
  r.latency_ms = sensing ? slot : cc.csi_period_slots * slot;
  r.metrics["aligned_fraction"] = sum_aligned / static_cast<double>(n_slots);
  r.metrics["slots"] = static_cast<double>(n_slots);
  r.metrics["omitted_fraction"] = sensing ? omitted : 0.0;
  return r;
}

StageResult simulate_beam_failure(const V2iScenario& scn, Mode mode, std::optional<BlockageEvent> blockage) {
  scn.validate();
  const auto& bf = scn.beam_failure;
  const double slot = scn.timing.slot_ms();
  const long long total = to_slots(bf.window_ms, slot, "beam_failure.window_ms");
  long long block_slot = -1;
  if (blockage) {
    block_slot = to_slots(blockage->start_ms, slot, "blockage start");
    if (block_slot < 0 || block_slot >= total) throw InvalidParameter("beam_failure: blockage outside the window");
  }
  const bool baseline = mode == Mode::Baseline;
  const long long period = baseline ? to_slots(bf.bfd_period_ms, slot, "beam_failure.bfd_period_ms") : 1;
  const int needed = baseline ? bf.max_count : bf.sensing_confirm_slots;

  Rng rng = make_rng(scn.seed, kTagFailure);
  std::normal_distribution<double> n(0.0, bf.measurement_sigma_db);

  StageResult r;
  r.stage = Stage::BeamFailure;
  r.mode = mode;
  if (blockage) r.events.push_back({static_cast<double>(block_slot) * slot, "blockage", "link blocked"});

  int count = 0;
  long long declared = -1;
  // An indication at slot j covers (j - period, j]; it sees the blockage once j > block start.
  for (long long j = period; j <= total; j += period) {
    const bool blocked = block_slot >= 0 && j > block_slot;
    const double level = bf.nominal_rsrp_db - (blocked ? bf.blockage_loss_db : 0.0) + n(rng);
    count = level < bf.threshold_db ? count + 1 : 0;
    if (count >= needed) {
      declared = j;
      break;
    }
  }

  const double recovery = baseline ? bf.baseline_recovery_ms : slot;
  r.metrics["declared"] = declared >= 0 ? 1.0 : 0.0;
  r.metrics["false_alarm"] = declared >= 0 && (block_slot < 0 || declared <= block_slot) ? 1.0 : 0.0;
  r.overhead_fraction = 0.0;
  if (declared >= 0 && block_slot >= 0 && declared > block_slot) {
    const double detection = static_cast<double>(declared - block_slot) * slot;
    r.latency_ms = detection;
    r.metrics["detection_ms"] = detection;
    r.metrics["recovery_ms"] = recovery;
    r.metrics["outage_ms"] = detection + recovery;
    r.throughput_rel = std::max(0.0, 1.0 - (detection + recovery) / bf.window_ms);
    r.events.push_back({static_cast<double>(declared) * slot, "failure_declared",
                        baseline ? "BFD counter reached " + std::to_string(needed)
                                 : "echo anomaly confirmed over " + std::to_string(needed) + " slots"});
    r.events.push_back({static_cast<double>(declared) * slot + recovery, "recovered",
                        baseline ? "candidate beam search" : "precomputed candidate beam"});
  } else if (declared >= 0) {
    r.events.push_back({static_cast<double>(declared) * slot, "false_alarm", "failure declared without blockage"});
  }
  return r;
}

StageResult simulate_handover(const V2iScenario& scn, Mode mode) {
  scn.validate();
  const auto& hc = scn.handover;
  hc.vehicle.validate();
  const double dt_ms = hc.measurement_period_ms;
  const auto steps = static_cast<long long>(std::floor(hc.duration_s * 1000.0 / dt_ms + 1e-9));

  auto power_db = [&](const Eigen::Vector2d& p, std::size_t c) {
    const double d = std::max((p - hc.cells[c]).norm(), 1.0);
    return -10.0 * hc.pathloss_exponent * std::log10(d);
  };
  auto strongest = [&](const Eigen::Vector2d& p) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < hc.cells.size(); ++c)
      if (power_db(p, c) > power_db(p, best)) best = c;
    return best;
  };

  StageResult r;
  r.stage = Stage::Handover;
  r.mode = mode;
  const std::size_t serving = strongest(hc.vehicle.state_at(0.0).head<2>());

  long long cross = -1;
  std::size_t target = serving;
  for (long long i = 0; i <= steps; ++i) {
    const std::size_t c = strongest(hc.vehicle.state_at(static_cast<double>(i) * dt_ms / 1000.0).head<2>());
    if (c != serving) {
      cross = i;
      target = c;
      break;
    }
  }
  r.metrics["serving_cell"] = static_cast<double>(serving);
  if (cross < 0) {
    r.metrics["handover"] = 0.0;
    r.events.push_back({0.0, "no_handover", "path stays in the serving cell"});
    return r;
  }
  const double t_cross = static_cast<double>(cross) * dt_ms;
  r.metrics["handover"] = 1.0;
  r.metrics["target_cell"] = static_cast<double>(target);
  r.metrics["crossing_ms"] = t_cross;

  Rng rng = make_rng(scn.seed, kTagHandover);
  std::normal_distribution<double> n(0.0, 1.0);
  SensingConfig sc = scn.sensing;
  sc.tracker.sensor = hc.cells[serving];
  VehicleTracker tracker(sc.tracker);

  // Reactive A3 procedure; the sensing mode falls back to it on a wrong prediction.
  long long a3_start = -1;
  std::size_t a3_cell = serving;
  long long trigger = -1;
  std::size_t trigger_cell = serving;
  // Predictive preparation state.
  long long prepared_at = -1;
  std::size_t prepared = serving;
  bool maneuver_logged = false;
  const bool sensing = mode == Mode::SensingAssisted;

  for (long long i = 0; i <= steps && (trigger < 0 || (sensing && i <= cross)); ++i) {
    const double t_ms = static_cast<double>(i) * dt_ms;
    const Eigen::Vector4d x = hc.vehicle.state_at(t_ms / 1000.0);

    if (sensing && i <= cross) {
      const auto& st = tracker.update(noisy_echo(x, sc, t_ms / 1000.0, rng));
      if (st.maneuver && !maneuver_logged) {
        r.events.push_back({t_ms, "maneuver", "innovation gate exceeded"});
        maneuver_logged = true;
      }
      if (i >= 1) {
        const std::size_t pred = strongest(tracker.predict_position(hc.lookahead_s));
        if (pred != serving && pred != prepared) {
          prepared = pred;
          prepared_at = i;
          r.events.push_back({t_ms, "prepare", "cell=" + std::to_string(pred)});
        }
      }
    }

    if (trigger < 0) {
      std::vector<double> meas(hc.cells.size());
      for (std::size_t c = 0; c < hc.cells.size(); ++c) meas[c] = power_db(x.head<2>(), c) + hc.rsrp_sigma_db * n(rng);
      std::size_t best_nb = serving;
      for (std::size_t c = 0; c < hc.cells.size(); ++c)
        if (c != serving && (best_nb == serving || meas[c] > meas[best_nb])) best_nb = c;
      if (meas[best_nb] > meas[serving] + hc.hysteresis_db) {
        if (a3_start < 0 || a3_cell != best_nb) {
          a3_start = i;
          a3_cell = best_nb;
        }
        if (static_cast<double>(i - a3_start) * dt_ms >= hc.time_to_trigger_ms) {
          trigger = i;
          trigger_cell = best_nb;
          if (!sensing) r.events.push_back({t_ms, "a3_trigger", "cell=" + std::to_string(best_nb)});
        }
      } else {
        a3_start = -1;
      }
    }
  }

  r.events.push_back({t_cross, "boundary_crossing", "cell=" + std::to_string(target)});
  auto interruption = [&](double lead_ms) { return hc.execution_ms + std::max(0.0, hc.preparation_ms - lead_ms); };

  double lead = 0.0;
  bool success = false;
  std::size_t chosen = serving;
  if (sensing && prepared_at >= 0 && prepared == target) {
    chosen = prepared;
    lead = t_cross - static_cast<double>(prepared_at) * dt_ms;
    success = lead >= hc.preparation_ms;
    r.latency_ms = interruption(lead);
  } else if (trigger >= 0) {
    chosen = trigger_cell;
    lead = t_cross - static_cast<double>(trigger) * dt_ms;
    success = trigger_cell == target && lead >= hc.preparation_ms;
    r.latency_ms = interruption(lead);
    if (sensing)
      r.events.push_back({static_cast<double>(trigger) * dt_ms, "a3_fallback", "cell=" + std::to_string(trigger_cell)});
  } else {
    // No trigger inside the horizon: the link is lost from the crossing onward.
    lead = t_cross - hc.duration_s * 1000.0;
    r.latency_ms = interruption(lead);
  }
  if (sensing && prepared_at >= 0) r.metrics["prepared_ms"] = static_cast<double>(prepared_at) * dt_ms;
  if (trigger >= 0) r.metrics["a3_trigger_ms"] = static_cast<double>(trigger) * dt_ms;
  r.metrics["selected_cell"] = static_cast<double>(chosen);
  r.metrics["lead_ms"] = lead;
  r.metrics["prepared_before_crossing"] = success ? 1.0 : 0.0;
  r.metrics["interruption_ms"] = r.latency_ms;
  r.throughput_rel = std::max(0.0, 1.0 - r.latency_ms / (hc.duration_s * 1000.0));
  std::stable_sort(r.events.begin(), r.events.end(), [](const Event& a, const Event& b) { return a.t_ms < b.t_ms; });
  return r;
}

}  // namespace isac
