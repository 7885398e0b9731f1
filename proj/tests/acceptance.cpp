// Acceptance checks: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "isac/constellation.hpp"
#include "isac/modulation.hpp"
#include "isac/nr_grid.hpp"
#include "isac/pulse.hpp"
#include "isac/radar_channel.hpp"
#include "isac/random.hpp"
#include "isac/sensing_stats.hpp"
#include "isac/v2i_sim.hpp"

using namespace isac;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s [%d] %s: %s (%.2f s of %.0f s)\n", ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
              budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

Outcome psk_zero_sidelobes() {
  const auto qpsk = make_psk(4);
  const auto ofdm = ModulationBasis::ofdm(1024);
  double worst = 0.0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    CVec s = sample_symbols(qpsk, 1024, derive_seed(7, r));
    apply_basis(ofdm, s);
    const CVec acf = pacf(s);
    for (std::size_t l = 1; l < acf.size(); ++l) worst = std::max(worst, std::abs(acf[l]));
  }
  return {worst < 1e-12, fmt("max |P-ACF(l != 0)| over 200 frames = %.3g", worst)};
}

Outcome subgaussian_floor() {
  AcfExperiment cfg;
  cfg.constellation = make_qam(16);
  cfg.basis = ModulationBasis::ofdm(1024);
  cfg.trials = 10000;
  cfg.seed = 11;
  const AcfResult res = avg_squared_acf(cfg);
  const double floor_db = to_db(far_region_mean(res.stats, res.stats.mean_sq_acf));
  const double expect_db = to_db((kurtosis(cfg.constellation) - 1.0) / 1024.0);
  return {std::abs(floor_db - expect_db) <= 0.5,
          fmt("far sidelobe mean %.3f dB", floor_db) + fmt(" vs (kappa-1)/N = %.3f dB", expect_db)};
}

Outcome kurtosis_anchors() {
  const double psk4 = kurtosis(make_psk(4));
  const double psk8 = kurtosis(make_psk(8));
  const double q16 = kurtosis(make_qam(16));
  const double q64 = kurtosis(make_qam(64));
  Rng rng(2024);
  CVec z(1000000);
  for (auto& v : z) v = complex_gaussian(rng, 1.0);
  const double cscg = sample_kurtosis(z);
  const bool ok = std::abs(psk4 - 1.0) < 1e-12 && std::abs(psk8 - 1.0) < 1e-12 && std::abs(q16 - 1.32) < 1e-12 &&
                  std::abs(q64 - 2436.0 / 1764.0) < 1e-12 && std::round(q64 * 1e4) / 1e4 == 1.3810 &&
                  std::abs(cscg - 2.0) <= 0.02;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "PSK %.15g, 16-QAM %.15g, 64-QAM %.15g, CSCG(1e6) %.4f", psk4, q16, q64, cscg);
  return {ok, buf};
}

Outcome coherent_integration() {
  // Unshaped OFDM: far sea level drops by 10 log10(K).
  auto far_sea = [](const AcfResult& r, int span) { return far_region_mean(r.stats, r.decomposition.sea_level, span); };
  AcfExperiment u;
  u.constellation = make_qam(16);
  u.basis = ModulationBasis::ofdm(1024);
  u.trials = 400;
  u.seed = 21;
  u.integrations = 1;
  const AcfResult u1 = avg_squared_acf(u);
  u.integrations = 100;
  const AcfResult u100 = avg_squared_acf(u);
  const double drop_u = to_db(far_sea(u1, 0)) - to_db(far_sea(u100, 0));

  // RRC-shaped OFDM: same law, and the iceberg follows the pulse ACF.
  PulseFilter rrc;
  rrc.kind = PulseKind::RootRaisedCosine;
  rrc.beta = 0.35;
  rrc.span = 16;
  rrc.oversampling = 8;
  AcfExperiment s;
  s.constellation = make_qam(16);
  s.basis = ModulationBasis::ofdm(256);
  s.pulse = rrc;
  s.trials = 300;
  s.seed = 22;
  s.integrations = 1;
  const AcfResult s1 = avg_squared_acf(s);
  s.integrations = 100;
  const AcfResult s100 = avg_squared_acf(s);
  const int span_samples = rrc.span * rrc.oversampling;
  const double drop_s = to_db(far_sea(s1, span_samples)) - to_db(far_sea(s100, span_samples));

  const PulseAcf pa = pulse_acf(rrc);
  double ice_vs_pulse = 0.0, ice_k = 0.0;
  const std::size_t z = s1.stats.zero_index();
  for (int lag = -rrc.oversampling / 2; lag <= rrc.oversampling / 2; ++lag) {
    const auto i = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(z) + lag);
    const double p2 = to_db(pa.at(lag) * pa.at(lag));
    ice_vs_pulse = std::max({ice_vs_pulse, std::abs(to_db(s1.decomposition.iceberg[i]) - p2),
                             std::abs(to_db(s100.decomposition.iceberg[i]) - p2)});
    ice_k = std::max(ice_k, std::abs(to_db(s1.decomposition.iceberg[i]) - to_db(s100.decomposition.iceberg[i])));
  }
  const double ice0_u = std::abs(to_db(u1.decomposition.iceberg[u1.stats.zero_index()]) -
                                 to_db(u100.decomposition.iceberg[u100.stats.zero_index()]));
  const bool ok = std::abs(drop_u - 20.0) <= 1.0 && std::abs(drop_s - 20.0) <= 1.0 && ice_vs_pulse <= 0.2 &&
                  ice_k <= 0.2 && ice0_u <= 0.2;
  char buf[300];
  std::snprintf(buf, sizeof(buf),
                "sea-level drop K=1->100: unshaped %.2f dB, RRC %.2f dB; iceberg vs pulse ACF^2 max %.3f dB, "
                "iceberg K=1 vs K=100 max %.3f dB (unshaped lag 0: %.3f dB)",
                drop_u, drop_s, ice_vs_pulse, ice_k, ice0_u);
  return {ok, buf};
}

Outcome basis_ranking() {
  const std::vector<ModulationBasis> bases = {ModulationBasis::sc(1024), ModulationBasis::ofdm(1024),
                                              ModulationBasis::cdma(1024), ModulationBasis::otfs(32, 32),
                                              ModulationBasis::afdm(1024)};
  const auto ranked = rank_bases(make_qam(16), bases, 10000, 31);
  bool ok = ranked.front().basis.kind == BasisKind::OFDM;
  const double ofdm_hi = ranked.front().isl_linear + ranked.front().isl_half_width;
  std::string detail;
  for (const auto& r : ranked) {
    if (&r != &ranked.front()) ok = ok && (r.isl_linear - r.isl_half_width) > ofdm_hi;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%s%s %.3f [%.3f, %.3f] dB", detail.empty() ? "" : "; ", r.basis.label().c_str(),
                  r.isl_db, r.isl_db_lo, r.isl_db_hi);
    detail += buf;
  }
  return {ok, "ISL " + detail};
}

Outcome unitarity_roundtrip() {
  double worst_u = 0.0, worst_rt = 0.0;
  for (std::size_t n : {64, 256, 1024}) {
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
    const std::vector<ModulationBasis> bases = {ModulationBasis::sc(n), ModulationBasis::ofdm(n),
                                                ModulationBasis::cdma(n), ModulationBasis::otfs(side, n / side),
                                                ModulationBasis::afdm(n)};
    for (const auto& b : bases) {
      worst_u = std::max(worst_u, unitarity_residual(b));
      const CVec x = sample_symbols(make_qam(16), n, 5 + n);
      const CVec back = demodulate(b, modulate(b, x).samples);
      for (std::size_t i = 0; i < n; ++i) worst_rt = std::max(worst_rt, std::abs(back[i] - x[i]));
    }
  }
  return {worst_u < 1e-10 && worst_rt < 1e-10,
          fmt("max|U^H U - I| = %.3g", worst_u) + fmt(", round-trip error = %.3g", worst_rt)};
}

// 120 x 56 grid at 120 kHz with QPSK payload around the pilots.
ResourceGrid sensing_grid(bool pilot_lattice) {
  ResourceGrid g(120, 56, 120);
  if (pilot_lattice) place_pilot_lattice(g, 10, 3, 0x5EED);
  fill_payload(g, make_psk(4), 77);
  return g;
}

Outcome processing_gain() {
  const ResourceGrid g = sensing_grid(true);
  const ReMask full = mask_all();
  const ReMask pilots = mask_pilots();
  TargetScene scene;
  scene.carrier = carrier_for(g);
  const double dbin = 1.0 / (120.0 * scene.carrier.subcarrier_spacing_hz());
  const double vbin = 1.0 / (56.0 * scene.carrier.symbol_duration());
  scene.targets.push_back({17 * dbin, 5 * vbin, {1.0, 0.0}});

  const PeriodogramConfig pc{2, 2};
  double pk_full = 0, fl_full = 0, pk_pil = 0, fl_pil = 0;
  scene.noise_power = from_db(5.0);  // per-RE SNR of -5 dB
  for (std::uint64_t t = 0; t < 500; ++t) {
    const CVec y = apply_scene(g, scene, derive_seed(41, t));
    const auto& tgt = scene.targets[0];
    const auto a = peak_to_floor(compute_periodogram(g, y, full, pc), tgt.delay_s, tgt.doppler_hz);
    const auto b = peak_to_floor(compute_periodogram(g, y, pilots, pc), tgt.delay_s, tgt.doppler_hz);
    pk_full += a.peak;
    fl_full += a.floor;
    pk_pil += b.peak;
    fl_pil += b.floor;
  }
  const double rho = pilot_fraction(g);
  const double gain_db = to_db(pk_full / fl_full) - to_db(pk_pil / fl_pil);

  DetectionConfig dc;
  dc.trials = 500;
  dc.seed = 43;
  std::vector<double> sweep_full, sweep_pil;
  for (int s = -36; s <= -14; ++s) sweep_full.push_back(s);
  for (int s = -26; s <= -4; ++s) sweep_pil.push_back(s);
  const auto c_full = detection_rate(g, scene, full, sweep_full, dc);
  const auto c_pil = detection_rate(g, scene, pilots, sweep_pil, dc);
  const double shift = snr_at_pd(c_pil, 0.9) - snr_at_pd(c_full, 0.9);
  const double law = to_db(1.0 / rho);
  char buf[240];
  std::snprintf(buf, sizeof(buf), "rho = %.3f; peak-to-floor gain %.2f dB; Pd=0.9 SNR shift %.2f dB (law %.2f dB)",
                rho, gain_db, shift, law);
  return {std::abs(gain_db - 10.0) <= 1.0 && std::abs(shift - 10.0) <= 1.5, buf};
}

Outcome resolution_bins() {
  ResourceGrid g(64, 16, 120);
  fill_payload(g, make_psk(4), 5);
  TargetScene scene;
  scene.carrier = carrier_for(g);
  const double dbin = 1.0 / (64.0 * scene.carrier.subcarrier_spacing_hz());
  const double vbin = 1.0 / (16.0 * scene.carrier.symbol_duration());
  const PeriodogramConfig pc{8, 8};
  // Echoes in quadrature at the centre of the grid, so their responses add in power.
  auto centred = [&](Complex b, double tau, double nu) {
    const double kc = (64.0 - 1.0) / 2.0, mc = (16.0 - 1.0) / 2.0;
    return b * std::polar(1.0, kTwoPi * (kc * scene.carrier.subcarrier_spacing_hz() * tau -
                                          mc * scene.carrier.symbol_duration() * nu));
  };
  auto count = [&](double d2, double v2) {
    scene.targets = {{10 * dbin, 3 * vbin, centred({1.0, 0.0}, 10 * dbin, 3 * vbin)},
                     {d2, v2, centred({0.0, 1.0}, d2, v2)}};
    const CVec y = apply_scene(g, scene, 1);
    return find_peaks(compute_periodogram(g, y, mask_all(), pc), 10, 0.25).size();
  };
  const auto delay_one = count(11 * dbin, 3 * vbin);
  const auto delay_half = count(10.5 * dbin, 3 * vbin);
  const auto dopp_one = count(10 * dbin, 4 * vbin);
  const auto dopp_half = count(10 * dbin, 3.5 * vbin);
  char buf[200];
  std::snprintf(buf, sizeof(buf), "peaks within 6 dB: delay 1 bin %zu, 0.5 bin %zu; Doppler 1 bin %zu, 0.5 bin %zu",
                delay_one, delay_half, dopp_one, dopp_half);
  return {delay_one == 2 && delay_half == 1 && dopp_one == 2 && dopp_half == 1, buf};
}

Outcome nr_conformance() {
  BurstConfig one;
  one.n_ssb = 1;
  one.scs_khz = 120;
  const ResourceGrid ssb = build_ssb_burst(one, 240, 14);
  const std::size_t footprint = ssb.size() - ssb.count(ReLabel::Empty) + ssb.reserved_count();
  const bool one_ok = footprint == 240 * 4 && ssb.count(ReLabel::PSS) == 127 && ssb.count(ReLabel::SSS) == 127;

  const ResourceGrid burst = build_grid(grid_preset("fr2-64ssb-burst"));
  const std::size_t window = symbols_in_ms(120, 5.0);
  const auto starts = ssb_start_symbols(120, 64);
  const bool burst_ok = burst.count(ReLabel::PSS) == 64 * 127 && window == 560 &&
                        static_cast<std::size_t>(starts.back() + kSsbSymbols) <= window &&
                        burst.size() - burst.count(ReLabel::Empty) + burst.reserved_count() == 64 * 960;

  const double frac = pilot_fraction(build_grid(grid_preset("typical-nr-slot")));
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "SSB footprint %zu REs (PSS %zu); 64 SSBs end at symbol %d of %zu; typical slot pilot fraction %.4f",
                footprint, ssb.count(ReLabel::PSS), starts.back() + kSsbSymbols, window, frac);
  return {one_ok && burst_ok && frac >= 0.05 && frac <= 0.15, buf};
}

Outcome v2i_numbers() {
  const V2iScenario scn = paper_fr2_120khz();
  const auto ia_b = simulate_initial_access(scn, Mode::Baseline);
  const auto ia_s = simulate_initial_access(scn, Mode::SensingAssisted);
  const double ia_red = reduction(ia_b.latency_ms, ia_s.latency_ms);
  const bool ia_ok = std::abs(ia_b.latency_ms - 15.0) < 1e-9 && std::abs(ia_s.latency_ms - 1.25) < 1e-9 &&
                     std::round(ia_red * 1000.0) == 917.0;

  const auto bf_b = simulate_beam_failure(scn, Mode::Baseline, BlockageEvent{20.0});
  const auto bf_s = simulate_beam_failure(scn, Mode::SensingAssisted, BlockageEvent{20.0});
  const double bf_red = reduction(bf_b.metrics.at("detection_ms"), bf_s.metrics.at("detection_ms"));
  const bool bf_ok = bf_b.metrics.at("detection_ms") == 5.0 && bf_s.metrics.at("detection_ms") == 2.5 && bf_red == 0.5;

  V2iScenario id = scn;
  id.connected.csi_period_slots = 1;
  id.sensing.noiseless = true;
  const auto c_b = simulate_connected(id, Mode::Baseline, 200.0);
  const auto c_s = simulate_connected(id, Mode::SensingAssisted, 200.0);
  const double gain = c_s.throughput_rel - c_b.throughput_rel;
  const double delta = c_b.overhead_fraction - c_s.overhead_fraction;
  const bool c_ok = std::abs(gain - delta) < 1e-12 && delta > 0.0;

  int turn_ok = 0, straight_ok = 0;
  V2iScenario ho = scn;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ho.seed = seed;
    ho.handover.vehicle = intersection_path(Maneuver::Turn);
    const auto t = simulate_handover(ho, Mode::SensingAssisted);
    if (t.metrics.at("prepared_before_crossing") == 1.0 && t.metrics.at("selected_cell") == 2.0) ++turn_ok;
    ho.handover.vehicle = intersection_path(Maneuver::Straight);
    const auto s = simulate_handover(ho, Mode::SensingAssisted);
    if (s.metrics.at("prepared_before_crossing") == 1.0 && s.metrics.at("selected_cell") == 1.0) ++straight_ok;
  }
  const bool ho_ok = turn_ok >= 180 && straight_ok >= 180;

  char buf[400];
  std::snprintf(buf, sizeof(buf),
                "IA %.4g -> %.4g ms (%.1f%%); BFD %.4g -> %.4g ms (%.0f%%); connected gain - overhead delta = %.2g "
                "(delta %.4f); handover prepared in time: turn %d/200, straight %d/200",
                ia_b.latency_ms, ia_s.latency_ms, 100.0 * ia_red, bf_b.metrics.at("detection_ms"),
                bf_s.metrics.at("detection_ms"), 100.0 * bf_red, gain - delta, delta, turn_ok, straight_ok);
  return {ia_ok && bf_ok && c_ok && ho_ok, buf};
}

}  // namespace

int main() {
  run(1, "PSK zero-sidelobe P-ACF (OFDM, QPSK, N=1024)", 1.0, psk_zero_sidelobes);
  run(2, "sub-Gaussian sidelobe floor (OFDM, 16-QAM, N=1024, 1e4 trials)", 60.0, subgaussian_floor);
  run(3, "kurtosis anchors", 5.0, kurtosis_anchors);
  run(4, "coherent-integration law (K=100 vs K=1)", 300.0, coherent_integration);
  run(5, "basis ranking by ISL (16-QAM, N=1024, 1e4 trials)", 600.0, basis_ranking);
  run(6, "unitarity and round trip (5 bases, N in {64,256,1024})", 30.0, unitarity_roundtrip);
  run(7, "pilot-vs-payload processing gain (rho=0.1, 500 trials)", 300.0, processing_gain);
  run(8, "delay/Doppler resolution bins", 10.0, resolution_bins);
  run(9, "NR grid conformance", 5.0, nr_conformance);
  run(10, "V2I stage numbers (paper-fr2-120khz)", 120.0, v2i_numbers);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
