#include "isac/radar_channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "isac/fft.hpp"
#include "isac/random.hpp"

namespace isac {
namespace {

double wrap_doppler_bin(std::size_t q, std::size_t bins) {
  return q >= bins / 2 ? static_cast<double>(q) - static_cast<double>(bins) : static_cast<double>(q);
}

double parabola_offset(double left, double mid, double right) {
  const double den = left - 2.0 * mid + right;
  if (den == 0.0) return 0.0;
  return std::clamp(0.5 * (left - right) / den, -0.5, 0.5);
}

std::size_t wrap_index(long long i, std::size_t n) {
  const auto m = static_cast<long long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

}  // namespace

double CarrierParams::symbol_duration() const {
  if (symbol_duration_s > 0.0) return symbol_duration_s;
  return (1.0 / subcarrier_spacing_hz()) * (1.0 + 144.0 / 2048.0);
}

void TargetScene::validate() const {
  if (carrier.n_subcarriers == 0 || carrier.n_symbols == 0) throw InvalidParameter("scene: empty carrier grid");
  if (!(carrier.scs_khz > 0)) throw InvalidParameter("scene: scs_khz must be > 0");
  if (!(noise_power >= 0.0)) throw InvalidParameter("scene: noise_power must be >= 0");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    if (!(t.delay_s >= 0.0 && t.delay_s < max_delay_s())) {
      std::ostringstream os;
      os << "scene: target " << i << " delay " << t.delay_s << " s outside [0, " << max_delay_s() << ")";
      throw InvalidParameter(os.str());
    }
    if (!(std::abs(t.doppler_hz) < max_doppler_hz())) {
      std::ostringstream os;
      os << "scene: target " << i << " Doppler " << t.doppler_hz << " Hz outside +-" << max_doppler_hz();
      throw InvalidParameter(os.str());
    }
  }
}

CarrierParams carrier_for(const ResourceGrid& grid) {
  CarrierParams c;
  c.scs_khz = grid.scs_khz();
  c.n_subcarriers = grid.subcarriers();
  c.n_symbols = grid.symbols();
  return c;
}

CVec apply_scene(const ResourceGrid& tx, const TargetScene& scene, std::uint64_t seed) {
  scene.validate();
  if (scene.carrier.n_subcarriers != tx.subcarriers() || scene.carrier.n_symbols != tx.symbols())
    throw InvalidParameter("scene: carrier dimensions differ from the grid");
  const std::size_t nk = tx.subcarriers();
  const std::size_t nm = tx.symbols();
  const double df = scene.carrier.subcarrier_spacing_hz();
  const double ts = scene.carrier.symbol_duration();

  CVec gain(nk * nm);
  for (const auto& t : scene.targets) {
    CVec freq(nk), time(nm);
    for (std::size_t k = 0; k < nk; ++k) freq[k] = std::polar(1.0, -kTwoPi * std::fmod(k * df * t.delay_s, 1.0));
    for (std::size_t m = 0; m < nm; ++m) time[m] = std::polar(1.0, kTwoPi * std::fmod(m * ts * t.doppler_hz, 1.0));
    for (std::size_t m = 0; m < nm; ++m)
      for (std::size_t k = 0; k < nk; ++k) gain[m * nk + k] += t.amplitude * time[m] * freq[k];
  }

  const CVec& x = tx.values();
  CVec y(nk * nm);
  Rng rng(seed);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = gain[i] * x[i];
    if (scene.noise_power > 0.0) y[i] += complex_gaussian(rng, scene.noise_power);
  }
  return y;
}

ReMask mask_all() {
  return [](ReLabel l) { return l != ReLabel::Empty; };
}

ReMask mask_pilots() { return is_pilot; }

ReMask mask_labels(std::vector<ReLabel> labels) {
  return [labels = std::move(labels)](ReLabel l) {
    return std::find(labels.begin(), labels.end(), l) != labels.end();
  };
}

double Periodogram::median() const {
  RVec tmp = power;
  auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2);
  std::nth_element(tmp.begin(), mid, tmp.end());
  return *mid;
}

Periodogram compute_periodogram(const ResourceGrid& tx, std::span<const Complex> rx, const ReMask& mask,
                                const PeriodogramConfig& cfg) {
  if (cfg.delay_padding < 1 || cfg.doppler_padding < 1)
    throw InvalidParameter("periodogram: padding factors must be >= 1");
  const std::size_t nk = tx.subcarriers();
  const std::size_t nm = tx.symbols();
  if (rx.size() != nk * nm) throw InvalidParameter("periodogram: received grid size differs from the transmit grid");

  Periodogram p;
  p.delay_padding = cfg.delay_padding;
  p.doppler_padding = cfg.doppler_padding;
  p.delay_bins = nk * static_cast<std::size_t>(cfg.delay_padding);
  p.doppler_bins = nm * static_cast<std::size_t>(cfg.doppler_padding);
  const double df = tx.scs_khz() * 1e3;
  p.delay_step_s = 1.0 / (static_cast<double>(p.delay_bins) * df);
  const CarrierParams carrier{tx.scs_khz(), nk, nm, cfg.symbol_duration_s};
  p.doppler_step_hz = 1.0 / (static_cast<double>(p.doppler_bins) * carrier.symbol_duration());

  // buf[d * doppler_bins + q]
  CVec buf(p.delay_bins * p.doppler_bins);
  std::size_t used = 0;
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t k = 0; k < nk; ++k) {
      const std::size_t i = tx.index(m, k);
      if (!mask(tx.labels()[i])) continue;
      const Complex x = tx.values()[i];
      if (x == Complex{}) {
        std::ostringstream os;
        os << "periodogram: zero-valued transmit RE at symbol " << m << ", subcarrier " << k;
        throw InvalidParameter(os.str());
      }
      buf[k * p.doppler_bins + m] = rx[i] / x;
      ++used;
    }
  }
  if (used == 0) throw InvalidParameter("periodogram: mask selects no resource elements");
  p.used_re_fraction = static_cast<double>(used) / static_cast<double>(nk * nm);

  const Fft& fd = thread_fft(p.delay_bins);
  const Fft& fq = thread_fft(p.doppler_bins);
  CVec col(p.delay_bins);
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t k = 0; k < p.delay_bins; ++k) col[k] = buf[k * p.doppler_bins + m];
    fd.inverse(col);
    for (std::size_t d = 0; d < p.delay_bins; ++d) buf[d * p.doppler_bins + m] = col[d];
  }
  for (std::size_t d = 0; d < p.delay_bins; ++d)
    fq.forward(std::span<Complex>(buf.data() + d * p.doppler_bins, p.doppler_bins));

  p.power.resize(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) p.power[i] = std::norm(buf[i]);
  return p;
}

std::vector<Estimate> find_peaks(const Periodogram& p, std::size_t max_peaks, double min_rel_power) {
  struct Cand {
    std::size_t d, q;
    double v;
  };
  std::vector<Cand> cands;
  const std::size_t nd = p.delay_bins, nq = p.doppler_bins;
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double v = p.at(d, q);
      if (!(v > 0.0)) continue;
      bool is_max = true;
      for (int a = -1; a <= 1 && is_max; ++a) {
        for (int b = -1; b <= 1; ++b) {
          if (a == 0 && b == 0) continue;
          const std::size_t dd = wrap_index(static_cast<long long>(d) + a, nd);
          const std::size_t qq = wrap_index(static_cast<long long>(q) + b, nq);
          if (dd == d && qq == q) continue;
          const double w = p.at(dd, qq);
          // Ties go to the earlier index so plateaus yield one peak.
          if (w > v || (w == v && (dd < d || (dd == d && qq < q)))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) cands.push_back({d, q, v});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.v != b.v) return a.v > b.v;
    return a.d != b.d ? a.d < b.d : a.q < b.q;
  });
  std::vector<Estimate> out;
  if (cands.empty()) return out;
  const double top = cands.front().v;
  for (const auto& c : cands) {
    if (out.size() >= max_peaks || c.v < top * min_rel_power) break;
    const double l_d = std::sqrt(p.at(wrap_index(static_cast<long long>(c.d) - 1, nd), c.q));
    const double r_d = std::sqrt(p.at(wrap_index(static_cast<long long>(c.d) + 1, nd), c.q));
    const double l_q = std::sqrt(p.at(c.d, wrap_index(static_cast<long long>(c.q) - 1, nq)));
    const double r_q = std::sqrt(p.at(c.d, wrap_index(static_cast<long long>(c.q) + 1, nq)));
    const double mid = std::sqrt(c.v);
    const double dd = static_cast<double>(c.d) + parabola_offset(l_d, mid, r_d);
    const double qq = wrap_doppler_bin(c.q, nq) + parabola_offset(l_q, mid, r_q);
    out.push_back({dd * p.delay_step_s, qq * p.doppler_step_hz, c.v});
  }
  return out;
}

SensingReport periodogram_estimate(const ResourceGrid& tx, std::span<const Complex> rx, const ReMask& mask,
                                   std::size_t n_targets, const PeriodogramConfig& cfg) {
  const Periodogram p = compute_periodogram(tx, rx, mask, cfg);
  SensingReport r;
  r.estimates = find_peaks(p, n_targets);
  r.delay_bin_s = p.delay_step_s * p.delay_padding;
  r.doppler_bin_hz = p.doppler_step_hz * p.doppler_padding;
  r.used_re_fraction = p.used_re_fraction;
  return r;
}

PeakToFloor peak_to_floor(const Periodogram& p, double delay_s, double doppler_hz) {
  const auto d0 = static_cast<long long>(std::llround(delay_s / p.delay_step_s));
  const auto q0 = static_cast<long long>(std::llround(doppler_hz / p.doppler_step_hz));
  PeakToFloor r;
  for (long long a = -p.delay_padding; a <= p.delay_padding; ++a)
    for (long long b = -p.doppler_padding; b <= p.doppler_padding; ++b)
      r.peak = std::max(r.peak, p.at(wrap_index(d0 + a, p.delay_bins), wrap_index(q0 + b, p.doppler_bins)));
  r.floor = p.median();
  return r;
}

std::vector<DetectionPoint> detection_rate(const ResourceGrid& tx, const TargetScene& scene, const ReMask& mask,
                                           std::span<const double> snr_db, const DetectionConfig& cfg) {
  if (cfg.trials < 100) throw InvalidParameter("detection_rate: trials must be >= 100");
  if (scene.targets.empty()) throw InvalidParameter("detection_rate: scene has no target");
  if (!(cfg.threshold_factor > 0.0)) throw InvalidParameter("detection_rate: threshold_factor must be > 0");
  const Target& truth = scene.targets.front();
  std::vector<DetectionPoint> curve;
  for (std::size_t s = 0; s < snr_db.size(); ++s) {
    TargetScene sc = scene;
    sc.noise_power = 1.0 / from_db(snr_db[s]);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      // Noise depends on the trial only, so every SNR point and mask sees the same draws.
      const CVec y = apply_scene(tx, sc, derive_seed(cfg.seed, t));
      const Periodogram p = compute_periodogram(tx, y, mask, cfg.periodogram);
      const PeakToFloor pf = peak_to_floor(p, truth.delay_s, truth.doppler_hz);
      if (pf.peak > cfg.threshold_factor * pf.floor) ++hits;
    }
    curve.push_back({snr_db[s], static_cast<double>(hits) / static_cast<double>(cfg.trials)});
  }
  return curve;
}

double snr_at_pd(std::span<const DetectionPoint> curve, double pd) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].pd < pd) continue;
    if (i == 0) return curve[0].snr_db;
    const auto& a = curve[i - 1];
    const auto& b = curve[i];
    return a.snr_db + (pd - a.pd) / (b.pd - a.pd) * (b.snr_db - a.snr_db);
  }
  throw OutOfRange("snr_at_pd: curve never reaches the requested Pd", curve.empty() ? 0.0 : curve.front().pd,
                   curve.empty() ? 0.0 : curve.back().pd);
}

}  // namespace isac
