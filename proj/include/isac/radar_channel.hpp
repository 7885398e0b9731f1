#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "isac/common.hpp"
#include "isac/nr_grid.hpp"

namespace isac {

struct Target {
  double delay_s = 0.0;
  double doppler_hz = 0.0;
  Complex amplitude{1.0, 0.0};
};

struct CarrierParams {
  int scs_khz = 120;
  std::size_t n_subcarriers = 0;
  std::size_t n_symbols = 0;
  /// OFDM symbol duration including the cyclic prefix; 0 selects the
  /// normal-CP value (1/scs) * (1 + 144/2048).
  double symbol_duration_s = 0.0;

  double subcarrier_spacing_hz() const { return scs_khz * 1e3; }
  double symbol_duration() const;
};

struct TargetScene {
  std::vector<Target> targets;
  double noise_power = 0.0;  // per RE, linear
  CarrierParams carrier;

  double max_delay_s() const { return 1.0 / carrier.subcarrier_spacing_hz(); }
  double max_doppler_hz() const { return 1.0 / (2.0 * carrier.symbol_duration()); }
  void validate() const;
};

/// Scene whose carrier dimensions match the grid.
CarrierParams carrier_for(const ResourceGrid& grid);

/// Y[k,m] = sum_t b_t exp(j 2 pi (m T nu_t - k df tau_t)) X[k,m] + noise.
/// Output is indexed like the grid (symbol * subcarriers + subcarrier).
CVec apply_scene(const ResourceGrid& tx, const TargetScene& scene, std::uint64_t seed);

using ReMask = std::function<bool(ReLabel)>;

ReMask mask_all();
ReMask mask_pilots();
ReMask mask_labels(std::vector<ReLabel> labels);

struct PeriodogramConfig {
  int delay_padding = 4;    // zero-padding factor along subcarriers
  int doppler_padding = 4;  // zero-padding factor along symbols
  double symbol_duration_s = 0.0;  // 0: normal-CP duration for the grid SCS
};

/// Delay-Doppler power map. power[d * doppler_bins + q]; Doppler bins at or
/// above doppler_bins / 2 stand for negative Doppler.
struct Periodogram {
  std::size_t delay_bins = 0;
  std::size_t doppler_bins = 0;
  int delay_padding = 1;
  int doppler_padding = 1;
  double delay_step_s = 0.0;    // per padded bin
  double doppler_step_hz = 0.0; // per padded bin
  double used_re_fraction = 0.0;
  RVec power;

  double at(std::size_t d, std::size_t q) const { return power[d * doppler_bins + q]; }
  double median() const;
};

Periodogram compute_periodogram(const ResourceGrid& tx, std::span<const Complex> rx, const ReMask& mask,
                                const PeriodogramConfig& cfg = {});

struct Estimate {
  double delay_s = 0.0;
  double doppler_hz = 0.0;
  double peak_power = 0.0;
};

struct SensingReport {
  std::vector<Estimate> estimates;  // descending peak power
  double delay_bin_s = 0.0;         // 1 / (N df)
  double doppler_bin_hz = 0.0;      // 1 / (M T)
  double used_re_fraction = 0.0;
};

/// Local maxima (8-neighbour, circular) sorted by power, interpolated with a
/// 3-point parabola per axis.
std::vector<Estimate> find_peaks(const Periodogram& p, std::size_t max_peaks, double min_rel_power = 0.0);

SensingReport periodogram_estimate(const ResourceGrid& tx, std::span<const Complex> rx, const ReMask& mask,
                                   std::size_t n_targets, const PeriodogramConfig& cfg = {});

struct PeakToFloor {
  double peak = 0.0;
  double floor = 0.0;  // median of the map
};

/// Largest power within +-1 unpadded bin of (delay, doppler) and the map median.
PeakToFloor peak_to_floor(const Periodogram& p, double delay_s, double doppler_hz);

struct DetectionConfig {
  double threshold_factor = 13.0;  // threshold = median * factor
  PeriodogramConfig periodogram{2, 2};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
};

struct DetectionPoint {
  double snr_db = 0.0;
  double pd = 0.0;
};

/// Pd versus per-RE SNR for the first target of `scene`. Noise power per RE
/// is 1 / SNR (unit-power reference); the target keeps its own amplitude.
std::vector<DetectionPoint> detection_rate(const ResourceGrid& tx, const TargetScene& scene, const ReMask& mask,
                                           std::span<const double> snr_db, const DetectionConfig& cfg);

/// SNR at which the curve first reaches `pd` (linear interpolation).
double snr_at_pd(std::span<const DetectionPoint> curve, double pd);

}  // namespace isac
