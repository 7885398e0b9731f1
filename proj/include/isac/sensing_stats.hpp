#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "isac/common.hpp"
#include "isac/constellation.hpp"
#include "isac/modulation.hpp"
#include "isac/pulse.hpp"

namespace isac {

/// Periodic autocorrelation R[l] = (1/N) sum_n s[n] conj(s[(n+l) mod N]),
/// returned for l = 0..N-1.
CVec pacf(std::span<const Complex> s);

/// Linear autocorrelation c[m] = sum_n y[n] conj(y[n+m]) for
/// m = -(len-1)..(len-1) (index m + len - 1), unnormalized.
CVec aperiodic_acf_raw(std::span<const Complex> y);

/// aperiodic_acf_raw scaled so that the lag-0 value is 1.
CVec aperiodic_acf(std::span<const Complex> y);

/// Delay-Doppler ambiguity map, peak-normalized power.
struct AmbiguityMap {
  std::vector<int> delays;    // centered: -N/2 .. N/2-1
  std::vector<int> dopplers;  // centered integer Doppler bins
  RVec power;                 // power[delay_index * dopplers.size() + doppler_index]

  double at(std::size_t delay_index, std::size_t doppler_index) const {
    return power[delay_index * dopplers.size() + doppler_index];
  }
  std::size_t zero_doppler_index() const;
  std::size_t zero_delay_index() const;
};

/// A[l, v] = |sum_n s[n] conj(s[(n+l) mod N]) e^{-j 2 pi v n / N}|^2 / peak
/// over `doppler_bins` integer Doppler bins centered on zero.
AmbiguityMap ambiguity_function(std::span<const Complex> samples, std::size_t doppler_bins);

/// Monte-Carlo squared-ACF experiment.
///
/// trials * integrations frames are drawn. Each group of `integrations`
/// frames is coherently averaged (complex mean of the per-frame ACFs)
/// before squaring. Unshaped frames use the periodic ACF, pulse-shaped
/// frames the aperiodic ACF.
struct AcfExperiment {
  Constellation constellation = make_qam(16);
  ModulationBasis basis = ModulationBasis::ofdm(1024);
  std::optional<PulseFilter> pulse;
  std::size_t trials = 1000;
  std::size_t integrations = 1;
  std::uint64_t seed = 1;
  /// Lags with |lag| below this are mainlobe. 0 selects the default:
  /// one symbol (1 lag unshaped, L lags shaped).
  int exclude_mainlobe_lags = 0;
  /// Upper bound on trials * integrations * samples-per-frame.
  double sample_budget = 5e9;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;

  int mainlobe_exclusion() const;
};

struct AcfStats {
  std::vector<int> lags;  // centered
  RVec mean_sq_acf;       // lag 0 -> 1
  RVec var_acf;           // variance of the integrated ACF, same normalization
  double psl_db = kDbFloor;
  double isl_db = kDbFloor;
  std::size_t trials = 0;
  std::size_t integrations = 1;
  bool periodic = true;
  int oversampling = 1;
  int exclude_mainlobe_lags = 1;
  // Per-trial integrated sidelobe level (linear): mean and standard deviation.
  double isl_linear_mean = 0.0;
  double isl_linear_std = 0.0;

  std::size_t zero_index() const;
};

struct IcebergDecomposition {
  RVec iceberg;    // |E[ACF]|^2
  RVec sea_level;  // Var[ACF]
  RVec total;      // E|ACF|^2
};

struct AcfResult {
  AcfStats stats;
  IcebergDecomposition decomposition;
};

AcfResult avg_squared_acf(const AcfExperiment& cfg);

struct SidelobeMetrics {
  double psl_db = kDbFloor;
  double isl_db = kDbFloor;
};

/// PSL/ISL over lags with |lag| >= exclude_mainlobe_lags.
SidelobeMetrics sidelobe_metrics(const AcfStats& stats, int exclude_mainlobe_lags);

/// Mean of `curve` over the far region: |lag| >= exclusion for unshaped
/// frames; span*L < |lag| <= N*L/2 for shaped frames.
double far_region_mean(const AcfStats& stats, const RVec& curve, int pulse_span_samples = 0);

struct BasisRank {
  ModulationBasis basis;
  double isl_linear = 0.0;
  double isl_half_width = 0.0;  // 3 sigma, linear
  double isl_db = kDbFloor;
  double isl_db_lo = kDbFloor;
  double isl_db_hi = kDbFloor;
  AcfStats stats;
};

/// Runs avg_squared_acf per basis with one shared seed and returns the
/// bases sorted by ascending ISL.
std::vector<BasisRank> rank_bases(const Constellation& c, std::span<const ModulationBasis> bases,
                                  std::size_t trials, std::uint64_t seed);

}  // namespace isac
