#pragma once

#include <span>
#include <string>
#include <vector>

#include "isac/common.hpp"

namespace isac {

enum class PulseKind { Sinc, Gaussian, RaisedCosine, RootRaisedCosine };

std::string to_string(PulseKind kind);
PulseKind pulse_kind_from_string(const std::string& s);

/// Truncated pulse-shaping filter sampled at `oversampling` samples/symbol.
struct PulseFilter {
  PulseKind kind = PulseKind::RootRaisedCosine;
  double beta = 0.35;   // roll-off, RC/RRC
  double bt = 0.3;      // bandwidth-time product, Gaussian
  int span = 16;        // symbols
  int oversampling = 8; // samples per symbol (L)

  void validate() const;
  std::size_t length() const { return static_cast<std::size_t>(span * oversampling) + 1; }
  std::string label() const;
};

/// Closed-form continuous pulse at time t (in symbol periods), before energy
/// normalization. Removable singularities are evaluated by their limits.
double pulse_value(const PulseFilter& p, double t);

/// Even-symmetric taps h[m] at t = (m - span*L/2)/L, scaled so that
/// sum |h|^2 / L = 1.
RVec impulse_response(const PulseFilter& p);

/// Zero-stuffs by L and convolves with h. Output length N*L + span*L.
CVec shape(const PulseFilter& p, std::span<const Complex> samples);

/// Same operation with a precomputed impulse response.
CVec shape_with(std::span<const double> h, int oversampling, std::span<const Complex> samples);

struct PulseAcf {
  std::vector<int> lags;  // in samples, -span*L .. span*L
  RVec values;            // lag 0 -> 1
  int oversampling = 1;
  double at(int lag) const { return values[static_cast<std::size_t>(lag - lags.front())]; }
};

/// Autocorrelation of the filter taps, normalized to 1 at lag 0.
PulseAcf pulse_acf(const PulseFilter& p);

/// Waveform energy in continuous-time units: sum |y|^2 / L.
double waveform_energy(std::span<const Complex> y, int oversampling);

}  // namespace isac
