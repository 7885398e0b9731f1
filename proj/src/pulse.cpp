#include "isac/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isac {
namespace {

constexpr double kSingularTol = 1e-9;

double sinc(double t) {
  if (std::abs(t) < 1e-15) return 1.0;
  return std::sin(kPi * t) / (kPi * t);
}

double raised_cosine(double t, double beta) {
  if (beta == 0.0) return sinc(t);
  const double edge = 1.0 / (2.0 * beta);
  if (std::abs(std::abs(t) - edge) < kSingularTol) return (kPi / 4.0) * sinc(edge);
  const double x = 2.0 * beta * t;
  return sinc(t) * std::cos(kPi * beta * t) / (1.0 - x * x);
}

double root_raised_cosine(double t, double beta) {
  if (beta == 0.0) return sinc(t);
  if (std::abs(t) < 1e-15) return 1.0 - beta + 4.0 * beta / kPi;
  const double edge = 1.0 / (4.0 * beta);
  if (std::abs(std::abs(t) - edge) < kSingularTol) {
    const double a = kPi / (4.0 * beta);
    return (beta / std::sqrt(2.0)) *
           ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
  }
  const double x = 4.0 * beta * t;
  const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
  return num / (kPi * t * (1.0 - x * x));
}

double gaussian(double t, double bt) {
  return std::exp(-2.0 * kPi * kPi * bt * bt * t * t / std::log(2.0));
}

}  // namespace

std::string to_string(PulseKind kind) {
  switch (kind) {
    case PulseKind::Sinc: return "sinc";
    case PulseKind::Gaussian: return "gaussian";
    case PulseKind::RaisedCosine: return "raised_cosine";
    case PulseKind::RootRaisedCosine: return "root_raised_cosine";
  }
  return "?";
}

PulseKind pulse_kind_from_string(const std::string& s) {
  if (s == "sinc") return PulseKind::Sinc;
  if (s == "gaussian") return PulseKind::Gaussian;
  if (s == "raised_cosine" || s == "rc") return PulseKind::RaisedCosine;
  if (s == "root_raised_cosine" || s == "rrc") return PulseKind::RootRaisedCosine;
  throw InvalidParameter("unknown pulse kind '" + s + "'");
}

void PulseFilter::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidParameter("pulse: beta must lie in [0, 1]");
  if (!(bt > 0.0)) throw InvalidParameter("pulse: bt must be > 0");
  if (span < 4) throw InvalidParameter("pulse: span must be >= 4 symbols");
  if (oversampling < 4) throw InvalidParameter("pulse: oversampling must be >= 4");
  if ((span * oversampling) % 2 != 0)
    throw InvalidParameter("pulse: span * oversampling must be even for a centered response");
}

std::string PulseFilter::label() const {
  std::ostringstream os;
  os << to_string(kind);
  if (kind == PulseKind::RaisedCosine || kind == PulseKind::RootRaisedCosine) os << "(beta=" << beta << ")";
  if (kind == PulseKind::Gaussian) os << "(bt=" << bt << ")";
  os << "[span=" << span << ",L=" << oversampling << "]";
  return os.str();
}

double pulse_value(const PulseFilter& p, double t) {
  switch (p.kind) {
    case PulseKind::Sinc: return sinc(t);
    case PulseKind::Gaussian: return gaussian(t, p.bt);
    case PulseKind::RaisedCosine: return raised_cosine(t, p.beta);
    case PulseKind::RootRaisedCosine: return root_raised_cosine(t, p.beta);
  }
  return 0.0;
}

RVec impulse_response(const PulseFilter& p) {
  p.validate();
  const std::size_t len = p.length();
  const int half = p.span * p.oversampling / 2;
  RVec h(len);
  for (std::size_t m = 0; m < len; ++m) {
    const double t = static_cast<double>(static_cast<int>(m) - half) / p.oversampling;
    h[m] = pulse_value(p, t);
  }
  double energy = 0.0;
  for (double v : h) energy += v * v;
  energy /= p.oversampling;
  const double scale = 1.0 / std::sqrt(energy);
  for (double& v : h) v *= scale;
  return h;
}

CVec shape_with(std::span<const double> h, int oversampling, std::span<const Complex> samples) {
  if (samples.empty()) throw InvalidParameter("shape: empty input");
  const auto L = static_cast<std::size_t>(oversampling);
  const std::size_t span_l = h.size() - 1;
  CVec y(samples.size() * L + span_l, Complex{});
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const Complex x = samples[n];
    Complex* out = y.data() + n * L;
    for (std::size_t m = 0; m < h.size(); ++m) out[m] += x * h[m];
  }
  return y;
}

CVec shape(const PulseFilter& p, std::span<const Complex> samples) {
  const RVec h = impulse_response(p);
  return shape_with(h, p.oversampling, samples);
}

PulseAcf pulse_acf(const PulseFilter& p) {
  const RVec h = impulse_response(p);
  const int n = static_cast<int>(h.size());
  PulseAcf acf;
  acf.oversampling = p.oversampling;
  for (int lag = -(n - 1); lag <= n - 1; ++lag) {
    double r = 0.0;
    for (int m = std::max(0, -lag); m < std::min(n, n - lag); ++m) r += h[m] * h[m + lag];
    acf.lags.push_back(lag);
    acf.values.push_back(r);
  }
  const double r0 = acf.at(0);
  for (double& v : acf.values) v /= r0;
  return acf;
}

double waveform_energy(std::span<const Complex> y, int oversampling) {
  double e = 0.0;
  for (const auto& v : y) e += std::norm(v);
  return e / oversampling;
}

}  // namespace isac
