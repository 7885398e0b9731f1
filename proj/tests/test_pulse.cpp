#include <algorithm>
#include <cmath>
#include <utility>

#include "doctest.h"
#include "isac/constellation.hpp"
#include "isac/pulse.hpp"

using namespace isac;

namespace {

PulseFilter filter(PulseKind kind, double beta = 0.35) {
  PulseFilter p;
  p.kind = kind;
  p.beta = beta;
  p.span = 16;
  p.oversampling = 8;
  return p;
}

RVec convolve(const RVec& a, const RVec& b) {
  RVec out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

TEST_CASE("nyquist zeros of sinc and raised cosine") {
  for (double beta : {0.0, 0.22, 0.35, 0.5, 1.0}) {
    const auto rc = filter(PulseKind::RaisedCosine, beta);
    CHECK(pulse_value(rc, 0.0) == doctest::Approx(1.0));
    for (int k = 1; k <= 8; ++k) {
      CHECK(std::abs(pulse_value(rc, k)) < 1e-12);
      CHECK(std::abs(pulse_value(rc, -k)) < 1e-12);
    }
  }
  const auto sinc = filter(PulseKind::Sinc);
  for (int k = 1; k <= 8; ++k) CHECK(std::abs(pulse_value(sinc, k)) < 1e-12);
}

TEST_CASE("rrc singular points are finite") {
  const auto rrc = filter(PulseKind::RootRaisedCosine, 0.25);
  const double t = 1.0 / (4.0 * 0.25);
  const double v = pulse_value(rrc, t);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(0.5 * (pulse_value(rrc, t - 1e-6) + pulse_value(rrc, t + 1e-6))).epsilon(1e-4));
}

TEST_CASE("rrc convolved with itself is raised cosine") {
  // Smaller roll-offs decay more slowly and need a longer span for the same
  // truncation error.
  for (auto [beta, span] : {std::pair{0.5, 16}, std::pair{0.35, 32}, std::pair{0.22, 64}}) {
    auto rrc = filter(PulseKind::RootRaisedCosine, beta);
    rrc.span = span;
    const RVec h = impulse_response(rrc);
    const RVec c = convolve(h, h);
    const std::size_t mid = c.size() / 2;
    const auto rc = filter(PulseKind::RaisedCosine, beta);
    double err = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double t = (static_cast<double>(i) - static_cast<double>(mid)) / rrc.oversampling;
      err = std::max(err, std::abs(c[i] / rrc.oversampling - pulse_value(rc, t)));
    }
    CAPTURE(beta);
    CHECK(err < 1e-3);
  }
}

TEST_CASE("impulse responses are even and unit energy") {
  for (auto kind : {PulseKind::Sinc, PulseKind::Gaussian, PulseKind::RaisedCosine, PulseKind::RootRaisedCosine}) {
    const auto p = filter(kind);
    const RVec h = impulse_response(p);
    REQUIRE(h.size() == p.length());
    double e = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      CHECK(h[i] == doctest::Approx(h[h.size() - 1 - i]));
      e += h[i] * h[i];
    }
    CHECK(e / p.oversampling == doctest::Approx(1.0));
  }
}

TEST_CASE("shaping a unit sample returns the impulse response") {
  const auto p = filter(PulseKind::RootRaisedCosine);
  const RVec h = impulse_response(p);
  const CVec one{Complex(1.0, 0.0)};
  const CVec y = shape(p, one);
  REQUIRE(y.size() >= h.size());
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(y[i] - h[i]) < 1e-15);
  for (std::size_t i = h.size(); i < y.size(); ++i) CHECK(std::abs(y[i]) < 1e-15);
}

TEST_CASE("raised cosine has no intersymbol interference") {
  const auto p = filter(PulseKind::RaisedCosine);
  const RVec h = impulse_response(p);
  const double peak = *std::max_element(h.begin(), h.end());
  const CVec two{Complex(1.0, 0.0), Complex(1.0, 0.0)};
  const CVec y = shape(p, two);
  const std::size_t centre = static_cast<std::size_t>(p.span * p.oversampling / 2);
  CHECK(std::abs(y[centre] / peak - 1.0) < 1e-12);
  CHECK(std::abs(y[centre + static_cast<std::size_t>(p.oversampling)] / peak - 1.0) < 1e-12);
}

TEST_CASE("white qpsk frame energy is preserved") {
  const auto p = filter(PulseKind::RootRaisedCosine);
  const CVec x = sample_symbols(make_psk(4), 4096, 5);
  const double e = waveform_energy(shape(p, x), p.oversampling);
  CHECK(std::abs(e / 4096.0 - 1.0) < 1e-3);
}

TEST_CASE("pulse acf") {
  for (auto [beta, span] : {std::pair{0.5, 16}, std::pair{0.35, 32}}) {
    auto rrc = filter(PulseKind::RootRaisedCosine, beta);
    rrc.span = span;
    const auto a = pulse_acf(rrc);
    const auto rc = filter(PulseKind::RaisedCosine, beta);
    CHECK(a.at(0) == doctest::Approx(1.0));
    double err = 0.0;
    for (int lag : a.lags)
      err = std::max(err, std::abs(a.at(lag) - pulse_value(rc, static_cast<double>(lag) / rc.oversampling)));
    CHECK(err < 1e-3);
    for (int lag = 1; lag <= a.lags.back(); ++lag) {
      CHECK(a.at(lag) == doctest::Approx(a.at(-lag)));
      CHECK(std::abs(a.at(lag)) <= 1.0);
    }
  }
  const auto sinc = pulse_acf(filter(PulseKind::Sinc));
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(sinc.at(k * sinc.oversampling)) < 2e-2);
}

TEST_CASE("invalid filters") {
  auto p = filter(PulseKind::RaisedCosine, 1.5);
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  p = filter(PulseKind::RootRaisedCosine);
  p.oversampling = 0;
  CHECK_THROWS_AS(impulse_response(p), InvalidParameter);
}
