#include <cmath>

#include "doctest.h"
#include "isac/radar_channel.hpp"
#include "isac/random.hpp"

using namespace isac;

namespace {

constexpr std::size_t kSub = 120;
constexpr std::size_t kSym = 56;

ResourceGrid lattice_grid() {
  ResourceGrid g(kSub, kSym, 120);
  place_pilot_lattice(g, 10, 3, 0x5EED);
  fill_payload(g, make_psk(4), 77);
  return g;
}

TargetScene scene_for(const ResourceGrid& g, double delay_bins, double doppler_bins, double noise_power = 0.0) {
  TargetScene s;
  s.carrier = carrier_for(g);
  const double dbin = 1.0 / (static_cast<double>(kSub) * s.carrier.subcarrier_spacing_hz());
  const double vbin = 1.0 / (static_cast<double>(kSym) * s.carrier.symbol_duration());
  s.targets.push_back({delay_bins * dbin, doppler_bins * vbin, {1.0, 0.0}});
  s.noise_power = noise_power;
  return s;
}

}  // namespace

TEST_CASE("empty scene gives a zero echo") {
  const ResourceGrid g = lattice_grid();
  TargetScene s;
  s.carrier = carrier_for(g);
  for (const Complex& v : apply_scene(g, s, 1)) CHECK(v == Complex(0.0, 0.0));
}

TEST_CASE("static unit target reproduces the transmit grid") {
  const ResourceGrid g = lattice_grid();
  const CVec y = apply_scene(g, scene_for(g, 0.0, 0.0), 1);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(y[i] - g.values()[i]) < 1e-15);
}

TEST_CASE("one delay bin is a per-subcarrier phase step") {
  const ResourceGrid g = lattice_grid();
  const CVec y = apply_scene(g, scene_for(g, 1.0, 0.0), 1);
  for (std::size_t m : {0u, 9u})
    for (std::size_t k = 0; k < kSub; ++k) {
      const Complex ratio = y[g.index(m, k)] / g.value(m, k);
      CHECK(std::abs(ratio - std::polar(1.0, -kTwoPi * static_cast<double>(k) / kSub)) < 1e-12);
    }
}

TEST_CASE("on-grid targets are recovered exactly") {
  const ResourceGrid g = lattice_grid();
  for (double doppler : {3.0, -4.0}) {
    const TargetScene s = scene_for(g, 7.0, doppler);
    const CVec y = apply_scene(g, s, 1);
    for (const auto& mask : {mask_all(), mask_pilots()}) {
      const auto r = periodogram_estimate(g, y, mask, 1);
      REQUIRE(r.estimates.size() == 1);
      CHECK(std::abs((r.estimates[0].delay_s - s.targets[0].delay_s) / r.delay_bin_s) < 1e-9);
      CHECK(std::abs((r.estimates[0].doppler_hz - s.targets[0].doppler_hz) / r.doppler_bin_hz) < 1e-9);
    }
  }
}

TEST_CASE("off-grid target at 20 dB stays within one bin") {
  const ResourceGrid g = lattice_grid();
  const TargetScene s = scene_for(g, 17.5, 5.5, from_db(-20.0));
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const CVec y = apply_scene(g, s, derive_seed(3, seed));
    const auto r = periodogram_estimate(g, y, mask_all(), 1, {4, 4});
    const double de = std::abs(r.estimates[0].delay_s - s.targets[0].delay_s) / r.delay_bin_s;
    const double ve = std::abs(r.estimates[0].doppler_hz - s.targets[0].doppler_hz) / r.doppler_bin_hz;
    if (de <= 1.0 && ve <= 1.0) ++ok;
  }
  CHECK(ok == 100);
}

TEST_CASE("pilot-only processing loses 10 log10(1/rho)") {
  const ResourceGrid g = lattice_grid();
  const double rho = pilot_fraction(g);
  CHECK(std::abs(rho - 0.1) < 1e-12);
  const TargetScene s = scene_for(g, 17.0, 5.0, from_db(5.0));
  const PeriodogramConfig pc{2, 2};
  double pk_full = 0, fl_full = 0, pk_pil = 0, fl_pil = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const CVec y = apply_scene(g, s, derive_seed(9, t));
    const auto& tgt = s.targets[0];
    const auto a = peak_to_floor(compute_periodogram(g, y, mask_all(), pc), tgt.delay_s, tgt.doppler_hz);
    const auto b = peak_to_floor(compute_periodogram(g, y, mask_pilots(), pc), tgt.delay_s, tgt.doppler_hz);
    pk_full += a.peak;
    fl_full += a.floor;
    pk_pil += b.peak;
    fl_pil += b.floor;
  }
  const double gain = to_db(pk_full / fl_full) - to_db(pk_pil / fl_pil);
  CHECK(std::abs(gain - to_db(1.0 / rho)) <= 1.0);
}

TEST_CASE("used RE fraction of the pilot mask equals the pilot fraction") {
  ResourceGrid g = build_grid(grid_preset("typical-nr-slot"));
  fill_payload(g, make_qam(16), 3);
  TargetScene s;
  s.carrier = carrier_for(g);
  const CVec y = apply_scene(g, s, 1);
  CHECK(std::abs(compute_periodogram(g, y, mask_pilots()).used_re_fraction - pilot_fraction(g)) < 1e-12);
  CHECK(compute_periodogram(g, y, mask_all()).used_re_fraction == doctest::Approx(1.0));
}

TEST_CASE("detection rate limits") {
  const ResourceGrid g = lattice_grid();
  const TargetScene s = scene_for(g, 17.0, 5.0);
  DetectionConfig dc;
  dc.trials = 100;
  dc.seed = 5;
  const std::vector<double> high{20.0};
  for (const auto& mask : {mask_all(), mask_pilots()}) CHECK(detection_rate(g, s, mask, high, dc)[0].pd == 1.0);

  TargetScene null = s;
  null.targets[0].amplitude = 0.0;
  const std::vector<double> snr{0.0};
  CHECK(detection_rate(g, null, mask_all(), snr, dc)[0].pd <= 0.02);

  const std::vector<DetectionPoint> curve{{-10.0, 0.1}, {-8.0, 0.5}, {-6.0, 0.95}};
  CHECK(snr_at_pd(curve, 0.5) == doctest::Approx(-8.0));
  CHECK(snr_at_pd(curve, 0.9) == doctest::Approx(-6.0 - 2.0 * 0.05 / 0.45));
  CHECK_THROWS_AS(snr_at_pd(curve, 0.99), OutOfRange);
}

TEST_CASE("scene validation") {
  const ResourceGrid g = lattice_grid();
  TargetScene s = scene_for(g, 0.0, 0.0);
  s.targets[0].delay_s = 2.0 * s.max_delay_s();
  CHECK_THROWS_AS(apply_scene(g, s, 1), InvalidParameter);
  s = scene_for(g, 0.0, 0.0);
  s.noise_power = -1.0;
  CHECK_THROWS_AS(apply_scene(g, s, 1), InvalidParameter);
}
