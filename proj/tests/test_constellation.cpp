#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <variant>

#include "doctest.h"
#include "isac/constellation.hpp"
#include "isac/random.hpp"

using namespace isac;

namespace {

// True when `b` equals `a` rotated by some common phase, as point sets.
bool same_up_to_rotation(const Constellation& a, const Constellation& b) {
  if (a.size() != b.size()) return false;
  const CVec& pa = a.points();
  const CVec& pb = b.points();
  for (const Complex& anchor : pb) {
    const Complex rot = anchor / pa.front();
    bool all = true;
    for (const Complex& p : pa) {
      const Complex q = p * rot;
      all = all && std::any_of(pb.begin(), pb.end(), [&](const Complex& r) { return std::abs(q - r) < 1e-12; });
    }
    if (all) return true;
  }
  return false;
}

double lambda_of(const ShapingSpec& s) {
  if (const auto* mb = std::get_if<ShapingSpec::MaxwellBoltzmann>(&s.kind)) return mb->lambda;
  if (std::holds_alternative<ShapingSpec::Uniform>(s.kind)) return 0.0;
  return -1.0;
}

void check_normalized(const Constellation& c) {
  double power = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    power += c.probs()[i] * std::norm(c.points()[i]);
    mass += c.probs()[i];
  }
  CHECK(std::abs(power - 1.0) < 1e-12);
  CHECK(std::abs(mass - 1.0) < 1e-12);
}

}  // namespace

TEST_CASE("psk points") {
  const auto b = make_psk(2);
  REQUIRE(b.size() == 2);
  CHECK(std::abs(b.points()[0] - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(b.points()[1] - Complex(-1, 0)) < 1e-15);
  CHECK(b.probs()[0] == doctest::Approx(0.5));
  CHECK(b.probs()[1] == doctest::Approx(0.5));

  const auto q = make_psk(4);
  const std::array<Complex, 4> expect{Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
  for (const Complex& e : expect)
    CHECK(std::any_of(q.points().begin(), q.points().end(), [&](const Complex& p) { return std::abs(p - e) < 1e-12; }));
}

TEST_CASE("psk kurtosis is one for every order") {
  for (int m : {2, 4, 8, 16, 32, 64}) CHECK(std::abs(kurtosis(make_psk(m)) - 1.0) < 1e-12);
}

TEST_CASE("qam kurtosis by enumeration") {
  CHECK(std::abs(kurtosis(make_qam(16)) - 1.32) < 1e-12);
  CHECK(std::abs(kurtosis(make_qam(64)) - 2436.0 / 1764.0) < 1e-12);
  CHECK(same_up_to_rotation(make_qam(4), make_psk(4)));
}

TEST_CASE("apsk") {
  const std::array<ApskRing, 1> one{{{4, 1.0}}};
  CHECK(same_up_to_rotation(make_apsk(one), make_psk(4)));

  const std::array<ApskRing, 2> two{{{4, 1.0}, {12, 2.75}}};
  const double k = kurtosis(make_apsk(two));
  CHECK(k > 1.0);
  CHECK(k < 2.0);

  const std::array<ApskRing, 2> dup{{{4, 1.0}, {4, 1.0}}};
  CHECK_THROWS_AS(make_apsk(dup), InvalidParameter);
  const std::array<ApskRing, 2> decreasing{{{4, 2.0}, {4, 1.0}}};
  CHECK_THROWS_AS(make_apsk(decreasing), InvalidParameter);
  CHECK_THROWS_AS(make_apsk(std::span<const ApskRing>{}), InvalidParameter);
}

TEST_CASE("maxwell-boltzmann shaping") {
  const auto qam = make_qam(16);
  const auto flat = apply_shaping(qam, ShapingSpec::maxwell_boltzmann(0.0));
  for (double p : flat.probs()) CHECK(p == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  CHECK(std::abs(kurtosis(flat) - 1.32) < 1e-12);

  // Mass on the four inner points; oracle from enumeration of the shaped pmf.
  const auto steep = apply_shaping(qam, ShapingSpec::maxwell_boltzmann(10.0));
  double inner_mass = 0.0;
  double min_r2 = 1e9;
  for (const Complex& p : qam.points()) min_r2 = std::min(min_r2, std::norm(p));
  for (std::size_t i = 0; i < qam.size(); ++i)
    if (std::abs(std::norm(qam.points()[i]) - min_r2) < 1e-12) inner_mass += steep.probs()[i];
  CHECK(inner_mass > 0.99);
  CHECK(std::abs(kurtosis(steep) - 1.010670276209429) < 1e-12);
  CHECK(std::abs(kurtosis(apply_shaping(qam, ShapingSpec::maxwell_boltzmann(20.0))) - 1.000003601118296) < 1e-12);
  check_normalized(steep);
}

TEST_CASE("maxwell-boltzmann kurtosis sweep on 16-QAM") {
  // Enumeration oracle on the unnormalized grid {+-1, +-3}^2.
  auto oracle = [](double lambda) {
    double z = 0.0, m2 = 0.0, m4 = 0.0;
    for (int a = -3; a <= 3; a += 2)
      for (int b = -3; b <= 3; b += 2) {
        const double r2 = (a * a + b * b) / 10.0;
        const double w = std::exp(-lambda * r2);
        z += w;
        m2 += w * r2;
        m4 += w * r2 * r2;
      }
    return (m4 / z) / ((m2 / z) * (m2 / z));
  };
  const auto qam = make_qam(16);
  std::vector<double> curve;
  for (int i = 0; i <= 80; ++i) {
    const double lambda = 0.25 * i;
    const double k = kurtosis(apply_shaping(qam, ShapingSpec::maxwell_boltzmann(lambda)));
    CHECK(std::abs(k - oracle(lambda)) < 1e-12);
    curve.push_back(k);
  }
  // Shaping first raises the kurtosis toward the Gaussian value, then
  // collapses the mass onto the inner ring.
  const auto peak = std::max_element(curve.begin(), curve.end());
  CHECK(peak != curve.begin());
  CHECK(peak != curve.end() - 1);
  CHECK(*peak < 2.0);
  CHECK(std::is_sorted(curve.begin(), peak + 1));
  CHECK(std::is_sorted(peak, curve.end(), std::greater<>()));
  const auto range = mb_kurtosis_range(qam);
  CHECK(range.first < 1.01);
  CHECK(std::abs(range.second - *peak) < 1e-3);
}

TEST_CASE("shape_for_kurtosis") {
  const auto qam = make_qam(16);
  CHECK(lambda_of(shape_for_kurtosis(qam, kurtosis(qam), 1e-6)) == 0.0);
  CHECK(lambda_of(shape_for_kurtosis(qam, kurtosis(qam), 0.1)) == 0.0);

  const auto near_one = shape_for_kurtosis(qam, 1.0, 1e-3);
  CHECK(lambda_of(near_one) > 3.0);
  CHECK(std::abs(kurtosis(apply_shaping(qam, near_one)) - 1.0) <= 1e-3);

  CHECK_THROWS_AS(shape_for_kurtosis(qam, 3.0, 1e-3), OutOfRange);
  try {
    shape_for_kurtosis(qam, 3.0, 1e-3);
  } catch (const OutOfRange& e) {
    CHECK(e.hi() < 3.0);
    CHECK(e.lo() <= 1.0 + 1e-3);
  }
}

TEST_CASE("complex gaussian sample kurtosis") {
  Rng rng(2024);
  CVec z(1'000'000);
  for (auto& v : z) v = complex_gaussian(rng, 1.0);
  CHECK(std::abs(sample_kurtosis(z) - 2.0) < 0.02);
  CHECK(classify_kurtosis(2.0) == GaussianClass::Gaussian);
  CHECK(classify_kurtosis(1.32) == GaussianClass::SubGaussian);
  CHECK(classify_kurtosis(2.5) == GaussianClass::SuperGaussian);
}

TEST_CASE("sample_symbols") {
  const auto qam = make_qam(16);
  const CVec x = sample_symbols(qam, 100'000, 7);
  double power = 0.0;
  for (const Complex& v : x) power += std::norm(v);
  power /= static_cast<double>(x.size());
  CHECK(std::abs(power - 1.0) < 0.01);
  CHECK(std::abs(sample_kurtosis(x) - 1.32) < 0.02);

  CHECK(sample_symbols(qam, 1000, 9) == sample_symbols(qam, 1000, 9));
  CHECK(sample_symbols(qam, 1000, 9) != sample_symbols(qam, 1000, 10));

  for (const Complex& v : sample_symbols(make_psk(2), 1000, 3)) {
    CHECK(v.imag() == doctest::Approx(0.0));
    CHECK(std::abs(std::abs(v.real()) - 1.0) < 1e-15);
  }
}

TEST_CASE("every constructed constellation is normalized") {
  check_normalized(make_psk(8));
  check_normalized(make_qam(64));
  check_normalized(make_qam(256));
  const std::array<ApskRing, 2> rings{{{4, 1.0}, {12, 2.7}}};
  check_normalized(make_apsk(rings));
  check_normalized(apply_shaping(make_qam(64), ShapingSpec::maxwell_boltzmann(1.3)));
  check_normalized(Constellation::from_points("custom", {Complex(3, 0), Complex(0, 1)}, {0.25, 0.75}));
}

TEST_CASE("json round trip") {
  const auto c = apply_shaping(make_qam(16), ShapingSpec::maxwell_boltzmann(0.7));
  const auto back = constellation_from_json(to_json(c));
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(std::abs(back.points()[i] - c.points()[i]) < 1e-12);
    CHECK(std::abs(back.probs()[i] - c.probs()[i]) < 1e-12);
  }
}

TEST_CASE("invalid orders") {
  CHECK_THROWS_AS(make_psk(1), InvalidParameter);
  CHECK_THROWS_AS(make_qam(8), InvalidParameter);
  CHECK_THROWS_AS(sample_symbols(make_psk(4), 0, 1), InvalidParameter);
}
