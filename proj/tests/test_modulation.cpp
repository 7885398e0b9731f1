#include <cmath>
#include <numeric>

#include "doctest.h"
#include "isac/constellation.hpp"
#include "isac/modulation.hpp"

using namespace isac;

namespace {

std::vector<ModulationBasis> all_kinds(std::size_t n) {
  const auto m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  return {ModulationBasis::sc(n), ModulationBasis::ofdm(n), ModulationBasis::cdma(n, 5),
          ModulationBasis::otfs(m, n / m), ModulationBasis::afdm(n)};
}

double max_err(const CVec& a, const CVec& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace

TEST_CASE("single-carrier basis is the identity") {
  const CVec x = sample_symbols(make_qam(16), 64, 3);
  CHECK(modulate(ModulationBasis::sc(64), x).samples == x);
}

TEST_CASE("ofdm columns and impulse") {
  const std::size_t n = 256;
  CVec e0(n);
  e0[0] = 1.0;
  const CVec s = modulate(ModulationBasis::ofdm(n), e0).samples;
  for (const Complex& v : s) CHECK(std::abs(std::abs(v) - 1.0 / std::sqrt(n)) < 1e-12);

  const CVec ones(n, Complex(1.0, 0.0));
  const CVec imp = modulate(ModulationBasis::ofdm(n), ones).samples;
  CHECK(std::abs(imp[0] - Complex(std::sqrt(n), 0.0)) < 1e-10);
  for (std::size_t i = 1; i < n; ++i) CHECK(std::abs(imp[i]) < 1e-10);
}

TEST_CASE("afdm without chirps coincides with ofdm") {
  const std::size_t n = 64;
  const auto afdm = ModulationBasis::afdm(n, 0.0, 0.0);
  CHECK(unitarity_residual(afdm) == doctest::Approx(unitarity_residual(ModulationBasis::ofdm(n))));
  CHECK((basis_matrix(afdm) - basis_matrix(ModulationBasis::ofdm(n))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unitarity of every kind") {
  for (std::size_t n : {64u, 256u, 1024u})
    for (const auto& b : all_kinds(n)) {
      CAPTURE(b.label());
      CHECK(unitarity_residual(b) < 1e-10);
    }
}

TEST_CASE("energy preservation and round trip") {
  for (std::size_t n : {64u, 1024u})
    for (const auto& b : all_kinds(n)) {
      CAPTURE(b.label());
      const CVec x = sample_symbols(make_psk(4), n, 11);
      const CVec s = modulate(b, x).samples;
      const double energy =
          std::accumulate(s.begin(), s.end(), 0.0, [](double a, const Complex& v) { return a + std::norm(v); });
      CHECK(std::abs(energy - static_cast<double>(n)) < 1e-9);

      const CVec q = sample_symbols(make_qam(16), n, 12);
      CHECK(max_err(demodulate(b, modulate(b, q).samples), q) < 1e-10);
    }
}

TEST_CASE("afdm round trip with custom chirps") {
  const auto b = ModulationBasis::afdm(1024, 3.0 / (2.0 * 1024.0), 1e-4);
  const CVec q = sample_symbols(make_qam(16), 1024, 21);
  CHECK(max_err(demodulate(b, modulate(b, q).samples), q) < 1e-10);
}

TEST_CASE("otfs 64x16 round trip") {
  const auto b = ModulationBasis::otfs(64, 16);
  CHECK(b.n == 1024);
  const CVec q = sample_symbols(make_qam(64), 1024, 22);
  CHECK(max_err(demodulate(b, modulate(b, q).samples), q) < 1e-10);
}

TEST_CASE("basis_matrix columns match apply_basis") {
  for (const auto& b : all_kinds(64)) {
    CAPTURE(b.label());
    const auto u = basis_matrix(b);
    CVec e(64);
    e[5] = 1.0;
    apply_basis(b, e);
    for (int i = 0; i < 64; ++i) CHECK(std::abs(u(i, 5) - e[static_cast<std::size_t>(i)]) < 1e-12);
  }
}

TEST_CASE("invalid bases") {
  CHECK_THROWS_AS(ModulationBasis::cdma(48).validate(), InvalidParameter);
  auto otfs = ModulationBasis::otfs(8, 8);
  otfs.n = 65;
  CHECK_THROWS_AS(otfs.validate(), InvalidParameter);
  CHECK_THROWS_AS(modulate(ModulationBasis::ofdm(64), CVec(63)), InvalidParameter);
}
