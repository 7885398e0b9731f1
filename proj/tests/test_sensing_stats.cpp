#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "isac/sensing_stats.hpp"

using namespace isac;

namespace {

double far_mean(const AcfResult& r) { return far_region_mean(r.stats, r.stats.mean_sq_acf); }

AcfExperiment experiment(const Constellation& c, const ModulationBasis& b, std::size_t trials,
                         std::size_t integrations = 1, std::uint64_t seed = 1) {
  AcfExperiment e;
  e.constellation = c;
  e.basis = b;
  e.trials = trials;
  e.integrations = integrations;
  e.seed = seed;
  return e;
}

}  // namespace

TEST_CASE("pacf of a constant is one at every lag") {
  const CVec s(32, Complex(1.0, 0.0));
  for (const Complex& r : pacf(s)) CHECK(std::abs(r - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("ofdm-psk frames have zero periodic sidelobes") {
  for (int order : {2, 4, 8})
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const CVec s = modulate(ModulationBasis::ofdm(256), sample_symbols(make_psk(order), 256, seed)).samples;
      const CVec r = pacf(s);
      CHECK(std::abs(r[0] - Complex(1.0, 0.0)) < 1e-12);
      for (std::size_t l = 1; l < r.size(); ++l) CHECK(std::abs(r[l]) < 1e-12);
    }
}

TEST_CASE("ofdm pacf equals the scaled idft of subcarrier powers") {
  const std::size_t n = 128;
  const CVec x = sample_symbols(make_qam(16), n, 4);
  const CVec s = modulate(ModulationBasis::ofdm(n), x).samples;
  const CVec r = pacf(s);
  for (std::size_t l = 0; l < n; ++l) {
    Complex ref{};
    for (std::size_t k = 0; k < n; ++k)
      ref += std::norm(x[k]) * std::polar(1.0, -kTwoPi * static_cast<double>(k * l % n) / static_cast<double>(n));
    ref /= static_cast<double>(n);
    CHECK(std::min(std::abs(r[l] - ref), std::abs(r[l] - std::conj(ref))) < 1e-12);
  }
}

TEST_CASE("single-carrier squared sidelobes average to 1/N") {
  const std::size_t n = 64;
  const auto r = avg_squared_acf(experiment(make_qam(16), ModulationBasis::sc(n), 10000));
  CHECK(std::abs(far_mean(r) * n - 1.0) < 0.03);
}

TEST_CASE("aperiodic acf") {
  const CVec imp{Complex(1.0, 0.0)};
  const CVec d = aperiodic_acf(imp);
  REQUIRE(d.size() == 1);
  CHECK(std::abs(d[0] - Complex(1.0, 0.0)) < 1e-15);

  const std::size_t n = 16;
  const CVec rect(n, Complex(1.0, 0.0));
  const CVec tri = aperiodic_acf(rect);
  REQUIRE(tri.size() == 2 * n - 1);
  for (std::size_t i = 0; i < tri.size(); ++i) {
    const double lag = std::abs(static_cast<double>(i) - static_cast<double>(n - 1));
    CHECK(std::abs(tri[i] - Complex(1.0 - lag / n, 0.0)) < 1e-12);
  }

  PulseFilter p;
  const CVec one{Complex(1.0, 0.0)};
  const CVec a = aperiodic_acf(shape(p, one));
  const auto pa = pulse_acf(p);
  const std::size_t mid = a.size() / 2;
  for (int lag : pa.lags) CHECK(std::abs(a[mid + lag].real() - pa.at(lag)) < 1e-12);
}

TEST_CASE("ambiguity function") {
  const std::size_t n = 64;
  const CVec s = modulate(ModulationBasis::sc(n), sample_symbols(make_qam(16), n, 8)).samples;
  const auto a = ambiguity_function(s, 16);
  const std::size_t z = a.zero_doppler_index();
  const std::size_t d0 = a.zero_delay_index();
  CHECK(a.at(d0, z) == doctest::Approx(1.0));
  CHECK(*std::max_element(a.power.begin(), a.power.end()) == doctest::Approx(1.0));

  const CVec r = pacf(s);
  const double r0 = std::norm(r[0]);
  for (std::size_t d = 0; d < a.delays.size(); ++d) {
    const auto lag = static_cast<std::size_t>((a.delays[d] + static_cast<int>(n)) % static_cast<int>(n));
    CHECK(std::abs(a.at(d, z) - std::norm(r[lag]) / r0) < 1e-12);
  }

  const CVec o = modulate(ModulationBasis::ofdm(n), sample_symbols(make_psk(4), n, 9)).samples;
  const auto ao = ambiguity_function(o, 8);
  for (std::size_t d = 0; d < ao.delays.size(); ++d)
    if (ao.delays[d] != 0) CHECK(ao.at(d, ao.zero_doppler_index()) < 1e-20);

  CHECK_THROWS_AS(ambiguity_function(s, 0), InvalidParameter);
}

TEST_CASE("ofdm 16-QAM sidelobe floor equals (kappa - 1) / N") {
  const std::size_t n = 1024;
  const auto r = avg_squared_acf(experiment(make_qam(16), ModulationBasis::ofdm(n), 10000));
  const double floor_db = to_db(far_mean(r));
  CHECK(std::abs(floor_db - to_db(0.32 / 1024.0)) < 0.5);
  CHECK(std::abs(r.stats.psl_db - to_db(0.32 / 1024.0)) < 0.5);
}

TEST_CASE("coherent integration lowers the sea level by 1/K") {
  const std::size_t n = 256;
  const auto r1 = avg_squared_acf(experiment(make_qam(16), ModulationBasis::ofdm(n), 400, 1, 5));
  const auto r10 = avg_squared_acf(experiment(make_qam(16), ModulationBasis::ofdm(n), 400, 10, 5));
  const auto r100 = avg_squared_acf(experiment(make_qam(16), ModulationBasis::ofdm(n), 400, 100, 5));
  const double s1 = far_region_mean(r1.stats, r1.decomposition.sea_level);
  CHECK(std::abs(far_region_mean(r10.stats, r10.decomposition.sea_level) / s1 * 10.0 - 1.0) < 0.1);
  CHECK(std::abs(far_region_mean(r100.stats, r100.decomposition.sea_level) / s1 * 100.0 - 1.0) < 0.1);
  const double drop = to_db(far_mean(r1)) - to_db(far_mean(r100));
  CHECK(std::abs(drop - 20.0) < 1.0);
}

TEST_CASE("ofdm psk floor is numerically zero for any K") {
  for (std::size_t k : {1u, 10u}) {
    const auto r = avg_squared_acf(experiment(make_psk(4), ModulationBasis::ofdm(256), 50, k));
    CHECK(to_db(far_mean(r)) < -200.0);
  }
}

TEST_CASE("decomposition is consistent") {
  const auto r = avg_squared_acf(experiment(make_qam(16), ModulationBasis::sc(64), 2000, 1, 3));
  const auto& d = r.decomposition;
  REQUIRE(d.total.size() == d.iceberg.size());
  for (std::size_t i = 0; i < d.total.size(); ++i) {
    const double band = 3.0 * std::sqrt(std::max(r.stats.var_acf[i], 1e-30) / 2000.0) + 1e-12;
    CHECK(std::abs(d.total[i] - d.iceberg[i] - d.sea_level[i]) <= band + 1e-12);
  }
}

TEST_CASE("sidelobe metrics") {
  AcfStats delta;
  delta.lags = {-2, -1, 0, 1, 2};
  delta.mean_sq_acf = {0.0, 0.0, 1.0, 0.0, 0.0};
  const auto m = sidelobe_metrics(delta, 1);
  CHECK(m.psl_db == kDbFloor);
  CHECK(m.isl_db == kDbFloor);

  AcfStats flat;
  const int n = 1024;
  for (int l = -n / 2; l < n / 2; ++l) {
    flat.lags.push_back(l);
    flat.mean_sq_acf.push_back(l == 0 ? 1.0 : 3.125e-4);
  }
  const auto f = sidelobe_metrics(flat, 1);
  CHECK(f.psl_db == doctest::Approx(to_db(3.125e-4)));
  CHECK(std::abs(f.isl_db - 10.0 * std::log10(1023.0 * 3.125e-4)) < 1e-9);
  CHECK(std::abs(f.isl_db - (-4.95)) < 0.01);
}

TEST_CASE("basis ranking") {
  const std::size_t n = 256;
  const std::vector<ModulationBasis> bases{ModulationBasis::sc(n), ModulationBasis::ofdm(n), ModulationBasis::cdma(n),
                                           ModulationBasis::otfs(16, 16), ModulationBasis::afdm(n)};
  const auto qam = rank_bases(make_qam(16), bases, 500, 3);
  REQUIRE(qam.size() == bases.size());
  CHECK(qam.front().basis.kind == BasisKind::OFDM);
  for (std::size_t i = 1; i < qam.size(); ++i) CHECK(qam[i - 1].isl_linear <= qam[i].isl_linear);

  const auto psk = rank_bases(make_psk(4), bases, 50, 3);
  CHECK(psk.front().basis.kind == BasisKind::OFDM);
  CHECK(psk.front().isl_db == kDbFloor);
  for (const auto& r : psk) CHECK(r.isl_db >= psk.front().isl_db);

  const std::vector<ModulationBasis> one{ModulationBasis::cdma(n)};
  const auto single = rank_bases(make_qam(16), one, 10, 3);
  REQUIRE(single.size() == 1);
  CHECK(single.front().basis.kind == BasisKind::CDMA);
}

TEST_CASE("determinism and budget") {
  const auto cfg = experiment(make_qam(16), ModulationBasis::ofdm(128), 64, 2, 17);
  auto single = cfg;
  single.threads = 1;
  CHECK(avg_squared_acf(cfg).stats.mean_sq_acf == avg_squared_acf(single).stats.mean_sq_acf);

  auto heavy = cfg;
  heavy.sample_budget = 1000.0;
  CHECK_THROWS_AS(avg_squared_acf(heavy), BudgetExceeded);
  auto none = cfg;
  none.trials = 0;
  CHECK_THROWS_AS(avg_squared_acf(none), InvalidParameter);
}
