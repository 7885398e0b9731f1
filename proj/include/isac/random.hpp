#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace isac {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream `index` under `master`. Independent of how many other
/// streams exist, so growing a trial count leaves earlier trials untouched.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
template <class Gen>
std::complex<double> complex_gaussian(Gen& gen, double variance) {
  std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
  double re = nd(gen);
  double im = nd(gen);
  return {re, im};
}

}  // namespace isac
