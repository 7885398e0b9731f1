#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "isac/common.hpp"

namespace isac {

enum class BasisKind { SC, OFDM, CDMA, OTFS, AFDM };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& s);

/// An N x N unitary modulation basis.
///
/// The transform U maps a length-N symbol vector to N time-domain samples
/// (samples = U * symbols). All kinds are applied through fast transforms;
/// basis_matrix() materializes U when a dense view is needed.
///
///  SC    U = I
///  OFDM  U = F^H                            (unitary IDFT)
///  CDMA  U = D H / sqrt(N)                  (Walsh-Hadamard, random +-1 D)
///  OTFS  ISFFT on an M x Nd delay-Doppler grid, then a per-symbol unitary
///        IDFT (rectangular pulse, no cyclic prefix)
///  AFDM  U = L(c1)^H F^H L(c2)^H,  L(c) = diag(exp(-j 2 pi c n^2))
struct ModulationBasis {
  BasisKind kind = BasisKind::OFDM;
  std::size_t n = 0;
  // OTFS grid; n == m_delay * n_doppler.
  std::size_t m_delay = 0;
  std::size_t n_doppler = 0;
  // AFDM chirp parameters.
  double c1 = 0.0;
  double c2 = 0.0;
  // CDMA scrambler seed.
  std::uint64_t scramble_seed = 0;

  static ModulationBasis sc(std::size_t n);
  static ModulationBasis ofdm(std::size_t n);
  static ModulationBasis cdma(std::size_t n, std::uint64_t scramble_seed = 1);
  static ModulationBasis otfs(std::size_t m_delay, std::size_t n_doppler);
  /// AFDM with c1 = (2*alpha+1)/(2N) for alpha = 1 and c2 = 0.
  static ModulationBasis afdm(std::size_t n);
  static ModulationBasis afdm(std::size_t n, double c1, double c2);

  /// Throws InvalidParameter when the fields violate the kind's constraints.
  void validate() const;
  std::string label() const;
};

/// Symbols and the samples they produce under one basis.
struct BasebandFrame {
  CVec symbols;
  CVec samples;
  ModulationBasis basis;
};

/// In-place application of U (forward) or U^H (inverse).
void apply_basis(const ModulationBasis& b, std::span<Complex> data);
void apply_basis_inverse(const ModulationBasis& b, std::span<Complex> data);

BasebandFrame modulate(const ModulationBasis& b, CVec symbols);
CVec demodulate(const ModulationBasis& b, std::span<const Complex> samples);

/// Dense U; column j is U applied to the j-th unit vector.
Eigen::MatrixXcd basis_matrix(const ModulationBasis& b);

/// max |U^H U - I| over all entries.
double unitarity_residual(const ModulationBasis& b);

/// Walsh-Hadamard transform (natural order, unnormalized), in place.
void fwht(std::span<Complex> data);

}  // namespace isac
