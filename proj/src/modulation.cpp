#include "isac/modulation.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "isac/fft.hpp"
#include "isac/random.hpp"

namespace isac {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_length(const ModulationBasis& b, std::size_t len, const char* where) {
  if (len != b.n) {
    std::ostringstream os;
    os << where << ": expected " << b.n << " samples, got " << len;
    throw InvalidParameter(os.str());
  }
}

// exp(j * sign * 2 pi c n^2), reducing c n^2 mod 1 first.
Complex chirp(double c, std::size_t n, double sign) {
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  double frac = std::fmod(c * nn, 1.0);
  return std::polar(1.0, sign * kTwoPi * frac);
}

RVec scrambler(const ModulationBasis& b) {
  Rng rng(derive_seed(b.scramble_seed, 0xCD));
  std::bernoulli_distribution coin(0.5);
  RVec d(b.n);
  for (auto& v : d) v = coin(rng) ? 1.0 : -1.0;
  return d;
}

// Delay-Doppler grid stored row-major over delay: dd[l * Nd + k].
// Time samples stored symbol-major: s[n * M + t].
void otfs_forward(const ModulationBasis& b, std::span<Complex> data) {
  const std::size_t m = b.m_delay;
  const std::size_t nd = b.n_doppler;
  const Fft& fm = thread_fft(m);
  const Fft& fn = thread_fft(nd);
  CVec row(nd), col(m);
  // ISFFT, Doppler axis: IDFT over k for each delay l.
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t k = 0; k < nd; ++k) row[k] = data[l * nd + k];
    fn.inverse_unitary(row);
    for (std::size_t k = 0; k < nd; ++k) data[l * nd + k] = row[k];
  }
  // ISFFT delay axis (DFT l -> subcarrier m), then the rectangular-pulse
  // Heisenberg transform (IDFT m -> time t). The pair composes to identity.
  CVec out(b.n);
  for (std::size_t n = 0; n < nd; ++n) {
    for (std::size_t l = 0; l < m; ++l) col[l] = data[l * nd + n];
    fm.forward_unitary(col);
    fm.inverse_unitary(col);
    for (std::size_t t = 0; t < m; ++t) out[n * m + t] = col[t];
  }
  std::copy(out.begin(), out.end(), data.begin());
}

void otfs_inverse(const ModulationBasis& b, std::span<Complex> data) {
  const std::size_t m = b.m_delay;
  const std::size_t nd = b.n_doppler;
  const Fft& fm = thread_fft(m);
  const Fft& fn = thread_fft(nd);
  CVec row(nd), col(m);
  CVec dd(b.n);
  for (std::size_t n = 0; n < nd; ++n) {
    for (std::size_t t = 0; t < m; ++t) col[t] = data[n * m + t];
    fm.forward_unitary(col);
    fm.inverse_unitary(col);
    for (std::size_t l = 0; l < m; ++l) dd[l * nd + n] = col[l];
  }
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t k = 0; k < nd; ++k) row[k] = dd[l * nd + k];
    fn.forward_unitary(row);
    for (std::size_t k = 0; k < nd; ++k) data[l * nd + k] = row[k];
  }
}

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::SC: return "SC";
    case BasisKind::OFDM: return "OFDM";
    case BasisKind::CDMA: return "CDMA";
    case BasisKind::OTFS: return "OTFS";
    case BasisKind::AFDM: return "AFDM";
  }
  return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
  std::string u;
  for (char ch : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  if (u == "SC") return BasisKind::SC;
  if (u == "OFDM") return BasisKind::OFDM;
  if (u == "CDMA") return BasisKind::CDMA;
  if (u == "OTFS") return BasisKind::OTFS;
  if (u == "AFDM") return BasisKind::AFDM;
  throw InvalidParameter("unknown basis kind '" + s + "'");
}

ModulationBasis ModulationBasis::sc(std::size_t n) {
  ModulationBasis b;
  b.kind = BasisKind::SC;
  b.n = n;
  b.validate();
  return b;
}

ModulationBasis ModulationBasis::ofdm(std::size_t n) {
  ModulationBasis b;
  b.kind = BasisKind::OFDM;
  b.n = n;
  b.validate();
  return b;
}

ModulationBasis ModulationBasis::cdma(std::size_t n, std::uint64_t scramble_seed) {
  ModulationBasis b;
  b.kind = BasisKind::CDMA;
  b.n = n;
  b.scramble_seed = scramble_seed;
  b.validate();
  return b;
}

ModulationBasis ModulationBasis::otfs(std::size_t m_delay, std::size_t n_doppler) {
  ModulationBasis b;
  b.kind = BasisKind::OTFS;
  b.n = m_delay * n_doppler;
  b.m_delay = m_delay;
  b.n_doppler = n_doppler;
  b.validate();
  return b;
}

ModulationBasis ModulationBasis::afdm(std::size_t n) {
  return afdm(n, 3.0 / (2.0 * static_cast<double>(n)), 0.0);
}

ModulationBasis ModulationBasis::afdm(std::size_t n, double c1, double c2) {
  ModulationBasis b;
  b.kind = BasisKind::AFDM;
  b.n = n;
  b.c1 = c1;
  b.c2 = c2;
  b.validate();
  return b;
}

void ModulationBasis::validate() const {
  if (n < 1) throw InvalidParameter("basis: size n must be >= 1");
  switch (kind) {
    case BasisKind::CDMA:
      if (!is_power_of_two(n)) throw InvalidParameter("basis: CDMA requires n to be a power of two");
      break;
    case BasisKind::OTFS:
      if (m_delay == 0 || n_doppler == 0 || m_delay * n_doppler != n)
        throw InvalidParameter("basis: OTFS requires n == m_delay * n_doppler");
      break;
    case BasisKind::AFDM:
      if (!std::isfinite(c1) || !std::isfinite(c2))
        throw InvalidParameter("basis: AFDM chirp parameters must be finite");
      break;
    default:
      break;
  }
}

std::string ModulationBasis::label() const {
  std::ostringstream os;
  os << to_string(kind);
  if (kind == BasisKind::OTFS) os << "(" << m_delay << "x" << n_doppler << ")";
  if (kind == BasisKind::AFDM) os << "(c1=" << c1 << ",c2=" << c2 << ")";
  return os.str();
}

void fwht(std::span<Complex> data) {
  const std::size_t n = data.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const Complex a = data[j];
        const Complex c = data[j + h];
        data[j] = a + c;
        data[j + h] = a - c;
      }
    }
  }
}

void apply_basis(const ModulationBasis& b, std::span<Complex> data) {
  require_length(b, data.size(), "modulate");
  switch (b.kind) {
    case BasisKind::SC:
      return;
    case BasisKind::OFDM:
      thread_fft(b.n).inverse_unitary(data);
      return;
    case BasisKind::CDMA: {
      fwht(data);
      const RVec d = scrambler(b);
      const double s = 1.0 / std::sqrt(static_cast<double>(b.n));
      for (std::size_t i = 0; i < b.n; ++i) data[i] *= d[i] * s;
      return;
    }
    case BasisKind::OTFS:
      otfs_forward(b, data);
      return;
    case BasisKind::AFDM:
      for (std::size_t i = 0; i < b.n; ++i) data[i] *= chirp(b.c2, i, +1.0);
      thread_fft(b.n).inverse_unitary(data);
      for (std::size_t i = 0; i < b.n; ++i) data[i] *= chirp(b.c1, i, +1.0);
      return;
  }
}

void apply_basis_inverse(const ModulationBasis& b, std::span<Complex> data) {
  require_length(b, data.size(), "demodulate");
  switch (b.kind) {
    case BasisKind::SC:
      return;
    case BasisKind::OFDM:
      thread_fft(b.n).forward_unitary(data);
      return;
    case BasisKind::CDMA: {
      // (D H / sqrt N)^H = H D / sqrt N since H and D are real symmetric.
      const RVec d = scrambler(b);
      const double s = 1.0 / std::sqrt(static_cast<double>(b.n));
      for (std::size_t i = 0; i < b.n; ++i) data[i] *= d[i] * s;
      fwht(data);
      return;
    }
    case BasisKind::OTFS:
      otfs_inverse(b, data);
      return;
    case BasisKind::AFDM:
      for (std::size_t i = 0; i < b.n; ++i) data[i] *= chirp(b.c1, i, -1.0);
      thread_fft(b.n).forward_unitary(data);
      for (std::size_t i = 0; i < b.n; ++i) data[i] *= chirp(b.c2, i, -1.0);
      return;
  }
}

BasebandFrame modulate(const ModulationBasis& b, CVec symbols) {
  BasebandFrame f;
  f.samples = symbols;
  apply_basis(b, f.samples);
  f.symbols = std::move(symbols);
  f.basis = b;
  return f;
}

CVec demodulate(const ModulationBasis& b, std::span<const Complex> samples) {
  CVec out(samples.begin(), samples.end());
  apply_basis_inverse(b, out);
  return out;
}

Eigen::MatrixXcd basis_matrix(const ModulationBasis& b) {
  b.validate();
  const auto n = static_cast<Eigen::Index>(b.n);
  Eigen::MatrixXcd u(n, n);
  CVec e(b.n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), Complex{});
    e[static_cast<std::size_t>(j)] = 1.0;
    apply_basis(b, e);
    for (Eigen::Index i = 0; i < n; ++i) u(i, j) = e[static_cast<std::size_t>(i)];
  }
  return u;
}

double unitarity_residual(const ModulationBasis& b) {
  const Eigen::MatrixXcd u = basis_matrix(b);
  Eigen::MatrixXcd g = u.adjoint() * u;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

}  // namespace isac
