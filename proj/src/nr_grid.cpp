#include "isac/nr_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "isac/format.hpp"

namespace isac {
namespace {

constexpr std::size_t kGoldNc = 1600;
constexpr std::uint64_t kMod31 = 1ULL << 31;

// Maximal-length sequence of length 127 from a 7-bit recurrence
// x(i+7) = x(i+a) + x(i) (mod 2).
std::array<int, 127> m_sequence(std::array<int, 7> init, int tap) {
  std::array<int, 127 + 7> x{};
  std::copy(init.begin(), init.end(), x.begin());
  for (int i = 0; i < 127; ++i) x[i + 7] = (x[i + tap] + x[i]) % 2;
  std::array<int, 127> out{};
  std::copy_n(x.begin(), 127, out.begin());
  return out;
}

bool is_odd_prime(std::size_t n) {
  if (n < 3 || n % 2 == 0) return false;
  for (std::size_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

std::size_t occasions(const ResourceGrid& grid, int period_slots) {
  return grid.slots() / static_cast<std::size_t>(period_slots);
}

void warn_no_occasions(ResourceGrid& grid, const char* what, int period_slots) {
  std::ostringstream os;
  os << what << ": period of " << period_slots << " slots exceeds the grid (" << grid.slots()
     << " slots); nothing placed";
  grid.warn(os.str());
}

}  // namespace

std::string to_string(ReLabel label) {
  switch (label) {
    case ReLabel::Empty: return "EMPTY";
    case ReLabel::PSS: return "PSS";
    case ReLabel::SSS: return "SSS";
    case ReLabel::PBCH: return "PBCH";
    case ReLabel::DMRS: return "DMRS";
    case ReLabel::CSIRS: return "CSIRS";
    case ReLabel::SRS: return "SRS";
    case ReLabel::Data: return "DATA";
  }
  return "?";
}

ResourceGrid::ResourceGrid(std::size_t subcarriers, std::size_t symbols, int scs_khz)
    : subcarriers_(subcarriers),
      symbols_(symbols),
      scs_khz_(scs_khz),
      labels_(subcarriers * symbols, ReLabel::Empty),
      values_(subcarriers * symbols),
      reserved_(subcarriers * symbols, 0) {
  if (scs_khz != 15 && scs_khz != 30 && scs_khz != 60 && scs_khz != 120)
    throw InvalidParameter("grid: scs_khz must be one of 15, 30, 60, 120");
}

void ResourceGrid::place(std::size_t symbol, std::size_t subcarrier, ReLabel label, Complex value) {
  if (symbol >= symbols_ || subcarrier >= subcarriers_)
    throw InvalidParameter("grid: placement outside the grid");
  const std::size_t i = index(symbol, subcarrier);
  if (labels_[i] != ReLabel::Empty || reserved_[i]) {
    std::ostringstream os;
    os << "grid: " << to_string(label) << " collides with "
       << (reserved_[i] ? std::string("reserved SSB") : to_string(labels_[i])) << " at symbol " << symbol
       << ", subcarrier " << subcarrier;
    throw Collision(os.str());
  }
  labels_[i] = label;
  values_[i] = value;
}

void ResourceGrid::reserve(std::size_t symbol, std::size_t subcarrier) {
  const std::size_t i = index(symbol, subcarrier);
  if (labels_[i] != ReLabel::Empty || reserved_[i]) throw Collision("grid: reserving an occupied RE");
  reserved_[i] = 1;
}

std::size_t ResourceGrid::count(ReLabel label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::size_t ResourceGrid::reserved_count() const {
  return static_cast<std::size_t>(std::count(reserved_.begin(), reserved_.end(), 1));
}

std::size_t ResourceGrid::pilot_count() const {
  return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(), is_pilot));
}

RVec gold_sequence(std::uint32_t c_init, std::size_t length) {
  // Bit i of each register holds x(n + i).
  std::uint32_t x1 = 1;
  std::uint32_t x2 = c_init & 0x7FFFFFFFU;
  auto step = [&]() {
    const std::uint32_t n1 = (x1 ^ (x1 >> 3)) & 1U;
    const std::uint32_t n2 = (x2 ^ (x2 >> 1) ^ (x2 >> 2) ^ (x2 >> 3)) & 1U;
    x1 = (x1 >> 1) | (n1 << 30);
    x2 = (x2 >> 1) | (n2 << 30);
  };
  for (std::size_t n = 0; n < kGoldNc; ++n) step();
  RVec out(length);
  for (std::size_t n = 0; n < length; ++n) {
    out[n] = ((x1 ^ x2) & 1U) ? -1.0 : 1.0;
    step();
  }
  return out;
}

CVec gold_qpsk(std::uint32_t c_init, std::size_t count) {
  const RVec c = gold_sequence(c_init, 2 * count);
  CVec r(count);
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t m = 0; m < count; ++m) r[m] = {c[2 * m] * s, c[2 * m + 1] * s};
  return r;
}

CVec zadoff_chu(std::uint32_t u, std::uint32_t nzc) {
  if (nzc == 0 || nzc % 2 == 0) throw InvalidParameter("zadoff_chu: length must be odd");
  if (std::gcd(u, nzc) != 1) throw InvalidParameter("zadoff_chu: root must be coprime with the length");
  CVec x(nzc);
  for (std::uint64_t n = 0; n < nzc; ++n) {
    // u n (n+1) is even, so reduce the exponent mod 2 nzc exactly in integers.
    const std::uint64_t e = (static_cast<std::uint64_t>(u) * n % (2ULL * nzc)) * (n + 1) % (2ULL * nzc);
    x[n] = std::polar(1.0, -kPi * static_cast<double>(e) / nzc);
  }
  return x;
}

RVec pss_sequence(int nid2) {
  if (nid2 < 0 || nid2 > 2) throw InvalidParameter("pss: N_ID2 must be 0, 1 or 2");
  const auto x = m_sequence({0, 1, 1, 0, 1, 1, 1}, 4);
  RVec d(127);
  for (int n = 0; n < 127; ++n) d[n] = 1.0 - 2.0 * x[(n + 43 * nid2) % 127];
  return d;
}

RVec sss_sequence(int nid1, int nid2) {
  if (nid1 < 0 || nid1 > 335) throw InvalidParameter("sss: N_ID1 must lie in 0..335");
  if (nid2 < 0 || nid2 > 2) throw InvalidParameter("sss: N_ID2 must be 0, 1 or 2");
  const auto x0 = m_sequence({1, 0, 0, 0, 0, 0, 0}, 4);
  const auto x1 = m_sequence({1, 0, 0, 0, 0, 0, 0}, 1);
  const int m0 = 15 * (nid1 / 112) + 5 * nid2;
  const int m1 = nid1 % 112;
  RVec d(127);
  for (int n = 0; n < 127; ++n)
    d[n] = (1.0 - 2.0 * x0[(n + m0) % 127]) * (1.0 - 2.0 * x1[(n + m1) % 127]);
  return d;
}

std::uint32_t pbch_dmrs_cinit(int cell_id, int issb) {
  const auto i = static_cast<std::uint64_t>(issb);
  const auto nid = static_cast<std::uint64_t>(cell_id);
  return static_cast<std::uint32_t>((2048ULL * (i + 1) * (nid / 4 + 1) + 64ULL * (i + 1) + nid % 4) % kMod31);
}

void BurstConfig::validate() const {
  if (n_ssb < 0 || n_ssb > 64) throw InvalidParameter("burst: n_ssb must lie in 0..64");
  if (!(period_ms > 0.0)) throw InvalidParameter("burst: period_ms must be > 0");
  if (!(window_ms > 0.0) || window_ms > period_ms)
    throw InvalidParameter("burst: window_ms must lie in (0, period_ms]");
  if (cell_id < 0 || cell_id > 1007) throw InvalidParameter("burst: cell_id must lie in 0..1007");
  if (scs_khz != 15 && scs_khz != 30 && scs_khz != 60 && scs_khz != 120)
    throw InvalidParameter("burst: scs_khz must be one of 15, 30, 60, 120");
}

std::vector<int> ssb_start_symbols(int scs_khz, int n_ssb) {
  std::vector<int> all;
  switch (scs_khz) {
    case 15:  // case A
      for (int n = 0; n < 4; ++n)
        for (int s : {2, 8}) all.push_back(s + 14 * n);
      break;
    case 30:  // case B
      for (int n = 0; n < 2; ++n)
        for (int s : {4, 8, 16, 20}) all.push_back(s + 28 * n);
      break;
    case 120:  // case D
      for (int n = 0; n <= 18; ++n) {
        if (n % 5 == 4) continue;
        for (int s : {4, 8, 16, 20}) all.push_back(s + 28 * n);
      }
      break;
    default:
      throw InvalidParameter("ssb: no SSB pattern defined for " + std::to_string(scs_khz) + " kHz");
  }
  if (n_ssb < 0 || static_cast<std::size_t>(n_ssb) > all.size()) {
    std::ostringstream os;
    os << "ssb: " << n_ssb << " blocks requested but " << scs_khz << " kHz allows at most " << all.size();
    throw InvalidParameter(os.str());
  }
  all.resize(static_cast<std::size_t>(n_ssb));
  return all;
}

std::size_t symbols_in_ms(int scs_khz, double ms) {
  return static_cast<std::size_t>(std::llround(ms * kSymbolsPerSlot * scs_khz / 15.0));
}

void place_ssb_burst(ResourceGrid& grid, const BurstConfig& cfg) {
  cfg.validate();
  if (cfg.scs_khz != grid.scs_khz()) throw InvalidParameter("ssb: burst SCS differs from the grid SCS");
  if (cfg.n_ssb == 0) return;
  if (cfg.first_subcarrier + kSsbSubcarriers > grid.subcarriers())
    throw InvalidParameter("ssb: grid narrower than the 240-subcarrier SSB");

  const std::vector<int> starts = ssb_start_symbols(cfg.scs_khz, cfg.n_ssb);
  const std::size_t limit = std::min(grid.symbols(), symbols_in_ms(cfg.scs_khz, cfg.window_ms));
  if (static_cast<std::size_t>(starts.back() + kSsbSymbols) > limit) {
    std::ostringstream os;
    os << "ssb: block " << starts.size() - 1 << " ends at symbol " << starts.back() + kSsbSymbols
       << " beyond the " << limit << "-symbol burst window";
    throw InvalidParameter(os.str());
  }

  const int nid1 = cfg.cell_id / 3;
  const int nid2 = cfg.cell_id % 3;
  const RVec pss = pss_sequence(nid2);
  const RVec sss = sss_sequence(nid1, nid2);
  const auto v = static_cast<std::size_t>(cfg.cell_id % 4);
  const std::size_t k0 = cfg.first_subcarrier;

  for (std::size_t b = 0; b < starts.size(); ++b) {
    const auto l0 = static_cast<std::size_t>(starts[b]);
    // PBCH DMRS uses the 3 LSBs of the block index.
    const CVec dmrs = gold_qpsk(pbch_dmrs_cinit(cfg.cell_id, static_cast<int>(b % 8)), 144);
    // Payload bits are not coded; a cell-specific Gold stream stands in for them.
    const CVec pbch = gold_qpsk(static_cast<std::uint32_t>(cfg.cell_id) ^ (static_cast<std::uint32_t>(b) << 10), 432);
    std::size_t di = 0, pi = 0;

    auto pbch_re = [&](std::size_t l, std::size_t k) {
      if (k % 4 == v)
        grid.place(l0 + l, k0 + k, ReLabel::DMRS, dmrs[di++]);
      else
        grid.place(l0 + l, k0 + k, ReLabel::PBCH, pbch[pi++]);
    };

    for (std::size_t k = 0; k < kSsbSubcarriers; ++k) {
      if (k >= 56 && k <= 182)
        grid.place(l0, k0 + k, ReLabel::PSS, pss[k - 56]);
      else
        grid.reserve(l0, k0 + k);
    }
    for (std::size_t k = 0; k < kSsbSubcarriers; ++k) pbch_re(1, k);
    for (std::size_t k = 0; k < kSsbSubcarriers; ++k) {
      if (k >= 56 && k <= 182)
        grid.place(l0 + 2, k0 + k, ReLabel::SSS, sss[k - 56]);
      else if (k < 48 || k >= 192)
        pbch_re(2, k);
      else
        grid.reserve(l0 + 2, k0 + k);
    }
    for (std::size_t k = 0; k < kSsbSubcarriers; ++k) pbch_re(3, k);
  }
}

ResourceGrid build_ssb_burst(const BurstConfig& cfg, std::size_t subcarriers, std::size_t symbols) {
  ResourceGrid grid(subcarriers, symbols, cfg.scs_khz);
  place_ssb_burst(grid, cfg);
  return grid;
}

void place_dmrs(ResourceGrid& grid, const DmrsConfig& cfg) {
  std::set<int> symbols;
  for (const auto* list : {&cfg.positions, &cfg.additional}) {
    for (int l : *list) {
      if (l < 0 || l >= kSymbolsPerSlot) throw InvalidParameter("dmrs: symbol position outside the slot");
      if (!symbols.insert(l).second) throw InvalidParameter("dmrs: duplicate symbol position");
    }
  }
  if (cfg.scrambling_id < 0 || cfg.scrambling_id > 65535)
    throw InvalidParameter("dmrs: scrambling_id must lie in 0..65535");
  const auto nid = static_cast<std::uint64_t>(cfg.scrambling_id);
  const std::size_t per_symbol = (grid.subcarriers() + 1) / 2;
  for (std::size_t slot = 0; slot < grid.slots(); ++slot) {
    for (int l : symbols) {
      const std::uint64_t c = ((1ULL << 17) * (kSymbolsPerSlot * slot + static_cast<std::uint64_t>(l) + 1) *
                                   (2 * nid + 1) +
                               2 * nid) %
                              kMod31;
      const CVec r = gold_qpsk(static_cast<std::uint32_t>(c), per_symbol);
      const std::size_t sym = slot * kSymbolsPerSlot + static_cast<std::size_t>(l);
      for (std::size_t k = 0; k < grid.subcarriers(); k += 2) grid.place(sym, k, ReLabel::DMRS, r[k / 2]);
    }
  }
}

void place_csirs(ResourceGrid& grid, const CsiRsConfig& cfg) {
  int per_prb = 0;
  int prb_step = 1;
  if (cfg.density == 0.5) {
    per_prb = 1;
    prb_step = 2;
  } else if (cfg.density == 1.0) {
    per_prb = 1;
  } else if (cfg.density == 3.0) {
    per_prb = 3;
  } else {
    throw InvalidParameter("csirs: density must be 0.5, 1 or 3");
  }
  if (cfg.period_slots < 1) throw InvalidParameter("csirs: period_slots must be >= 1");
  if (cfg.symbol < 0 || cfg.symbol >= kSymbolsPerSlot) throw InvalidParameter("csirs: symbol outside the slot");
  const int max_offset = per_prb == 3 ? 3 : 11;
  if (cfg.subcarrier_offset < 0 || cfg.subcarrier_offset > max_offset)
    throw InvalidParameter("csirs: subcarrier_offset out of range for the density");
  if (cfg.scrambling_id < 0 || cfg.scrambling_id > 1023)
    throw InvalidParameter("csirs: scrambling_id must lie in 0..1023");

  const std::size_t n_occ = occasions(grid, cfg.period_slots);
  if (n_occ == 0) {
    warn_no_occasions(grid, "csirs", cfg.period_slots);
    return;
  }
  const auto nid = static_cast<std::uint64_t>(cfg.scrambling_id);
  const std::size_t prbs = grid.prbs();
  for (std::size_t o = 0; o < n_occ; ++o) {
    const std::size_t slot = o * static_cast<std::size_t>(cfg.period_slots);
    const std::uint64_t c =
        ((1ULL << 10) * (kSymbolsPerSlot * slot + static_cast<std::uint64_t>(cfg.symbol) + 1) * (2 * nid + 1) +
         nid) %
        kMod31;
    const CVec r = gold_qpsk(static_cast<std::uint32_t>(c), prbs * static_cast<std::size_t>(per_prb));
    const std::size_t sym = slot * kSymbolsPerSlot + static_cast<std::size_t>(cfg.symbol);
    std::size_t m = 0;
    for (std::size_t p = 0; p < prbs; p += static_cast<std::size_t>(prb_step)) {
      for (int j = 0; j < per_prb; ++j) {
        const std::size_t k = p * kSubcarriersPerPrb + static_cast<std::size_t>(cfg.subcarrier_offset + 4 * j);
        grid.place(sym, k, ReLabel::CSIRS, r[m++]);
      }
    }
  }
}

void place_srs(ResourceGrid& grid, const SrsConfig& cfg) {
  if (cfg.comb != 2 && cfg.comb != 4 && cfg.comb != 8) throw InvalidParameter("srs: comb must be 2, 4 or 8");
  if (cfg.comb_offset < 0 || cfg.comb_offset >= cfg.comb) throw InvalidParameter("srs: comb_offset out of range");
  if (cfg.period_slots < 1) throw InvalidParameter("srs: period_slots must be >= 1");
  if (cfg.symbol < 0 || cfg.symbol >= kSymbolsPerSlot) throw InvalidParameter("srs: symbol outside the slot");
  if (cfg.root < 1) throw InvalidParameter("srs: root must be >= 1");

  const std::size_t n_occ = occasions(grid, cfg.period_slots);
  if (n_occ == 0) {
    warn_no_occasions(grid, "srs", cfg.period_slots);
    return;
  }
  const auto comb = static_cast<std::size_t>(cfg.comb);
  const auto off = static_cast<std::size_t>(cfg.comb_offset);
  const std::size_t len = grid.subcarriers() > off ? (grid.subcarriers() - off + comb - 1) / comb : 0;
  if (len == 0) return;
  // Cyclic extension of the longest odd-prime Zadoff-Chu sequence that fits.
  std::size_t nzc = len;
  while (nzc > 1 && !is_odd_prime(nzc)) --nzc;
  const CVec zc = zadoff_chu(nzc > 1 ? cfg.root : 1, static_cast<std::uint32_t>(nzc));
  for (std::size_t o = 0; o < n_occ; ++o) {
    const std::size_t sym = o * static_cast<std::size_t>(cfg.period_slots) * kSymbolsPerSlot +
                            static_cast<std::size_t>(cfg.symbol);
    for (std::size_t m = 0; m < len; ++m) grid.place(sym, off + m * comb, ReLabel::SRS, zc[m % nzc]);
  }
}

void place_pilot_lattice(ResourceGrid& grid, int freq_step, int stagger, std::uint32_t c_init) {
  if (freq_step < 1) throw InvalidParameter("pilot lattice: freq_step must be >= 1");
  if (stagger < 0) throw InvalidParameter("pilot lattice: stagger must be >= 0");
  const auto step = static_cast<std::size_t>(freq_step);
  const CVec r = gold_qpsk(c_init, grid.subcarriers() * grid.symbols() / step + grid.symbols());
  std::size_t m = 0;
  for (std::size_t l = 0; l < grid.symbols(); ++l) {
    const std::size_t first = (l * static_cast<std::size_t>(stagger)) % step;
    for (std::size_t k = first; k < grid.subcarriers(); k += step) grid.place(l, k, ReLabel::DMRS, r[m++]);
  }
}

void fill_payload(ResourceGrid& grid, const Constellation& c, std::uint64_t seed) {
  std::vector<std::size_t> slots;
  for (std::size_t l = 0; l < grid.symbols(); ++l)
    for (std::size_t k = 0; k < grid.subcarriers(); ++k)
      if (grid.label(l, k) == ReLabel::Empty && !grid.reserved(l, k)) slots.push_back(grid.index(l, k));
  if (slots.empty()) return;
  const CVec sym = sample_symbols(c, slots.size(), seed);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::size_t idx = slots[i];
    grid.place(idx / grid.subcarriers(), idx % grid.subcarriers(), ReLabel::Data, sym[i]);
  }
}

double pilot_fraction(const ResourceGrid& grid) {
  const std::size_t denom = grid.size() - grid.reserved_count();
  if (denom == 0) return 0.0;
  return static_cast<double>(grid.pilot_count()) / static_cast<double>(denom);
}

void write_grid_csv(const ResourceGrid& grid, std::ostream& os) {
  os << "symbol_index,subcarrier,label,re,im\n";
  for (std::size_t l = 0; l < grid.symbols(); ++l) {
    for (std::size_t k = 0; k < grid.subcarriers(); ++k) {
      const Complex v = grid.value(l, k);
      os << l << ',' << k << ',' << to_string(grid.label(l, k)) << ',' << format_shortest(v.real()) << ','
         << format_shortest(v.imag()) << '\n';
    }
  }
}

GridPreset grid_preset(const std::string& name) {
  GridPreset p;
  p.name = name;
  if (name == "typical-nr-slot") {
    // 51 PRBs (20 MHz at 30 kHz), one slot.
    p.subcarriers = 612;
    p.symbols = 14;
    p.scs_khz = 30;
    p.burst.n_ssb = 0;
    p.burst.scs_khz = 30;
    p.dmrs = true;
    p.dmrs_cfg.positions = {2};
    p.dmrs_cfg.additional = {11};
    p.csirs = true;
    p.csirs_cfg.density = 1.0;
    p.csirs_cfg.symbol = 5;
    p.srs = true;
    p.srs_cfg.comb = 4;
    p.srs_cfg.symbol = 13;
    return p;
  }
  if (name == "fr2-64ssb-burst") {
    p.subcarriers = 240;
    p.symbols = 560;
    p.scs_khz = 120;
    p.burst.n_ssb = 64;
    p.burst.scs_khz = 120;
    return p;
  }
  throw InvalidParameter("unknown grid preset '" + name + "'");
}

std::vector<std::string> grid_preset_names() { return {"typical-nr-slot", "fr2-64ssb-burst"}; }

ResourceGrid build_grid(const GridPreset& preset) {
  ResourceGrid grid(preset.subcarriers, preset.symbols, preset.scs_khz);
  if (preset.burst.n_ssb > 0) place_ssb_burst(grid, preset.burst);
  if (preset.dmrs) place_dmrs(grid, preset.dmrs_cfg);
  if (preset.csirs) place_csirs(grid, preset.csirs_cfg);
  if (preset.srs) place_srs(grid, preset.srs_cfg);
  return grid;
}

}  // namespace isac
