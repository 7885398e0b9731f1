#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "isac/common.hpp"
#include "isac/constellation.hpp"

namespace isac {

enum class ReLabel : std::uint8_t { Empty, PSS, SSS, PBCH, DMRS, CSIRS, SRS, Data };

std::string to_string(ReLabel label);

inline bool is_pilot(ReLabel l) { return l != ReLabel::Empty && l != ReLabel::Data; }

constexpr int kSymbolsPerSlot = 14;
constexpr int kSubcarriersPerPrb = 12;
constexpr int kSsbSubcarriers = 240;
constexpr int kSsbSymbols = 4;

/// Time-frequency grid of resource elements indexed (symbol, subcarrier).
///
/// REs inside an SSB footprint that carry no signal are marked reserved:
/// they stay Empty but are never filled with payload and are left out of
/// pilot_fraction.
class ResourceGrid {
 public:
  ResourceGrid() = default;
  ResourceGrid(std::size_t subcarriers, std::size_t symbols, int scs_khz);

  std::size_t subcarriers() const { return subcarriers_; }
  std::size_t symbols() const { return symbols_; }
  std::size_t size() const { return labels_.size(); }
  int scs_khz() const { return scs_khz_; }
  std::size_t slots() const { return symbols_ / kSymbolsPerSlot; }
  std::size_t prbs() const { return subcarriers_ / kSubcarriersPerPrb; }

  std::size_t index(std::size_t symbol, std::size_t subcarrier) const {
    return symbol * subcarriers_ + subcarrier;
  }
  ReLabel label(std::size_t symbol, std::size_t subcarrier) const { return labels_[index(symbol, subcarrier)]; }
  Complex value(std::size_t symbol, std::size_t subcarrier) const { return values_[index(symbol, subcarrier)]; }
  bool reserved(std::size_t symbol, std::size_t subcarrier) const { return reserved_[index(symbol, subcarrier)] != 0; }

  /// Writes a labeled RE. Throws Collision if it is already occupied or reserved.
  void place(std::size_t symbol, std::size_t subcarrier, ReLabel label, Complex value);
  void reserve(std::size_t symbol, std::size_t subcarrier);

  const std::vector<ReLabel>& labels() const { return labels_; }
  const CVec& values() const { return values_; }
  CVec& mutable_values() { return values_; }

  std::size_t count(ReLabel label) const;
  std::size_t reserved_count() const;
  std::size_t pilot_count() const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  void warn(std::string msg) { warnings_.push_back(std::move(msg)); }

  friend bool operator==(const ResourceGrid&, const ResourceGrid&) = default;

 private:
  std::size_t subcarriers_ = 0;
  std::size_t symbols_ = 0;
  int scs_khz_ = 15;
  std::vector<ReLabel> labels_;
  CVec values_;
  std::vector<std::uint8_t> reserved_;
  std::vector<std::string> warnings_;
};

// Sequence generators (3GPP TS 38.211).

/// Length-31 Gold sequence c(n) of TS 38.211 5.2.1, returned as 1 - 2 c(n).
RVec gold_sequence(std::uint32_t c_init, std::size_t length);

/// QPSK reference symbols r(m) = ((1 - 2c(2m)) + j (1 - 2c(2m+1))) / sqrt 2.
CVec gold_qpsk(std::uint32_t c_init, std::size_t count);

/// x[n] = exp(-j pi u n (n+1) / nzc), n = 0..nzc-1.
CVec zadoff_chu(std::uint32_t u, std::uint32_t nzc);

/// PSS d(n) of TS 38.211 7.4.2.2 for N_ID^(2) in 0..2.
RVec pss_sequence(int nid2);

/// SSS d(n) of TS 38.211 7.4.2.3 for N_ID^(1) in 0..335, N_ID^(2) in 0..2.
RVec sss_sequence(int nid1, int nid2);

/// PBCH DMRS initialization of TS 38.211 7.4.1.4.1.
std::uint32_t pbch_dmrs_cinit(int cell_id, int issb);

struct BurstConfig {
  int n_ssb = 1;
  double period_ms = 20.0;
  double window_ms = 5.0;
  int scs_khz = 120;
  int cell_id = 0;              // 3 * N_ID^(1) + N_ID^(2)
  std::size_t first_subcarrier = 0;

  void validate() const;
};

/// Symbol index of the first OFDM symbol of each SSB within a half frame
/// (cases A, B and D of TS 38.213 4.1).
std::vector<int> ssb_start_symbols(int scs_khz, int n_ssb);

/// Number of OFDM symbols in `ms` milliseconds at the given SCS.
std::size_t symbols_in_ms(int scs_khz, double ms);

ResourceGrid build_ssb_burst(const BurstConfig& cfg, std::size_t subcarriers, std::size_t symbols);

/// Writes the SSB burst into an existing grid.
void place_ssb_burst(ResourceGrid& grid, const BurstConfig& cfg);

/// Type-1 DMRS: comb-2 on even subcarriers of the listed symbols of every slot.
struct DmrsConfig {
  std::vector<int> positions{2};  // front-loaded symbols in the slot
  std::vector<int> additional;    // additional DMRS symbols in the slot
  int scrambling_id = 0;
};

void place_dmrs(ResourceGrid& grid, const DmrsConfig& cfg);

struct CsiRsConfig {
  double density = 1.0;      // REs per PRB per occasion: 0.5, 1 or 3
  int period_slots = 1;
  int symbol = 5;            // symbol within the slot
  int subcarrier_offset = 0; // k0 within the PRB
  int scrambling_id = 0;
};

void place_csirs(ResourceGrid& grid, const CsiRsConfig& cfg);

struct SrsConfig {
  int comb = 4;              // 2, 4 or 8
  int period_slots = 1;
  int symbol = 13;
  int comb_offset = 0;
  std::uint32_t root = 1;
};

void place_srs(ResourceGrid& grid, const SrsConfig& cfg);

/// Staggered sensing-pilot lattice: one unit-modulus pilot every `freq_step`
/// subcarriers on every symbol, shifted by `stagger` per symbol. Labels DMRS.
void place_pilot_lattice(ResourceGrid& grid, int freq_step, int stagger, std::uint32_t c_init);

/// Fills every unreserved Empty RE with an i.i.d. constellation symbol.
void fill_payload(ResourceGrid& grid, const Constellation& c, std::uint64_t seed);

/// Pilot REs over all REs that are not reserved.
double pilot_fraction(const ResourceGrid& grid);

/// CSV rows: symbol_index,subcarrier,label,re,im.
void write_grid_csv(const ResourceGrid& grid, std::ostream& os);

struct GridPreset {
  std::string name;
  std::size_t subcarriers = 0;
  std::size_t symbols = 0;
  int scs_khz = 30;
  BurstConfig burst;      // burst.n_ssb == 0 disables SSBs
  bool dmrs = false;
  DmrsConfig dmrs_cfg;
  bool csirs = false;
  CsiRsConfig csirs_cfg;
  bool srs = false;
  SrsConfig srs_cfg;
};

/// Built-in presets: "typical-nr-slot" and "fr2-64ssb-burst".
GridPreset grid_preset(const std::string& name);
std::vector<std::string> grid_preset_names();

/// Builds the pilot structure of a preset (no payload).
ResourceGrid build_grid(const GridPreset& preset);

}  // namespace isac
