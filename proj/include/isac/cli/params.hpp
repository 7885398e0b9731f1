#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "isac/constellation.hpp"
#include "isac/modulation.hpp"
#include "isac/nr_grid.hpp"
#include "isac/pulse.hpp"
#include "isac/radar_channel.hpp"
#include "isac/v2i_sim.hpp"

namespace isac::cli {

struct AcfParams {
  Constellation constellation = make_qam(16);
  std::vector<ModulationBasis> bases;
  std::vector<std::size_t> integrations{1};
  std::optional<PulseFilter> pulse;
  std::size_t trials = 1000;
  int exclude_mainlobe_lags = 0;
  double sample_budget = 5e9;
  unsigned threads = 0;
};

struct AmbiguityParams {
  Constellation constellation = make_qam(16);
  ModulationBasis basis = ModulationBasis::ofdm(256);
  std::size_t doppler_bins = 64;
  std::size_t trials = 1;  // maps averaged
};

struct KurtosisParams {
  std::vector<Constellation> constellations;
  std::size_t samples = 100000;  // per constellation, for the sample estimate
  bool include_cscg = true;
  std::size_t cscg_samples = 1000000;
  bool sweep = false;
  Constellation sweep_base = make_qam(64);
  double lambda_max = 3.0;
  std::size_t sweep_points = 31;
};

struct RankBasesParams {
  Constellation constellation = make_qam(16);
  std::vector<ModulationBasis> bases;
  std::size_t trials = 10000;
};

struct NrGridParams {
  GridPreset grid;
  bool payload = true;
  Constellation payload_constellation = make_qam(16);
  bool export_grid = true;
};

/// Transmit grid for the radar experiments: either a staggered pilot
/// lattice or one of the NR grid presets, with payload in the free REs.
struct RadarGridParams {
  std::string source = "lattice";
  std::size_t subcarriers = 120;
  std::size_t symbols = 56;
  int scs_khz = 120;
  int pilot_step = 10;
  int pilot_stagger = 3;
  std::uint32_t pilot_cinit = 0x5EED;
  Constellation payload = make_psk(4);
  std::uint64_t payload_seed = 77;

  ResourceGrid build() const;
};

/// Target position in unpadded delay/Doppler bins of the grid.
struct TargetSpec {
  double delay_bins = 17.0;
  double doppler_bins = 5.0;
  double amplitude_db = 0.0;
  double phase_rad = 0.0;

  Target to_target(const CarrierParams& carrier) const;
};

struct EstimateParams {
  RadarGridParams grid;
  std::vector<TargetSpec> targets{TargetSpec{}};
  std::vector<std::string> masks{"full", "pilots"};
  RVec snr_db;
  std::size_t trials = 100;
  PeriodogramConfig periodogram{4, 4};
  double min_rel_power = 0.0;
};

struct DetectParams {
  RadarGridParams grid;
  TargetSpec target;
  std::vector<std::string> masks{"full", "pilots"};
  RVec snr_db;
  DetectionConfig detection;
  double pd_target = 0.9;
};

struct V2iParams {
  V2iScenario scenario = paper_fr2_120khz();
  std::vector<Stage> stages{Stage::InitialAccess, Stage::Connected, Stage::BeamFailure, Stage::Handover};
  std::optional<BlockageEvent> blockage = BlockageEvent{};
  Maneuver handover_maneuver = Maneuver::Turn;
  std::size_t trials = 200;  // handover seeds
};

using Params = std::variant<AcfParams, AmbiguityParams, KurtosisParams, RankBasesParams, NrGridParams,
                            EstimateParams, DetectParams, V2iParams>;

/// "full", "pilots", "data" or an RE label name such as "DMRS".
ReMask mask_from_name(const std::string& name);

}  // namespace isac::cli
