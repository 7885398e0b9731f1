#include "isac/cli/params.hpp"

#include <cmath>

namespace isac::cli {

ResourceGrid RadarGridParams::build() const {
  ResourceGrid g;
  if (source == "lattice") {
    g = ResourceGrid(subcarriers, symbols, scs_khz);
    place_pilot_lattice(g, pilot_step, pilot_stagger, pilot_cinit);
  } else {
    g = build_grid(grid_preset(source));
  }
  fill_payload(g, payload, payload_seed);
  return g;
}

Target TargetSpec::to_target(const CarrierParams& carrier) const {
  const double delay_bin = 1.0 / (static_cast<double>(carrier.n_subcarriers) * carrier.subcarrier_spacing_hz());
  const double doppler_bin = 1.0 / (static_cast<double>(carrier.n_symbols) * carrier.symbol_duration());
  return {delay_bins * delay_bin, doppler_bins * doppler_bin, std::polar(std::sqrt(from_db(amplitude_db)), phase_rad)};
}

ReMask mask_from_name(const std::string& name) {
  if (name == "full") return mask_all();
  if (name == "pilots") return mask_pilots();
  if (name == "data") return mask_labels({ReLabel::Data});
  for (ReLabel l : {ReLabel::PSS, ReLabel::SSS, ReLabel::PBCH, ReLabel::DMRS, ReLabel::CSIRS, ReLabel::SRS})
    if (name == to_string(l)) return mask_labels({l});
  throw InvalidParameter("unknown mask '" + name + "'");
}

}  // namespace isac::cli
