#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "isac/common.hpp"
#include "json.hpp"

namespace isac {

/// Discrete symbol alphabet with a probability mass function.
///
/// Every instance is unit-power normalized (sum_i p_i |c_i|^2 = 1), its
/// probabilities sum to one, and its points are pairwise distinct. Instances
/// are immutable once built.
class Constellation {
 public:
  /// Builds a constellation from an arbitrary point set (geometric shaping
  /// enters here). Points are rescaled to unit average power under `probs`.
  /// An empty `probs` means uniform; empty `labels` means natural order.
  static Constellation from_points(std::string name, CVec points, RVec probs = {},
                                   std::vector<std::uint32_t> labels = {});

  const std::string& name() const { return name_; }
  const CVec& points() const { return points_; }
  const RVec& probs() const { return probs_; }
  std::size_t size() const { return points_.size(); }

  /// Bit label of each point (Gray for PSK/QAM, natural order otherwise).
  const std::vector<std::uint32_t>& labels() const { return labels_; }
  /// Bits carried per symbol when the size is a power of two, else 0.
  unsigned bits_per_symbol() const;

  double average_power() const;

 private:
  Constellation() = default;

  std::string name_;
  CVec points_;
  RVec probs_;
  std::vector<std::uint32_t> labels_;
};

/// Uniform M-PSK, first point at angle 0, Gray-labelled.
Constellation make_psk(int order);

/// Square M-QAM (M in {4, 16, 64, 256}), per-axis Gray labelling.
Constellation make_qam(int order);

struct ApskRing {
  int count = 0;
  double radius = 0.0;
};

/// Multi-ring APSK. Ring r is rotated by pi/count_r.
Constellation make_apsk(std::span<const ApskRing> rings);

/// Probabilistic shaping family applied to a base point set.
struct ShapingSpec {
  struct Uniform {};
  struct MaxwellBoltzmann {
    double lambda = 0.0;
  };
  struct Custom {
    RVec probs;
  };
  std::variant<Uniform, MaxwellBoltzmann, Custom> kind = Uniform{};

  static ShapingSpec uniform() { return {}; }
  static ShapingSpec maxwell_boltzmann(double lambda) { return {MaxwellBoltzmann{lambda}}; }
  static ShapingSpec custom(RVec probs) { return {Custom{std::move(probs)}}; }
};

/// Reweights the base points; Maxwell-Boltzmann uses p_i ~ exp(-lambda |c_i|^2)
/// over the base points as given, then the result is re-normalized.
Constellation apply_shaping(const Constellation& base, const ShapingSpec& spec);

/// E|x|^4 / (E|x|^2)^2. PSK gives 1, a circular complex Gaussian 2.
double kurtosis(const Constellation& c);

/// Same ratio estimated from samples.
double sample_kurtosis(std::span<const Complex> samples);

enum class GaussianClass { SubGaussian, Gaussian, SuperGaussian };
GaussianClass classify_kurtosis(double kappa, double tol = 1e-12);

/// Finds a Maxwell-Boltzmann rate whose shaped kurtosis is within `tol` of
/// `target`. The smallest such rate on the scan is preferred. Throws
/// OutOfRange carrying the reachable interval when the target cannot be met.
ShapingSpec shape_for_kurtosis(const Constellation& base, double target, double tol);

/// Reachable kurtosis interval of the Maxwell-Boltzmann family over `base`.
std::pair<double, double> mb_kurtosis_range(const Constellation& base);

/// i.i.d. draws from the constellation's mass function; deterministic in seed.
CVec sample_symbols(const Constellation& c, std::size_t n, std::uint64_t seed);

/// Maps a bit stream (MSB first per symbol) through the point labels.
CVec map_bits(const Constellation& c, std::span<const std::uint8_t> bits);

nlohmann::json to_json(const Constellation& c);
Constellation constellation_from_json(const nlohmann::json& j);

}  // namespace isac
