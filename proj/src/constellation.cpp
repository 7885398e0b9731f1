#include "isac/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "isac/random.hpp"

namespace isac {
namespace {

std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Neumaier-compensated sum.
template <class F>
double compensated_sum(std::size_t n, F&& term) {
  double sum = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = term(i);
    const double s = sum + t;
    if (std::abs(sum) >= std::abs(t))
      c += (sum - s) + t;
    else
      c += (t - s) + sum;
    sum = s;
  }
  return sum + c;
}

}  // namespace

Constellation Constellation::from_points(std::string name, CVec points, RVec probs,
                                         std::vector<std::uint32_t> labels) {
  if (points.empty()) throw InvalidParameter("constellation: empty point set");
  const std::size_t m = points.size();
  if (probs.empty()) probs.assign(m, 1.0 / static_cast<double>(m));
  if (probs.size() != m)
    throw InvalidParameter("constellation: probs length does not match points");
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw InvalidParameter("constellation: probabilities must be non-negative");
  }
  const double total = compensated_sum(m, [&](std::size_t i) { return probs[i]; });
  if (!(total > 0.0)) throw InvalidParameter("constellation: probabilities sum to zero");
  for (double& p : probs) p /= total;

  const double power =
      compensated_sum(m, [&](std::size_t i) { return probs[i] * std::norm(points[i]); });
  if (!(power > 0.0)) throw InvalidParameter("constellation: zero average power");
  const double scale = 1.0 / std::sqrt(power);
  for (auto& c : points) c *= scale;

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (std::abs(points[i] - points[j]) < 1e-9)
        throw InvalidParameter("constellation: duplicate point");
    }
  }

  if (labels.empty()) {
    labels.resize(m);
    std::iota(labels.begin(), labels.end(), 0U);
  }
  if (labels.size() != m) throw InvalidParameter("constellation: labels length mismatch");

  Constellation c;
  c.name_ = std::move(name);
  c.points_ = std::move(points);
  c.probs_ = std::move(probs);
  c.labels_ = std::move(labels);
  return c;
}

unsigned Constellation::bits_per_symbol() const {
  if (!is_power_of_two(points_.size())) return 0;
  unsigned b = 0;
  while ((std::size_t{1} << b) < points_.size()) ++b;
  return b;
}

double Constellation::average_power() const {
  return compensated_sum(points_.size(),
                         [&](std::size_t i) { return probs_[i] * std::norm(points_[i]); });
}

Constellation make_psk(int order) {
  if (order < 2) throw InvalidParameter("make_psk: order must be >= 2");
  const auto m = static_cast<std::size_t>(order);
  CVec pts(m);
  std::vector<std::uint32_t> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    pts[i] = std::polar(1.0, kTwoPi * static_cast<double>(i) / static_cast<double>(m));
    labels[i] = gray(static_cast<std::uint32_t>(i));
  }
  // Exact values on the axes keep BPSK/QPSK free of 1e-17 residue.
  for (auto& p : pts) {
    if (std::abs(p.real()) < 1e-15) p.real(0.0);
    if (std::abs(p.imag()) < 1e-15) p.imag(0.0);
  }
  return Constellation::from_points(std::to_string(order) + "-PSK", std::move(pts), {},
                                    is_power_of_two(m) ? std::move(labels)
                                                       : std::vector<std::uint32_t>{});
}

Constellation make_qam(int order) {
  int side = 0;
  switch (order) {
    case 4: side = 2; break;
    case 16: side = 4; break;
    case 64: side = 8; break;
    case 256: side = 16; break;
    default:
      throw InvalidParameter("make_qam: order must be one of 4, 16, 64, 256");
  }
  unsigned axis_bits = 0;
  while ((1 << axis_bits) < side) ++axis_bits;

  CVec pts;
  std::vector<std::uint32_t> labels;
  pts.reserve(static_cast<std::size_t>(order));
  labels.reserve(static_cast<std::size_t>(order));
  for (int i = 0; i < side; ++i) {
    for (int q = 0; q < side; ++q) {
      pts.emplace_back(2.0 * i - (side - 1), 2.0 * q - (side - 1));
      labels.push_back((gray(static_cast<std::uint32_t>(i)) << axis_bits) |
                       gray(static_cast<std::uint32_t>(q)));
    }
  }
  return Constellation::from_points(std::to_string(order) + "-QAM", std::move(pts), {},
                                    std::move(labels));
}

Constellation make_apsk(std::span<const ApskRing> rings) {
  if (rings.empty()) throw InvalidParameter("make_apsk: at least one ring required");
  CVec pts;
  std::ostringstream name;
  name << "APSK";
  double prev_radius = 0.0;
  for (std::size_t r = 0; r < rings.size(); ++r) {
    const auto& ring = rings[r];
    if (ring.count < 1) throw InvalidParameter("make_apsk: ring count must be >= 1");
    if (!(ring.radius > 0.0)) throw InvalidParameter("make_apsk: ring radius must be > 0");
    if (r > 0 && ring.radius == prev_radius)
      throw InvalidParameter("make_apsk: duplicate ring radius");
    if (r > 0 && ring.radius < prev_radius)
      throw InvalidParameter("make_apsk: ring radii must be strictly increasing");
    prev_radius = ring.radius;
    name << (r == 0 ? "(" : ",") << ring.count << "@" << ring.radius;
    const double offset = kPi / ring.count;
    for (int k = 0; k < ring.count; ++k)
      pts.push_back(std::polar(ring.radius, offset + kTwoPi * k / ring.count));
  }
  name << ")";
  return Constellation::from_points(name.str(), std::move(pts));
}

Constellation apply_shaping(const Constellation& base, const ShapingSpec& spec) {
  const auto& pts = base.points();
  RVec probs(pts.size());
  std::string suffix;
  if (std::holds_alternative<ShapingSpec::Uniform>(spec.kind)) {
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(pts.size()));
  } else if (const auto* mb = std::get_if<ShapingSpec::MaxwellBoltzmann>(&spec.kind)) {
    if (!(mb->lambda >= 0.0) || !std::isfinite(mb->lambda))
      throw InvalidParameter("apply_shaping: Maxwell-Boltzmann lambda must be >= 0");
    // Subtract the minimum energy before exponentiating so large lambda
    // keeps the inner ring representable.
    double e_min = std::norm(pts[0]);
    for (const auto& p : pts) e_min = std::min(e_min, std::norm(p));
    for (std::size_t i = 0; i < pts.size(); ++i)
      probs[i] = std::exp(-mb->lambda * (std::norm(pts[i]) - e_min));
    std::ostringstream os;
    os << "+MB(" << mb->lambda << ")";
    suffix = os.str();
  } else {
    const auto& custom = std::get<ShapingSpec::Custom>(spec.kind);
    if (custom.probs.size() != pts.size())
      throw InvalidParameter("apply_shaping: custom probs length does not match base size");
    probs = custom.probs;
    suffix = "+custom";
  }
  return Constellation::from_points(base.name() + suffix, pts, std::move(probs), base.labels());
}

double kurtosis(const Constellation& c) {
  const auto& pts = c.points();
  const auto& pr = c.probs();
  const double m4 =
      compensated_sum(pts.size(), [&](std::size_t i) { return pr[i] * std::norm(pts[i]) * std::norm(pts[i]); });
  const double m2 = compensated_sum(pts.size(), [&](std::size_t i) { return pr[i] * std::norm(pts[i]); });
  return m4 / (m2 * m2);
}

double sample_kurtosis(std::span<const Complex> samples) {
  if (samples.empty()) throw InvalidParameter("sample_kurtosis: empty sample");
  const double m4 = compensated_sum(samples.size(), [&](std::size_t i) {
    const double e = std::norm(samples[i]);
    return e * e;
  });
  const double m2 = compensated_sum(samples.size(), [&](std::size_t i) { return std::norm(samples[i]); });
  const double n = static_cast<double>(samples.size());
  return (m4 / n) / ((m2 / n) * (m2 / n));
}

GaussianClass classify_kurtosis(double kappa, double tol) {
  if (kappa < 2.0 - tol) return GaussianClass::SubGaussian;
  if (kappa > 2.0 + tol) return GaussianClass::SuperGaussian;
  return GaussianClass::Gaussian;
}

namespace {

double mb_kurtosis(const Constellation& base, double lambda) {
  return kurtosis(apply_shaping(base, ShapingSpec::maxwell_boltzmann(lambda)));
}

struct MbScan {
  RVec lambdas;
  RVec kappas;
  double limit = 1.0;  // kurtosis as lambda -> infinity
};

MbScan scan_mb(const Constellation& base) {
  RVec energies;
  for (const auto& p : base.points()) energies.push_back(std::norm(p));
  std::sort(energies.begin(), energies.end());
  const double e_min = energies.front();
  double gap = 0.0;
  for (double e : energies) {
    if (e - e_min > 1e-12) {
      gap = e - e_min;
      break;
    }
  }
  MbScan scan;
  scan.lambdas.push_back(0.0);
  scan.kappas.push_back(kurtosis(base));
  if (gap == 0.0) {
    // Single energy level: shaping cannot change |x|, kurtosis is constant.
    scan.limit = scan.kappas.front();
    return scan;
  }
  // Past exp(-60) the outer rings carry no representable mass.
  const double lambda_hi = 60.0 / gap;
  for (double l = 1e-4; l < lambda_hi; l *= 1.05) {
    scan.lambdas.push_back(l);
    scan.kappas.push_back(mb_kurtosis(base, l));
  }
  scan.lambdas.push_back(lambda_hi);
  scan.kappas.push_back(mb_kurtosis(base, lambda_hi));
  // Only the minimum-energy points survive: all share one magnitude.
  scan.limit = 1.0;
  return scan;
}

// Golden-section refinement of a local maximum bracketed by [a, b].
double refine_max(const Constellation& base, double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = mb_kurtosis(base, c);
  double fd = mb_kurtosis(base, d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + b); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = mb_kurtosis(base, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = mb_kurtosis(base, d);
    }
  }
  return std::max(fc, fd);
}

}  // namespace

std::pair<double, double> mb_kurtosis_range(const Constellation& base) {
  const MbScan scan = scan_mb(base);
  double lo = scan.limit;
  double hi = scan.limit;
  std::size_t arg_hi = 0;
  for (std::size_t i = 0; i < scan.kappas.size(); ++i) {
    lo = std::min(lo, scan.kappas[i]);
    if (scan.kappas[i] > hi) {
      hi = scan.kappas[i];
      arg_hi = i;
    }
  }
  if (arg_hi > 0 && arg_hi + 1 < scan.lambdas.size())
    hi = std::max(hi, refine_max(base, scan.lambdas[arg_hi - 1], scan.lambdas[arg_hi + 1]));
  return {lo, hi};
}

ShapingSpec shape_for_kurtosis(const Constellation& base, double target, double tol) {
  if (!(tol > 0.0)) throw InvalidParameter("shape_for_kurtosis: tol must be > 0");
  const double k0 = kurtosis(base);
  if (std::abs(k0 - target) <= tol) return ShapingSpec::maxwell_boltzmann(0.0);

  const auto [lo, hi] = mb_kurtosis_range(base);
  if (target < lo - tol || target > hi + tol) {
    std::ostringstream os;
    os << "shape_for_kurtosis: target " << target << " outside reachable interval [" << lo
       << ", " << hi << "]";
    throw OutOfRange(os.str(), lo, hi);
  }

  const MbScan scan = scan_mb(base);
  for (std::size_t i = 0; i + 1 < scan.lambdas.size(); ++i) {
    const double fa = scan.kappas[i] - target;
    const double fb = scan.kappas[i + 1] - target;
    if (std::abs(fb) <= tol && !(fa * fb < 0.0))
      return ShapingSpec::maxwell_boltzmann(scan.lambdas[i + 1]);
    if (fa * fb < 0.0) {
      double a = scan.lambdas[i];
      double b = scan.lambdas[i + 1];
      double f_a = fa;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = mb_kurtosis(base, mid) - target;
        if (std::abs(fm) <= tol) return ShapingSpec::maxwell_boltzmann(mid);
        if ((fm < 0.0) == (f_a < 0.0)) {
          a = mid;
          f_a = fm;
        } else {
          b = mid;
        }
      }
      return ShapingSpec::maxwell_boltzmann(0.5 * (a + b));
    }
  }
  // Only reachable near the interior maximum between scan points.
  std::size_t best = 0;
  for (std::size_t i = 1; i < scan.kappas.size(); ++i)
    if (std::abs(scan.kappas[i] - target) < std::abs(scan.kappas[best] - target)) best = i;
  if (best > 0 && best + 1 < scan.lambdas.size()) {
    double a = scan.lambdas[best - 1];
    double b = scan.lambdas[best + 1];
    for (int it = 0; it < 200; ++it) {
      const double m1 = a + (b - a) / 3.0;
      const double m2 = b - (b - a) / 3.0;
      if (std::abs(mb_kurtosis(base, m1) - target) < std::abs(mb_kurtosis(base, m2) - target))
        b = m2;
      else
        a = m1;
    }
    const double l = 0.5 * (a + b);
    if (std::abs(mb_kurtosis(base, l) - target) <= tol) return ShapingSpec::maxwell_boltzmann(l);
  }
  throw OutOfRange("shape_for_kurtosis: no Maxwell-Boltzmann rate meets the tolerance", lo, hi);
}

CVec sample_symbols(const Constellation& c, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidParameter("sample_symbols: n must be >= 1");
  Rng rng(seed);
  std::discrete_distribution<std::size_t> pick(c.probs().begin(), c.probs().end());
  CVec out(n);
  for (auto& x : out) x = c.points()[pick(rng)];
  return out;
}

CVec map_bits(const Constellation& c, std::span<const std::uint8_t> bits) {
  const unsigned b = c.bits_per_symbol();
  if (b == 0) throw InvalidParameter("map_bits: constellation size is not a power of two");
  if (bits.size() % b != 0) throw InvalidParameter("map_bits: bit count not a multiple of bits/symbol");
  std::unordered_map<std::uint32_t, std::size_t> index;
  for (std::size_t i = 0; i < c.size(); ++i) index[c.labels()[i]] = i;
  CVec out;
  out.reserve(bits.size() / b);
  for (std::size_t s = 0; s < bits.size(); s += b) {
    std::uint32_t label = 0;
    for (unsigned k = 0; k < b; ++k) label = (label << 1) | (bits[s + k] & 1U);
    out.push_back(c.points()[index.at(label)]);
  }
  return out;
}

nlohmann::json to_json(const Constellation& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points()) pts.push_back({p.real(), p.imag()});
  return {{"name", c.name()}, {"points", pts}, {"probs", c.probs()}};
}

Constellation constellation_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items()) {
    if (key != "name" && key != "points" && key != "probs")
      throw InvalidParameter("constellation json: unknown key '" + key + "'");
  }
  CVec pts;
  for (const auto& p : j.at("points")) {
    if (!p.is_array() || p.size() != 2)
      throw InvalidParameter("constellation json: points must be [re, im] pairs");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  RVec probs;
  if (j.contains("probs")) probs = j.at("probs").get<RVec>();
  return Constellation::from_points(j.value("name", std::string("custom")), std::move(pts),
                                    std::move(probs));
}

}  // namespace isac
