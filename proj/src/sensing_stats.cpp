#include "isac/sensing_stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "isac/fft.hpp"
#include "isac/random.hpp"

namespace isac {
namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Fixed chunking keeps the reduction order independent of thread count.
constexpr std::size_t kTrialsPerChunk = 16;

struct Accumulator {
  CVec sum;      // sum of integrated ACF
  RVec sum_sq;   // sum of |integrated ACF|^2
  double isl_sum = 0.0;
  double isl_sq_sum = 0.0;

  explicit Accumulator(std::size_t lags = 0) : sum(lags), sum_sq(lags) {}

  void merge(const Accumulator& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sum_sq[i] += o.sum_sq[i];
    }
    isl_sum += o.isl_sum;
    isl_sq_sum += o.isl_sq_sum;
  }
};

// Per-thread frame generator producing the centered, nominally normalized ACF
// of one frame.
class FrameAcf {
 public:
  FrameAcf(const AcfExperiment& cfg, const RVec& taps)
      : cfg_(cfg), taps_(taps), n_(cfg.basis.n) {
    if (cfg.pulse) {
      wave_len_ = n_ * static_cast<std::size_t>(cfg.pulse->oversampling) + taps.size() - 1;
      pad_ = next_pow2(2 * wave_len_ - 1);
      lag_count_ = 2 * wave_len_ - 1;
      nominal_ = static_cast<double>(n_) * cfg.pulse->oversampling;
      buf_.resize(pad_);
    } else {
      lag_count_ = n_;
      buf_.resize(n_);
    }
  }

  std::size_t lag_count() const { return lag_count_; }

  void compute(std::uint64_t frame_index, CVec& out) {
    CVec symbols = sample_symbols(cfg_.constellation, n_, derive_seed(cfg_.seed, frame_index));
    apply_basis(cfg_.basis, symbols);
    if (!cfg_.pulse) {
      const CVec r = pacf(symbols);
      const std::size_t half = n_ / 2;
      for (std::size_t i = 0; i < n_; ++i) out[i] = r[(i + n_ - half) % n_];
      return;
    }
    const CVec y = shape_with(taps_, cfg_.pulse->oversampling, symbols);
    std::fill(buf_.begin(), buf_.end(), Complex{});
    std::copy(y.begin(), y.end(), buf_.begin());
    const Fft& fft = thread_fft(pad_);
    fft.forward(buf_);
    for (auto& v : buf_) v = std::norm(v);
    fft.inverse(buf_);
    const double scale = 1.0 / (static_cast<double>(pad_) * nominal_);
    const auto m = static_cast<std::ptrdiff_t>(wave_len_);
    for (std::ptrdiff_t lag = -(m - 1); lag <= m - 1; ++lag) {
      const std::size_t src = lag >= 0 ? static_cast<std::size_t>(lag)
                                       : pad_ - static_cast<std::size_t>(-lag);
      out[static_cast<std::size_t>(lag + m - 1)] = std::conj(buf_[src]) * scale;
    }
  }

 private:
  const AcfExperiment& cfg_;
  const RVec& taps_;
  std::size_t n_;
  std::size_t wave_len_ = 0;
  std::size_t pad_ = 0;
  std::size_t lag_count_ = 0;
  double nominal_ = 1.0;
  CVec buf_;
};

std::vector<int> centered_lags(const AcfExperiment& cfg, std::size_t lag_count) {
  std::vector<int> lags(lag_count);
  const int offset = cfg.pulse ? static_cast<int>((lag_count - 1) / 2)
                               : static_cast<int>(cfg.basis.n / 2);
  for (std::size_t i = 0; i < lag_count; ++i) lags[i] = static_cast<int>(i) - offset;
  return lags;
}

}  // namespace

CVec pacf(std::span<const Complex> s) {
  const std::size_t n = s.size();
  if (n < 2) throw InvalidParameter("pacf: need at least 2 samples");
  CVec buf(s.begin(), s.end());
  const Fft& fft = thread_fft(n);
  fft.forward(buf);
  for (auto& v : buf) v = std::norm(v);
  fft.inverse(buf);
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (auto& v : buf) v = std::conj(v) * scale;
  return buf;
}

CVec aperiodic_acf_raw(std::span<const Complex> y) {
  const std::size_t m = y.size();
  if (m == 0) throw InvalidParameter("aperiodic_acf: empty waveform");
  const std::size_t pad = next_pow2(2 * m - 1);
  CVec buf(pad);
  std::copy(y.begin(), y.end(), buf.begin());
  const Fft& fft = thread_fft(pad);
  fft.forward(buf);
  for (auto& v : buf) v = std::norm(v);
  fft.inverse(buf);
  CVec out(2 * m - 1);
  const auto mm = static_cast<std::ptrdiff_t>(m);
  for (std::ptrdiff_t lag = -(mm - 1); lag <= mm - 1; ++lag) {
    const std::size_t src = lag >= 0 ? static_cast<std::size_t>(lag) : pad - static_cast<std::size_t>(-lag);
    out[static_cast<std::size_t>(lag + mm - 1)] = std::conj(buf[src]) / static_cast<double>(pad);
  }
  return out;
}

CVec aperiodic_acf(std::span<const Complex> y) {
  CVec c = aperiodic_acf_raw(y);
  const Complex c0 = c[y.size() - 1];
  if (std::abs(c0) == 0.0) throw InvalidParameter("aperiodic_acf: zero-energy waveform");
  for (auto& v : c) v /= c0.real();
  return c;
}

std::size_t AmbiguityMap::zero_doppler_index() const {
  return static_cast<std::size_t>(std::find(dopplers.begin(), dopplers.end(), 0) - dopplers.begin());
}

std::size_t AmbiguityMap::zero_delay_index() const {
  return static_cast<std::size_t>(std::find(delays.begin(), delays.end(), 0) - delays.begin());
}

AmbiguityMap ambiguity_function(std::span<const Complex> samples, std::size_t doppler_bins) {
  const std::size_t n = samples.size();
  if (n < 2) throw InvalidParameter("ambiguity_function: need at least 2 samples");
  if (doppler_bins < 1) throw InvalidParameter("ambiguity_function: doppler_bins must be >= 1");
  if (doppler_bins > n) throw InvalidParameter("ambiguity_function: doppler_bins must not exceed N");

  AmbiguityMap map;
  const int half = static_cast<int>(n / 2);
  for (std::size_t i = 0; i < n; ++i) map.delays.push_back(static_cast<int>(i) - half);
  const int dhalf = static_cast<int>(doppler_bins / 2);
  for (std::size_t d = 0; d < doppler_bins; ++d) map.dopplers.push_back(static_cast<int>(d) - dhalf);
  map.power.assign(n * doppler_bins, 0.0);

  double energy = 0.0;
  for (const auto& v : samples) energy += std::norm(v);
  const double peak = energy * energy;
  if (!(peak > 0.0)) throw InvalidParameter("ambiguity_function: zero-energy signal");

  const Fft& fft = thread_fft(n);
  CVec prod(n);
  for (std::size_t di = 0; di < n; ++di) {
    const auto lag = static_cast<std::size_t>((map.delays[di] % static_cast<int>(n) + static_cast<int>(n)) %
                                              static_cast<int>(n));
    for (std::size_t k = 0; k < n; ++k) prod[k] = samples[k] * std::conj(samples[(k + lag) % n]);
    fft.forward(prod);
    for (std::size_t d = 0; d < doppler_bins; ++d) {
      const int v = map.dopplers[d];
      const std::size_t bin = static_cast<std::size_t>((v % static_cast<int>(n) + static_cast<int>(n)) %
                                                       static_cast<int>(n));
      map.power[di * doppler_bins + d] = std::norm(prod[bin]) / peak;
    }
  }
  return map;
}

int AcfExperiment::mainlobe_exclusion() const {
  if (exclude_mainlobe_lags > 0) return exclude_mainlobe_lags;
  return pulse ? pulse->oversampling : 1;
}

std::size_t AcfStats::zero_index() const {
  return static_cast<std::size_t>(std::find(lags.begin(), lags.end(), 0) - lags.begin());
}

AcfResult avg_squared_acf(const AcfExperiment& cfg) {
  if (cfg.trials < 1) throw InvalidParameter("avg_squared_acf: trials must be >= 1");
  if (cfg.integrations < 1) throw InvalidParameter("avg_squared_acf: integrations must be >= 1");
  cfg.basis.validate();
  if (cfg.basis.n < 2) throw InvalidParameter("avg_squared_acf: N must be >= 2");
  if (cfg.pulse) cfg.pulse->validate();

  const double per_frame = static_cast<double>(cfg.basis.n) * (cfg.pulse ? cfg.pulse->oversampling : 1);
  const double work = static_cast<double>(cfg.trials) * static_cast<double>(cfg.integrations) * per_frame;
  if (work > cfg.sample_budget) {
    std::ostringstream os;
    os << "avg_squared_acf: trials*K*N*L = " << work << " exceeds the sample budget " << cfg.sample_budget;
    throw BudgetExceeded(os.str());
  }

  const RVec taps = cfg.pulse ? impulse_response(*cfg.pulse) : RVec{};
  const std::size_t lag_count = FrameAcf(cfg, taps).lag_count();
  const std::vector<int> lags = centered_lags(cfg, lag_count);
  const int excl = cfg.mainlobe_exclusion();

  const std::size_t chunks = (cfg.trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
  std::vector<Accumulator> partial(chunks, Accumulator(lag_count));
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    FrameAcf engine(cfg, taps);
    CVec frame(lag_count), integ(lag_count);
    const double inv_k = 1.0 / static_cast<double>(cfg.integrations);
    for (std::size_t c = next++; c < chunks; c = next++) {
      Accumulator& acc = partial[c];
      const std::size_t t_end = std::min(cfg.trials, (c + 1) * kTrialsPerChunk);
      for (std::size_t t = c * kTrialsPerChunk; t < t_end; ++t) {
        std::fill(integ.begin(), integ.end(), Complex{});
        for (std::size_t k = 0; k < cfg.integrations; ++k) {
          engine.compute(t * cfg.integrations + k, frame);
          for (std::size_t i = 0; i < lag_count; ++i) integ[i] += frame[i];
        }
        double isl = 0.0;
        for (std::size_t i = 0; i < lag_count; ++i) {
          integ[i] *= inv_k;
          const double p = std::norm(integ[i]);
          acc.sum[i] += integ[i];
          acc.sum_sq[i] += p;
          if (std::abs(lags[i]) >= excl) isl += p;
        }
        acc.isl_sum += isl;
        acc.isl_sq_sum += isl * isl;
      }
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  Accumulator total(lag_count);
  for (const auto& p : partial) total.merge(p);

  const double t = static_cast<double>(cfg.trials);
  AcfResult res;
  auto& st = res.stats;
  auto& dec = res.decomposition;
  st.lags = lags;
  st.trials = cfg.trials;
  st.integrations = cfg.integrations;
  st.periodic = !cfg.pulse;
  st.oversampling = cfg.pulse ? cfg.pulse->oversampling : 1;
  st.exclude_mainlobe_lags = excl;

  dec.total.resize(lag_count);
  dec.iceberg.resize(lag_count);
  dec.sea_level.resize(lag_count);
  for (std::size_t i = 0; i < lag_count; ++i) {
    const Complex mean = total.sum[i] / t;
    dec.total[i] = total.sum_sq[i] / t;
    dec.iceberg[i] = std::norm(mean);
    dec.sea_level[i] = cfg.trials > 1
                           ? std::max(0.0, (total.sum_sq[i] - t * std::norm(mean)) / (t - 1.0))
                           : 0.0;
  }
  const double norm0 = dec.total[st.zero_index()];
  for (std::size_t i = 0; i < lag_count; ++i) {
    dec.total[i] /= norm0;
    dec.iceberg[i] /= norm0;
    dec.sea_level[i] /= norm0;
  }
  st.mean_sq_acf = dec.total;
  st.var_acf = dec.sea_level;

  st.isl_linear_mean = total.isl_sum / t / norm0;
  const double var_isl =
      cfg.trials > 1 ? std::max(0.0, (total.isl_sq_sum - t * std::pow(total.isl_sum / t, 2)) / (t - 1.0)) : 0.0;
  st.isl_linear_std = std::sqrt(var_isl) / norm0;

  const SidelobeMetrics m = sidelobe_metrics(st, excl);
  st.psl_db = m.psl_db;
  st.isl_db = m.isl_db;
  return res;
}

SidelobeMetrics sidelobe_metrics(const AcfStats& stats, int exclude_mainlobe_lags) {
  if (exclude_mainlobe_lags < 1)
    throw InvalidParameter("sidelobe_metrics: exclusion window must be >= 1 lag");
  double peak = 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < stats.lags.size(); ++i) {
    if (std::abs(stats.lags[i]) < exclude_mainlobe_lags) continue;
    peak = std::max(peak, stats.mean_sq_acf[i]);
    sum += stats.mean_sq_acf[i];
    ++count;
  }
  if (count == 0) throw InvalidParameter("sidelobe_metrics: exclusion window covers every lag");
  return {to_db(peak), to_db(sum)};
}

double far_region_mean(const AcfStats& stats, const RVec& curve, int pulse_span_samples) {
  double sum = 0.0;
  std::size_t count = 0;
  // Shaped waveforms are N*L + span*L samples long, so N*L follows from the lag axis.
  const int nl = static_cast<int>(stats.zero_index()) + 1 - pulse_span_samples;
  for (std::size_t i = 0; i < stats.lags.size(); ++i) {
    const int a = std::abs(stats.lags[i]);
    if (stats.periodic) {
      if (a < stats.exclude_mainlobe_lags) continue;
    } else if (a <= pulse_span_samples || a > nl / 2) {
      continue;
    }
    sum += curve[i];
    ++count;
  }
  if (count == 0) throw InvalidParameter("far_region_mean: empty far region");
  return sum / static_cast<double>(count);
}

std::vector<BasisRank> rank_bases(const Constellation& c, std::span<const ModulationBasis> bases,
                                  std::size_t trials, std::uint64_t seed) {
  if (bases.empty()) throw InvalidParameter("rank_bases: empty basis list");
  std::vector<BasisRank> out;
  for (const auto& b : bases) {
    AcfExperiment cfg;
    cfg.constellation = c;
    cfg.basis = b;
    cfg.trials = trials;
    cfg.integrations = 1;
    cfg.seed = seed;
    BasisRank r;
    r.basis = b;
    r.stats = avg_squared_acf(cfg).stats;
    r.isl_linear = r.stats.isl_linear_mean;
    r.isl_half_width = 3.0 * r.stats.isl_linear_std / std::sqrt(static_cast<double>(trials));
    r.isl_db = to_db(r.isl_linear);
    r.isl_db_lo = to_db(r.isl_linear - r.isl_half_width);
    r.isl_db_hi = to_db(r.isl_linear + r.isl_half_width);
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const BasisRank& a, const BasisRank& b) { return a.isl_linear < b.isl_linear; });
  return out;
}

}  // namespace isac
