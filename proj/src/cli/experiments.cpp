#include "isac/cli/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "isac/cli/csv.hpp"
#include "isac/cli/svg.hpp"
#include "isac/format.hpp"
#include "isac/random.hpp"
#include "isac/sensing_stats.hpp"

#ifndef ISAC_VERSION
#define ISAC_VERSION "unknown"
#endif

namespace isac::cli {

using nlohmann::json;
namespace fs = std::filesystem;

RunError::RunError(std::string experiment, std::string type, const std::string& message)
    : Error(experiment + ": " + message), experiment_(std::move(experiment)), type_(std::move(type)) {}

json RunError::to_json() const {
  return {{"kind", "runtime"}, {"type", type_}, {"experiment", experiment_}, {"message", what()}};
}

std::string version_string() { return ISAC_VERSION; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Output {
 public:
  Output(fs::path dir, RunSummary& summary) : dir_(std::move(dir)), summary_(summary) {
    fs::create_directories(dir_);
  }

  fs::path file(const std::string& name) {
    if (std::find(summary_.files.begin(), summary_.files.end(), name) == summary_.files.end())
      summary_.files.push_back(name);
    return dir_ / name;
  }

  CsvWriter csv(const std::string& name, std::vector<std::string> header) {
    return CsvWriter(file(name), std::move(header));
  }

  void text(const std::string& name, const std::string& content) {
    const fs::path p = file(name);
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw Error("cannot write '" + p.string() + "'");
  }

 private:
  fs::path dir_;
  RunSummary& summary_;
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// File stems per basis: the lower-case kind, suffixed when a kind repeats.
std::vector<std::string> basis_stems(const std::vector<ModulationBasis>& bases) {
  std::vector<std::string> out;
  std::map<std::string, int> used;
  for (const auto& b : bases) {
    std::string s = lower(to_string(b.kind));
    const int n = ++used[s];
    if (n > 1) s += "_" + std::to_string(n);
    out.push_back(s);
  }
  return out;
}

double db_floor_for_plot(const std::vector<Series>& series, double limit) {
  double lo = 0.0;
  for (const auto& s : series)
    for (double y : s.y)
      if (std::isfinite(y) && y > kDbFloor) lo = std::min(lo, y);
  return std::max(lo, limit);
}

void run_acf(const RunConfig& cfg, const AcfParams& p, Output& out, const RunOptions& opt, RunSummary& summary) {
  auto sum = out.csv("summary.csv", {"basis", "integrations", "trials", "psl_db", "isl_db", "far_mean_sq_acf_db",
                                     "far_iceberg_db", "far_sea_level_db"});
  std::vector<Series> plot;
  const auto stems = basis_stems(p.bases);
  const int span_samples = p.pulse ? p.pulse->span * p.pulse->oversampling : 0;
  json results = json::array();
  for (std::size_t b = 0; b < p.bases.size(); ++b) {
    for (std::size_t k : p.integrations) {
      AcfExperiment e;
      e.constellation = p.constellation;
      e.basis = p.bases[b];
      e.pulse = p.pulse;
      e.trials = p.trials;
      e.integrations = k;
      e.seed = cfg.seed;
      e.exclude_mainlobe_lags = p.exclude_mainlobe_lags;
      e.sample_budget = p.sample_budget;
      e.threads = p.threads;
      const AcfResult r = avg_squared_acf(e);
      const auto& st = r.stats;
      const auto& dec = r.decomposition;

      auto curve = out.csv("acf_" + stems[b] + "_k" + std::to_string(k) + ".csv",
                           {"lag", "mean_sq_acf_db", "iceberg_db", "sea_level_db", "var"});
      Series s{to_string(p.bases[b].kind), {}, {}};
      if (p.integrations.size() > 1) s.name += " K=" + std::to_string(k);
      Series sea{s.name + " sea level", {}, {}};
      for (std::size_t i = 0; i < st.lags.size(); ++i) {
        curve.row({st.lags[i], to_db(st.mean_sq_acf[i]), to_db(dec.iceberg[i]), to_db(dec.sea_level[i]),
                   st.var_acf[i]});
        s.x.push_back(st.lags[i]);
        s.y.push_back(to_db(st.mean_sq_acf[i]));
        sea.x.push_back(st.lags[i]);
        sea.y.push_back(to_db(dec.sea_level[i]));
      }
      const double far_total = far_region_mean(st, dec.total, span_samples);
      const double far_ice = far_region_mean(st, dec.iceberg, span_samples);
      const double far_sea = far_region_mean(st, dec.sea_level, span_samples);
      sum.row({p.bases[b].label(), k, p.trials, st.psl_db, st.isl_db, to_db(far_total), to_db(far_ice),
               to_db(far_sea)});
      results.push_back({{"basis", p.bases[b].label()},
                         {"integrations", k},
                         {"psl_db", st.psl_db},
                         {"isl_db", st.isl_db},
                         {"far_mean_sq_acf_db", to_db(far_total)},
                         {"far_sea_level_db", to_db(far_sea)}});
      plot.push_back(std::move(s));
      if (p.pulse) plot.push_back(std::move(sea));
    }
  }
  summary.results["curves"] = results;
  if (!opt.plot) return;
  if (p.pulse) {
    const PulseAcf pa = pulse_acf(*p.pulse);
    Series ps{"pulse ACF^2", {}, {}};
    for (std::size_t i = 0; i < pa.lags.size(); ++i) {
      ps.x.push_back(pa.lags[i]);
      ps.y.push_back(to_db(pa.values[i] * pa.values[i]));
    }
    plot.push_back(std::move(ps));
  }
  PlotStyle style;
  style.title = "Average squared ACF, " + p.constellation.name();
  style.x_label = "lag (samples)";
  style.y_label = "mean |ACF|^2 (dB)";
  style.y_min = db_floor_for_plot(plot, -100.0);
  out.text("acf.svg", write_svg(plot, style));
}

void run_ambiguity(const RunConfig& cfg, const AmbiguityParams& p, Output& out, const RunOptions& opt,
                   RunSummary& summary) {
  AmbiguityMap acc;
  for (std::size_t t = 0; t < p.trials; ++t) {
    CVec s = sample_symbols(p.constellation, p.basis.n, derive_seed(cfg.seed, t));
    apply_basis(p.basis, s);
    AmbiguityMap m = ambiguity_function(s, p.doppler_bins);
    if (t == 0) {
      acc = std::move(m);
    } else {
      for (std::size_t i = 0; i < acc.power.size(); ++i) acc.power[i] += m.power[i];
    }
  }
  const double peak = *std::max_element(acc.power.begin(), acc.power.end());
  for (double& v : acc.power) v /= peak;

  auto csv = out.csv("ambiguity.csv", {"delay", "doppler", "power_db"});
  const std::size_t nd = acc.dopplers.size();
  double sidelobe = 0.0;
  for (std::size_t i = 0; i < acc.delays.size(); ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      csv.row({acc.delays[i], acc.dopplers[j], to_db(acc.at(i, j))});
      if (acc.delays[i] != 0 || acc.dopplers[j] != 0) sidelobe = std::max(sidelobe, acc.at(i, j));
    }
  }
  summary.results["peak_sidelobe_db"] = to_db(sidelobe);
  if (!opt.plot) return;
  Heatmap h;
  h.title = "Ambiguity function, " + p.basis.label() + ", " + p.constellation.name();
  h.x_label = "delay (samples)";
  h.y_label = "Doppler (bins)";
  h.value_label = "power (dB)";
  h.rows = nd;
  h.cols = acc.delays.size();
  h.values.resize(h.rows * h.cols);
  for (std::size_t i = 0; i < h.cols; ++i)
    for (std::size_t j = 0; j < nd; ++j) h.values[j * h.cols + i] = std::max(to_db(acc.at(i, j)), -60.0);
  h.x0 = acc.delays.front() - 0.5;
  h.y0 = acc.dopplers.front() - 0.5;
  out.text("ambiguity.svg", write_heatmap_svg(h));
}

std::string class_name(GaussianClass c) {
  switch (c) {
    case GaussianClass::SubGaussian: return "sub-gaussian";
    case GaussianClass::Gaussian: return "gaussian";
    case GaussianClass::SuperGaussian: return "super-gaussian";
  }
  return "?";
}

void run_kurtosis(const RunConfig& cfg, const KurtosisParams& p, Output& out, const RunOptions& opt,
                  RunSummary& summary) {
  auto csv = out.csv("kurtosis.csv", {"name", "size", "kurtosis", "sample_kurtosis", "class"});
  json rows = json::array();
  Series exact{"exact", {}, {}};
  Series sampled{"sample", {}, {}};
  for (std::size_t i = 0; i < p.constellations.size(); ++i) {
    const auto& c = p.constellations[i];
    const double k = kurtosis(c);
    const CVec x = sample_symbols(c, p.samples, derive_seed(cfg.seed, i));
    const double ks = sample_kurtosis(x);
    csv.row({c.name(), c.size(), k, ks, class_name(classify_kurtosis(k))});
    rows.push_back({{"name", c.name()}, {"kurtosis", k}, {"sample_kurtosis", ks}});
    exact.x.push_back(static_cast<double>(i));
    exact.y.push_back(k);
    sampled.x.push_back(static_cast<double>(i));
    sampled.y.push_back(ks);
  }
  if (p.include_cscg) {
    Rng rng = make_rng(cfg.seed, p.constellations.size());
    CVec x(p.cscg_samples);
    for (auto& v : x) v = complex_gaussian(rng, 1.0);
    const double ks = sample_kurtosis(x);
    csv.row({"CSCG", 0, 2.0, ks, class_name(GaussianClass::Gaussian)});
    rows.push_back({{"name", "CSCG"}, {"kurtosis", 2.0}, {"sample_kurtosis", ks}});
  }
  summary.results["constellations"] = rows;

  std::vector<Series> plot;
  if (p.sweep) {
    auto sw = out.csv("kurtosis_mb.csv", {"lambda", "kurtosis"});
    Series s{"Maxwell-Boltzmann " + p.sweep_base.name(), {}, {}};
    for (std::size_t i = 0; i < p.sweep_points; ++i) {
      const double lambda = p.lambda_max * static_cast<double>(i) / static_cast<double>(p.sweep_points - 1);
      const double k = kurtosis(apply_shaping(p.sweep_base, ShapingSpec::maxwell_boltzmann(lambda)));
      sw.row({lambda, k});
      s.x.push_back(lambda);
      s.y.push_back(k);
    }
    plot.push_back(std::move(s));
  }
  if (!opt.plot) return;
  PlotStyle style;
  style.y_label = "kurtosis";
  if (p.sweep) {
    style.title = "Kurtosis under Maxwell-Boltzmann shaping";
    style.x_label = "lambda";
  } else {
    if (exact.x.empty()) return;
    style.title = "Constellation kurtosis";
    style.x_label = "constellation index";
    style.markers = true;
    plot = {exact, sampled};
  }
  out.text("kurtosis.svg", write_svg(plot, style));
}

void run_rank(const RunConfig& cfg, const RankBasesParams& p, Output& out, const RunOptions& opt,
              RunSummary& summary) {
  const auto ranks = rank_bases(p.constellation, p.bases, p.trials, cfg.seed);
  auto csv = out.csv("ranking.csv",
                     {"rank", "basis", "isl_db", "isl_db_lo", "isl_db_hi", "isl_linear", "isl_half_width"});
  std::vector<Series> plot;
  json rows = json::array();
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const auto& r = ranks[i];
    csv.row({i + 1, r.basis.label(), r.isl_db, r.isl_db_lo, r.isl_db_hi, r.isl_linear, r.isl_half_width});
    rows.push_back({{"rank", i + 1}, {"basis", r.basis.label()}, {"isl_db", r.isl_db}});
    plot.push_back({to_string(r.basis.kind), {static_cast<double>(i + 1)}, {r.isl_db}});
  }
  summary.results["ranking"] = rows;
  if (!opt.plot) return;
  PlotStyle style;
  style.title = "Integrated sidelobe level by basis, " + p.constellation.name();
  style.x_label = "rank";
  style.y_label = "ISL (dB)";
  style.markers = true;
  out.text("ranking.svg", write_svg(plot, style));
}

void run_nr_grid(const RunConfig& cfg, const NrGridParams& p, Output& out, const RunOptions& opt,
                 RunSummary& summary) {
  ResourceGrid g = build_grid(p.grid);
  if (p.payload) fill_payload(g, p.payload_constellation, derive_seed(cfg.seed, 0));
  for (const auto& w : g.warnings()) summary.warnings.push_back(w);
  if (p.export_grid) {
    std::ofstream os(out.file("grid.csv"), std::ios::binary);
    write_grid_csv(g, os);
    if (!os) throw Error("cannot write grid.csv");
  }
  auto csv = out.csv("grid_summary.csv", {"metric", "value"});
  csv.row({"subcarriers", g.subcarriers()});
  csv.row({"symbols", g.symbols()});
  csv.row({"scs_khz", g.scs_khz()});
  csv.row({"resource_elements", g.size()});
  json counts = json::object();
  for (ReLabel l : {ReLabel::PSS, ReLabel::SSS, ReLabel::PBCH, ReLabel::DMRS, ReLabel::CSIRS, ReLabel::SRS,
                    ReLabel::Data, ReLabel::Empty}) {
    csv.row({"count_" + lower(to_string(l)), g.count(l)});
    counts[to_string(l)] = g.count(l);
  }
  csv.row({"reserved", g.reserved_count()});
  csv.row({"pilots", g.pilot_count()});
  const double rho = pilot_fraction(g);
  csv.row({"pilot_fraction", rho});
  summary.results["counts"] = counts;
  summary.results["pilot_fraction"] = rho;
  if (!opt.plot) return;
  Heatmap h;
  h.title = "Resource grid (" + p.grid.name + ")";
  h.x_label = "OFDM symbol";
  h.y_label = "subcarrier";
  h.rows = g.subcarriers();
  h.cols = g.symbols();
  h.values.resize(g.size());
  h.categories = {"EMPTY", "PSS", "SSS", "PBCH", "DMRS", "CSIRS", "SRS", "DATA", "SSB guard"};
  for (std::size_t m = 0; m < g.symbols(); ++m) {
    for (std::size_t k = 0; k < g.subcarriers(); ++k) {
      const double v = g.reserved(m, k) ? 8.0 : static_cast<double>(static_cast<int>(g.label(m, k)));
      h.values[k * h.cols + m] = v;
    }
  }
  out.text("grid.svg", write_heatmap_svg(h));
}

struct BinError {
  double delay = 0.0;
  double doppler = 0.0;
};

void run_estimate(const RunConfig& cfg, const EstimateParams& p, Output& out, const RunOptions& opt,
                  RunSummary& summary) {
  const ResourceGrid g = p.grid.build();
  TargetScene scene;
  scene.carrier = carrier_for(g);
  for (const auto& t : p.targets) scene.targets.push_back(t.to_target(scene.carrier));
  const double dbin = 1.0 / (static_cast<double>(g.subcarriers()) * scene.carrier.subcarrier_spacing_hz());
  const double vbin = 1.0 / (static_cast<double>(g.symbols()) * scene.carrier.symbol_duration());

  auto csv = out.csv("estimate.csv", {"mask", "snr_db", "target", "rmse_delay_bins", "rmse_doppler_bins",
                                      "rmse_delay_s", "rmse_doppler_hz", "misses"});
  std::vector<Series> plot;
  for (const auto& mask_name : p.masks) {
    const ReMask mask = mask_from_name(mask_name);
    Series s{mask_name, {}, {}};
    for (double snr : p.snr_db) {
      scene.noise_power = 1.0 / from_db(snr);
      std::vector<double> se_d(p.targets.size()), se_v(p.targets.size());
      std::vector<std::size_t> hits(p.targets.size());
      for (std::size_t t = 0; t < p.trials; ++t) {
        const CVec y = apply_scene(g, scene, derive_seed(cfg.seed, t));
        const Periodogram pg = compute_periodogram(g, y, mask, p.periodogram);
        const auto est = find_peaks(pg, p.targets.size(), p.min_rel_power);
        for (std::size_t i = 0; i < p.targets.size(); ++i) {
          double best = INFINITY;
          BinError err;
          for (const auto& e : est) {
            const double dd = (e.delay_s - scene.targets[i].delay_s) / dbin;
            const double dv = (e.doppler_hz - scene.targets[i].doppler_hz) / vbin;
            if (dd * dd + dv * dv < best) {
              best = dd * dd + dv * dv;
              err = {dd, dv};
            }
          }
          if (!std::isfinite(best)) continue;
          se_d[i] += err.delay * err.delay;
          se_v[i] += err.doppler * err.doppler;
          ++hits[i];
        }
      }
      for (std::size_t i = 0; i < p.targets.size(); ++i) {
        const double n = static_cast<double>(hits[i]);
        const double rd = hits[i] ? std::sqrt(se_d[i] / n) : kNaN;
        const double rv = hits[i] ? std::sqrt(se_v[i] / n) : kNaN;
        csv.row({mask_name, snr, i, rd, rv, rd * dbin, rv * vbin, p.trials - hits[i]});
        if (i == 0) {
          s.x.push_back(snr);
          s.y.push_back(rd);
        }
      }
    }
    plot.push_back(std::move(s));
  }
  summary.results["pilot_fraction"] = pilot_fraction(g);
  if (!opt.plot) return;
  PlotStyle style;
  style.title = "Delay RMSE of target 0";
  style.x_label = "per-RE SNR (dB)";
  style.y_label = "delay RMSE (bins)";
  style.markers = true;
  out.text("estimate.svg", write_svg(plot, style));
}

void run_detect(const RunConfig& cfg, const DetectParams& p, Output& out, const RunOptions& opt,
                RunSummary& summary) {
  const ResourceGrid g = p.grid.build();
  TargetScene scene;
  scene.carrier = carrier_for(g);
  scene.targets.push_back(p.target.to_target(scene.carrier));
  DetectionConfig dc = p.detection;
  dc.seed = cfg.seed;

  auto csv = out.csv("detect.csv", {"mask", "snr_db", "pd"});
  auto sum = out.csv("detect_summary.csv", {"mask", "pd_target", "snr_db_at_pd", "shift_db"});
  std::vector<Series> plot;
  json rows = json::array();
  double first = kNaN;
  for (std::size_t m = 0; m < p.masks.size(); ++m) {
    const auto curve = detection_rate(g, scene, mask_from_name(p.masks[m]), p.snr_db, dc);
    Series s{p.masks[m], {}, {}};
    for (const auto& pt : curve) {
      csv.row({p.masks[m], pt.snr_db, pt.pd});
      s.x.push_back(pt.snr_db);
      s.y.push_back(pt.pd);
    }
    double at = kNaN;
    try {
      at = snr_at_pd(curve, p.pd_target);
    } catch (const OutOfRange&) {
      summary.warnings.push_back("mask '" + p.masks[m] + "' never reaches Pd = " + format_shortest(p.pd_target) +
                                 " on the SNR grid");
    }
    if (m == 0) first = at;
    sum.row({p.masks[m], p.pd_target, at, at - first});
    rows.push_back({{"mask", p.masks[m]}, {"snr_db_at_pd", std::isfinite(at) ? json(at) : json(nullptr)}});
    plot.push_back(std::move(s));
  }
  summary.results["snr_at_pd"] = rows;
  summary.results["pilot_fraction"] = pilot_fraction(g);
  if (!opt.plot) return;
  PlotStyle style;
  style.title = "Detection probability, threshold " + format_shortest(p.detection.threshold_factor) + " x median";
  style.x_label = "per-RE SNR (dB)";
  style.y_label = "Pd";
  style.y_min = 0.0;
  style.y_max = 1.0;
  out.text("detect.svg", write_svg(plot, style));
}

json event_json(const StageResult& r, const Event& e) {
  return {{"stage", to_string(r.stage)}, {"mode", to_string(r.mode)}, {"t_ms", e.t_ms}, {"type", e.type},
          {"detail", e.detail}};
}

void run_v2i(const RunConfig& cfg, const V2iParams& p, Output& out, const RunOptions& opt, RunSummary& summary) {
  V2iScenario scn = p.scenario;
  scn.seed = cfg.seed;
  const auto has = [&](Stage s) { return std::find(p.stages.begin(), p.stages.end(), s) != p.stages.end(); };

  auto csv = out.csv("v2i_summary.csv",
                     {"stage", "mode", "latency_ms", "overhead", "throughput_rel", "reduction_pct"});
  std::string events;
  auto log_events = [&](const StageResult& r) {
    for (const auto& e : r.events) events += event_json(r, e).dump() + "\n";
  };
  auto pct = [](double b, double s) { return b > 0.0 ? 100.0 * reduction(b, s) : kNaN; };
  json results = json::object();
  std::vector<Series> plot;

  if (has(Stage::InitialAccess)) {
    const auto b = simulate_initial_access(scn, Mode::Baseline);
    const auto s = simulate_initial_access(scn, Mode::SensingAssisted);
    csv.row({"initial_access", "baseline", b.latency_ms, b.overhead_fraction, b.throughput_rel, 0.0});
    csv.row({"initial_access", "sensing_assisted", s.latency_ms, s.overhead_fraction, s.throughput_rel,
             pct(b.latency_ms, s.latency_ms)});
    log_events(b);
    log_events(s);
    results["initial_access"] = {{"baseline_ms", b.latency_ms},
                                 {"sensing_ms", s.latency_ms},
                                 {"reduction_pct", pct(b.latency_ms, s.latency_ms)}};
  }
  if (has(Stage::Connected)) {
    const double d = scn.connected.duration_ms;
    const auto b = simulate_connected(scn, Mode::Baseline, d);
    const auto s = simulate_connected(scn, Mode::SensingAssisted, d);
    csv.row({"connected", "baseline", 0.0, b.overhead_fraction, b.throughput_rel, 0.0});
    csv.row({"connected", "sensing_assisted", 0.0, s.overhead_fraction, s.throughput_rel,
             pct(b.overhead_fraction, s.overhead_fraction)});
    log_events(b);
    log_events(s);
    auto trace = out.csv("connected_trace.csv", {"slot", "t_ms", "baseline_se", "sensing_se"});
    const double slot_ms = scn.timing.slot_ms();
    Series sb{"baseline", {}, {}}, ss{"sensing-assisted", {}, {}};
    for (std::size_t i = 0; i < b.throughput_trace.size() && i < s.throughput_trace.size(); ++i) {
      const double t = static_cast<double>(i) * slot_ms;
      trace.row({i, t, b.throughput_trace[i], s.throughput_trace[i]});
      sb.x.push_back(t);
      sb.y.push_back(b.throughput_trace[i]);
      ss.x.push_back(t);
      ss.y.push_back(s.throughput_trace[i]);
    }
    if (!sb.x.empty()) plot = {sb, ss};
    results["connected"] = {{"baseline_throughput_rel", b.throughput_rel},
                            {"sensing_throughput_rel", s.throughput_rel},
                            {"overhead_delta", b.overhead_fraction - s.overhead_fraction}};
  }
  if (has(Stage::BeamFailure)) {
    const auto b = simulate_beam_failure(scn, Mode::Baseline, p.blockage);
    const auto s = simulate_beam_failure(scn, Mode::SensingAssisted, p.blockage);
    auto detection = [](const StageResult& r) {
      const auto it = r.metrics.find("detection_ms");
      return it == r.metrics.end() ? kNaN : it->second;
    };
    csv.row({"beam_failure", "baseline", detection(b), b.overhead_fraction, b.throughput_rel, 0.0});
    csv.row({"beam_failure", "sensing_assisted", detection(s), s.overhead_fraction, s.throughput_rel,
             pct(detection(b), detection(s))});
    log_events(b);
    log_events(s);
    results["beam_failure"] = {{"baseline_detection_ms", detection(b)},
                               {"sensing_detection_ms", detection(s)},
                               {"reduction_pct", pct(detection(b), detection(s))}};
  }
  if (has(Stage::Handover)) {
    auto trials = out.csv("handover_trials.csv", {"trial", "mode", "handover", "selected_cell",
                                                  "prepared_before_crossing", "lead_ms", "interruption_ms"});
    V2iScenario ho = scn;
    double sum_b = 0.0, sum_s = 0.0;
    std::size_t n_b = 0, n_s = 0, prepared = 0;
    for (std::size_t i = 0; i < p.trials; ++i) {
      ho.seed = derive_seed(cfg.seed, i);
      for (Mode mode : {Mode::Baseline, Mode::SensingAssisted}) {
        const auto r = simulate_handover(ho, mode);
        const auto metric = [&](const char* k) {
          const auto it = r.metrics.find(k);
          return it == r.metrics.end() ? kNaN : it->second;
        };
        trials.row({i, to_string(mode), metric("handover"), metric("selected_cell"),
                    metric("prepared_before_crossing"), metric("lead_ms"), metric("interruption_ms")});
        if (i == 0) log_events(r);
        if (metric("handover") != 1.0) continue;
        if (mode == Mode::Baseline) {
          sum_b += r.latency_ms;
          ++n_b;
        } else {
          sum_s += r.latency_ms;
          ++n_s;
          if (metric("prepared_before_crossing") == 1.0) ++prepared;
        }
      }
    }
    const double mb = n_b ? sum_b / static_cast<double>(n_b) : kNaN;
    const double ms = n_s ? sum_s / static_cast<double>(n_s) : kNaN;
    csv.row({"handover", "baseline", mb, 0.0, 1.0, 0.0});
    csv.row({"handover", "sensing_assisted", ms, 0.0, 1.0, pct(mb, ms)});
    results["handover"] = {{"trials", p.trials},
                           {"prepared_before_crossing", prepared},
                           {"baseline_interruption_ms", mb},
                           {"sensing_interruption_ms", ms}};
  }
  out.text("events.jsonl", events);
  summary.results = results;
  if (!opt.plot || plot.empty()) return;
  PlotStyle style;
  style.title = "Connected-mode spectral efficiency";
  style.x_label = "time (ms)";
  style.y_label = "rate (bit/s/Hz)";
  out.text("v2i_throughput.svg", write_svg(plot, style));
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const BudgetExceeded*>(&e)) return "budget_exceeded";
  if (dynamic_cast<const InvalidParameter*>(&e)) return "invalid_parameter";
  if (dynamic_cast<const OutOfRange*>(&e)) return "out_of_range";
  if (dynamic_cast<const Collision*>(&e)) return "collision";
  if (dynamic_cast<const CoverageError*>(&e)) return "coverage_error";
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return "io_error";
  return "runtime_error";
}

}  // namespace

RunSummary run_experiment(const RunConfig& cfg, const RunOptions& options) {
  RunSummary summary;
  summary.output_dir = cfg.output_dir;
  try {
    Output out(cfg.output_dir, summary);
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, AcfParams>) run_acf(cfg, p, out, options, summary);
          if constexpr (std::is_same_v<P, AmbiguityParams>) run_ambiguity(cfg, p, out, options, summary);
          if constexpr (std::is_same_v<P, KurtosisParams>) run_kurtosis(cfg, p, out, options, summary);
          if constexpr (std::is_same_v<P, RankBasesParams>) run_rank(cfg, p, out, options, summary);
          if constexpr (std::is_same_v<P, NrGridParams>) run_nr_grid(cfg, p, out, options, summary);
          if constexpr (std::is_same_v<P, EstimateParams>) run_estimate(cfg, p, out, options, summary);
          if constexpr (std::is_same_v<P, DetectParams>) run_detect(cfg, p, out, options, summary);
          if constexpr (std::is_same_v<P, V2iParams>) run_v2i(cfg, p, out, options, summary);
        },
        cfg.params);
    out.text(kMetadataFile, run_metadata(cfg, summary).dump(2) + "\n");
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(to_string(cfg.experiment), error_type(e), e.what());
  }
  return summary;
}

json run_metadata(const RunConfig& cfg, const RunSummary& summary) {
  std::vector<std::string> outputs = summary.files;
  if (std::find(outputs.begin(), outputs.end(), kMetadataFile) == outputs.end()) outputs.push_back(kMetadataFile);
  return {{"tool", "isac-lab"},
          {"version", version_string()},
          {"experiment", to_string(cfg.experiment)},
          {"config_file", cfg.source.string()},
          {"seed", cfg.seed},
          {"resolved_config", cfg.resolved},
          {"conventions",
           {{"db", "10*log10 of a linear power ratio; zero power is reported as -300 dB"},
            {"csv_numbers", "shortest decimal that round-trips to the same IEEE-754 double"},
            {"seeds", "per-trial seed = mix(master seed, trial index)"}}},
          {"outputs", outputs},
          {"warnings", summary.warnings},
          {"results", summary.results}};
}

}  // namespace isac::cli
