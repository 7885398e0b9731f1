#include "isac/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace isac::cli {

using nlohmann::json;

ConfigError::ConfigError(Kind kind, std::string field, const std::string& message, int line, int column)
    : Error(field.empty() ? message : field + ": " + message),
      kind_(kind),
      field_(std::move(field)),
      line_(line),
      column_(column) {}

std::string to_string(ConfigError::Kind kind) {
  switch (kind) {
    case ConfigError::Kind::Io: return "io_error";
    case ConfigError::Kind::Parse: return "parse_error";
    case ConfigError::Kind::UnknownKey: return "unknown_key";
    case ConfigError::Kind::Type: return "type_error";
    case ConfigError::Kind::Constraint: return "constraint_violation";
  }
  return "?";
}

json ConfigError::to_json() const {
  json j{{"kind", "config"}, {"type", to_string(kind_)}, {"message", what()}};
  if (!field_.empty()) j["field"] = field_;
  if (line_ > 0) {
    j["line"] = line_;
    j["column"] = column_;
  }
  return j;
}

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

bool integral(const json& v) {
  if (v.is_number_integer()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15;
}

}  // namespace

Fields::Fields(const json* src, std::string path, json* out) : src_(src), path_(std::move(path)), out_(out) {
  if (src_ != nullptr && !src_->is_object())
    throw ConfigError(ConfigError::Kind::Type, path_, "expected an object");
  if (!out_->is_object()) *out_ = json::object();
}

std::string Fields::field(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

void Fields::fail(std::string_view key, const std::string& message) const {
  throw ConfigError(ConfigError::Kind::Constraint, field(key), message);
}

void Fields::type_error(std::string_view key, const char* expected) const {
  throw ConfigError(ConfigError::Kind::Type, field(key), std::string("expected ") + expected);
}

const json* Fields::lookup(const char* key) {
  seen_.insert(key);
  if (src_ == nullptr) return nullptr;
  const auto it = src_->find(key);
  return it == src_->end() ? nullptr : &*it;
}

bool Fields::has(const char* key) const { return src_ != nullptr && src_->contains(key); }

void Fields::record(const char* key, json value) { (*out_)[key] = std::move(value); }

double Fields::number(const char* key, double def) {
  double v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_number()) type_error(key, "a number");
    v = j->get<double>();
  }
  (*out_)[key] = v;
  return v;
}

std::int64_t Fields::integer(const char* key, std::int64_t def) {
  std::int64_t v = def;
  if (const json* j = lookup(key)) {
    if (!integral(*j)) type_error(key, "an integer");
    v = j->is_number_float() ? static_cast<std::int64_t>(j->get<double>()) : j->get<std::int64_t>();
  }
  (*out_)[key] = v;
  return v;
}

std::uint64_t Fields::unsigned_integer(const char* key, std::uint64_t def) {
  std::uint64_t v = def;
  if (const json* j = lookup(key)) {
    if (j->is_number_unsigned()) {
      v = j->get<std::uint64_t>();
    } else if (integral(*j) && j->get<double>() >= 0.0) {
      v = static_cast<std::uint64_t>(j->get<double>());
    } else {
      type_error(key, "a non-negative integer");
    }
  }
  (*out_)[key] = v;
  return v;
}

bool Fields::flag(const char* key, bool def) {
  bool v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_boolean()) type_error(key, "true or false");
    v = j->get<bool>();
  }
  (*out_)[key] = v;
  return v;
}

std::string Fields::text(const char* key, const std::string& def) {
  std::string v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_string()) type_error(key, "a string");
    v = j->get<std::string>();
  }
  (*out_)[key] = v;
  return v;
}

std::string Fields::required_text(const char* key) {
  if (!has(key)) throw ConfigError(ConfigError::Kind::Constraint, field(key), "required key is missing");
  return text(key, "");
}

std::string Fields::choice(const char* key, const std::string& def, std::initializer_list<std::string_view> allowed) {
  const std::string v = text(key, def);
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string list;
    for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    fail(key, "'" + v + "' is not one of: " + list);
  }
  return v;
}

RVec Fields::numbers(const char* key, const RVec& def) {
  RVec v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_array()) type_error(key, "an array of numbers");
    v.clear();
    for (const auto& e : *j) {
      if (!e.is_number()) type_error(key, "an array of numbers");
      v.push_back(e.get<double>());
    }
  }
  (*out_)[key] = v;
  return v;
}

std::vector<std::int64_t> Fields::integers(const char* key, const std::vector<std::int64_t>& def) {
  std::vector<std::int64_t> v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_array()) type_error(key, "an array of integers");
    v.clear();
    for (const auto& e : *j) {
      if (!integral(e)) type_error(key, "an array of integers");
      v.push_back(e.is_number_float() ? static_cast<std::int64_t>(e.get<double>()) : e.get<std::int64_t>());
    }
  }
  (*out_)[key] = v;
  return v;
}

std::vector<std::string> Fields::texts(const char* key, const std::vector<std::string>& def) {
  std::vector<std::string> v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_array()) type_error(key, "an array of strings");
    v.clear();
    for (const auto& e : *j) {
      if (!e.is_string()) type_error(key, "an array of strings");
      v.push_back(e.get<std::string>());
    }
  }
  (*out_)[key] = v;
  return v;
}

Fields Fields::object(const char* key) {
  const json* j = lookup(key);
  if (j != nullptr && !j->is_object()) type_error(key, "an object");
  json& slot = (*out_)[key];
  slot = json::object();
  return Fields(j, field(key), &slot);
}

std::vector<Fields> Fields::objects(const char* key, const json& def) {
  const json* j = lookup(key);
  std::shared_ptr<const json> owned;
  if (j == nullptr) {
    owned = std::make_shared<const json>(def);
    j = owned.get();
  }
  if (!j->is_array()) type_error(key, "an array of objects");
  json& slot = (*out_)[key];
  slot = json::array();
  for (std::size_t i = 0; i < j->size(); ++i) slot.push_back(json::object());
  std::vector<Fields> out;
  for (std::size_t i = 0; i < j->size(); ++i) {
    const std::string path = field(key) + "[" + std::to_string(i) + "]";
    if (!(*j)[i].is_object()) throw ConfigError(ConfigError::Kind::Type, path, "expected an object");
    Fields f(&(*j)[i], path, &slot[i]);
    f.owned_ = owned;
    out.push_back(std::move(f));
  }
  return out;
}

void Fields::finish() const {
  if (src_ == nullptr) return;
  for (const auto& [key, value] : src_->items()) {
    if (seen_.count(key) != 0) continue;
    std::string msg = "unknown key '" + key + "'";
    std::string best;
    std::size_t best_d = 3;
    for (const auto& s : seen_) {
      const std::size_t d = edit_distance(key, s);
      if (d < best_d) {
        best_d = d;
        best = s;
      }
    }
    if (!best.empty()) msg += " (did you mean '" + best + "'?)";
    throw ConfigError(ConfigError::Kind::UnknownKey, field(key), msg);
  }
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Acf: return "acf";
    case Experiment::Ambiguity: return "ambiguity";
    case Experiment::Kurtosis: return "kurtosis";
    case Experiment::RankBases: return "rank-bases";
    case Experiment::NrGrid: return "nr-grid";
    case Experiment::Estimate: return "estimate";
    case Experiment::Detect: return "detect";
    case Experiment::V2i: return "v2i";
  }
  return "?";
}

std::vector<std::string> experiment_names() {
  return {"acf", "ambiguity", "kurtosis", "rank-bases", "nr-grid", "estimate", "detect", "v2i"};
}

std::optional<Experiment> experiment_from_string(std::string_view s) {
  for (Experiment e : {Experiment::Acf, Experiment::Ambiguity, Experiment::Kurtosis, Experiment::RankBases,
                       Experiment::NrGrid, Experiment::Estimate, Experiment::Detect, Experiment::V2i})
    if (to_string(e) == s) return e;
  return std::nullopt;
}

std::string block_name(Experiment e) {
  std::string s = to_string(e);
  std::replace(s.begin(), s.end(), '-', '_');
  return s;
}

namespace {

// Library errors raised while building an object become constraint errors
// on the key that supplied the value.
template <class F>
auto guarded(const Fields& f, std::string_view key, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    f.fail(key, e.what());
  }
}

std::size_t positive(Fields& f, const char* key, std::uint64_t def) {
  const std::uint64_t v = f.unsigned_integer(key, def);
  f.require(v >= 1, key, "must be >= 1");
  return static_cast<std::size_t>(v);
}

int bounded_int(Fields& f, const char* key, std::int64_t def, std::int64_t lo, std::int64_t hi) {
  const std::int64_t v = f.integer(key, def);
  f.require(v >= lo && v <= hi, key, "must lie in " + std::to_string(lo) + ".." + std::to_string(hi));
  return static_cast<int>(v);
}

Constellation parse_constellation(Fields f, const std::string& family_def, int order_def) {
  const std::string family = f.choice("family", family_def, {"psk", "qam", "apsk"});
  const int order = bounded_int(f, "order", order_def, 1, 1 << 16);
  std::vector<ApskRing> rings;
  for (Fields& r : f.objects("rings", json::array())) {
    ApskRing ring;
    ring.count = bounded_int(r, "count", 1, 1, 1 << 16);
    ring.radius = r.number("radius", 1.0);
    r.require(ring.radius > 0.0, "radius", "must be > 0");
    r.finish();
    rings.push_back(ring);
  }
  const std::string shaping = f.choice("shaping", "uniform", {"uniform", "maxwell-boltzmann", "target-kurtosis"});
  const double lambda = f.number("lambda", 0.0);
  const double target = f.number("target_kurtosis", 1.0);
  const double tol = f.number("tolerance", 1e-3);
  f.require(tol > 0.0, "tolerance", "must be > 0");
  f.finish();

  Constellation base = guarded(f, family == "apsk" ? "rings" : "order", [&] {
    if (family == "psk") return make_psk(order);
    if (family == "qam") return make_qam(order);
    if (rings.empty()) throw InvalidParameter("apsk needs at least one ring");
    return make_apsk(rings);
  });
  if (shaping == "maxwell-boltzmann")
    return guarded(f, "lambda", [&] { return apply_shaping(base, ShapingSpec::maxwell_boltzmann(lambda)); });
  if (shaping == "target-kurtosis")
    return guarded(f, "target_kurtosis", [&] { return apply_shaping(base, shape_for_kurtosis(base, target, tol)); });
  return base;
}

struct BasisOptions {
  std::size_t n = 0;
  std::size_t m_delay = 0;
  std::size_t n_doppler = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::uint64_t cdma_seed = 1;
};

BasisOptions parse_basis_options(Fields& f, std::uint64_t n_def) {
  BasisOptions o;
  o.n = positive(f, "n", n_def);
  Fields otfs = f.object("otfs");
  std::size_t m = static_cast<std::size_t>(otfs.unsigned_integer("m_delay", 0));
  std::size_t nd = static_cast<std::size_t>(otfs.unsigned_integer("n_doppler", 0));
  if (m == 0 && nd == 0) {
    m = 1;
    for (std::size_t d = 1; d * d <= o.n; ++d)
      if (o.n % d == 0) m = d;
  }
  if (m == 0) {
    otfs.require(o.n % nd == 0, "n_doppler", "must divide n");
    m = o.n / nd;
  }
  if (nd == 0) {
    otfs.require(o.n % m == 0, "m_delay", "must divide n");
    nd = o.n / m;
  }
  otfs.require(m * nd == o.n, "m_delay", "m_delay * n_doppler must equal n");
  otfs.record("m_delay", m);
  otfs.record("n_doppler", nd);
  otfs.finish();
  o.m_delay = m;
  o.n_doppler = nd;

  Fields afdm = f.object("afdm");
  const std::int64_t alpha = afdm.integer("alpha", 1);
  afdm.require(alpha >= 0, "alpha", "must be >= 0");
  o.c1 = (2.0 * static_cast<double>(alpha) + 1.0) / (2.0 * static_cast<double>(o.n));
  o.c2 = afdm.number("c2", 0.0);
  afdm.finish();
  o.cdma_seed = f.unsigned_integer("cdma_seed", 1);
  return o;
}

ModulationBasis make_basis(const Fields& f, std::string_view key, const std::string& kind, const BasisOptions& o) {
  return guarded(f, key, [&] {
    ModulationBasis b;
    switch (basis_kind_from_string(kind)) {
      case BasisKind::SC: b = ModulationBasis::sc(o.n); break;
      case BasisKind::OFDM: b = ModulationBasis::ofdm(o.n); break;
      case BasisKind::CDMA: b = ModulationBasis::cdma(o.n, o.cdma_seed); break;
      case BasisKind::OTFS: b = ModulationBasis::otfs(o.m_delay, o.n_doppler); break;
      case BasisKind::AFDM: b = ModulationBasis::afdm(o.n, o.c1, o.c2); break;
    }
    b.validate();
    return b;
  });
}

std::vector<ModulationBasis> parse_bases(Fields& f, const std::vector<std::string>& def, std::uint64_t n_def) {
  const BasisOptions o = parse_basis_options(f, n_def);
  const auto kinds = f.texts("bases", def);
  f.require(!kinds.empty(), "bases", "needs at least one basis");
  std::vector<ModulationBasis> out;
  for (const auto& k : kinds) out.push_back(make_basis(f, "bases", k, o));
  return out;
}

const std::vector<std::string> kAllBases{"SC", "OFDM", "CDMA", "OTFS", "AFDM"};

AcfParams parse_acf(Fields& f) {
  AcfParams p;
  p.constellation = parse_constellation(f.object("constellation"), "qam", 16);
  p.bases = parse_bases(f, {"OFDM"}, 1024);
  p.trials = positive(f, "trials", 1000);
  p.integrations.clear();
  for (auto k : f.integers("integrations", {1})) {
    f.require(k >= 1, "integrations", "every entry must be >= 1");
    p.integrations.push_back(static_cast<std::size_t>(k));
  }
  f.require(!p.integrations.empty(), "integrations", "needs at least one entry");
  Fields pulse = f.object("pulse");
  const bool enabled = pulse.flag("enabled", false);
  PulseFilter pf;
  const std::string kind =
      pulse.choice("kind", "rrc", {"rrc", "rc", "root_raised_cosine", "raised_cosine", "sinc", "gaussian"});
  pf.kind = pulse_kind_from_string(kind);
  pf.beta = pulse.number("beta", pf.beta);
  pf.bt = pulse.number("bt", pf.bt);
  pf.span = bounded_int(pulse, "span", pf.span, 1, 1 << 12);
  pf.oversampling = bounded_int(pulse, "oversampling", pf.oversampling, 1, 1 << 10);
  guarded(pulse, "kind", [&] { pf.validate(); });
  pulse.finish();
  if (enabled) p.pulse = pf;
  p.exclude_mainlobe_lags = bounded_int(f, "exclude_mainlobe_lags", 0, 0, 1 << 24);
  p.sample_budget = f.number("sample_budget", p.sample_budget);
  f.require(p.sample_budget > 0.0, "sample_budget", "must be > 0");
  p.threads = static_cast<unsigned>(f.unsigned_integer("threads", 0));
  return p;
}

AmbiguityParams parse_ambiguity(Fields& f) {
  AmbiguityParams p;
  p.constellation = parse_constellation(f.object("constellation"), "qam", 16);
  const BasisOptions o = parse_basis_options(f, 256);
  p.basis = make_basis(f, "basis", f.text("basis", "OFDM"), o);
  p.doppler_bins = positive(f, "doppler_bins", 64);
  p.trials = positive(f, "trials", 1);
  return p;
}

KurtosisParams parse_kurtosis(Fields& f) {
  KurtosisParams p;
  const json def = json::array({{{"family", "psk"}, {"order", 4}},
                                {{"family", "qam"}, {"order", 16}},
                                {{"family", "qam"}, {"order", 64}}});
  for (Fields& c : f.objects("constellations", def)) p.constellations.push_back(parse_constellation(c, "qam", 16));
  p.samples = positive(f, "samples", p.samples);
  p.include_cscg = f.flag("include_cscg", p.include_cscg);
  p.cscg_samples = positive(f, "cscg_samples", p.cscg_samples);
  Fields sweep = f.object("mb_sweep");
  p.sweep = sweep.flag("enabled", false);
  p.sweep_base = parse_constellation(sweep.object("base"), "qam", 64);
  p.lambda_max = sweep.number("lambda_max", p.lambda_max);
  sweep.require(p.lambda_max > 0.0, "lambda_max", "must be > 0");
  p.sweep_points = positive(sweep, "points", p.sweep_points);
  sweep.require(p.sweep_points >= 2, "points", "must be >= 2");
  sweep.finish();
  f.require(!p.constellations.empty() || p.include_cscg || p.sweep, "constellations", "nothing to compute");
  return p;
}

RankBasesParams parse_rank(Fields& f) {
  RankBasesParams p;
  p.constellation = parse_constellation(f.object("constellation"), "qam", 16);
  p.bases = parse_bases(f, kAllBases, 1024);
  p.trials = positive(f, "trials", p.trials);
  f.require(p.trials >= 2, "trials", "must be >= 2 for confidence intervals");
  return p;
}

NrGridParams parse_nr_grid(Fields& f) {
  NrGridParams p;
  const std::string preset = f.choice("preset", "typical-nr-slot", {"typical-nr-slot", "fr2-64ssb-burst", "custom"});
  GridPreset g;
  if (preset == "custom") {
    g.name = "custom";
    g.subcarriers = 612;
    g.symbols = 14;
    g.scs_khz = 30;
    g.burst.n_ssb = 0;
  } else {
    g = grid_preset(preset);
  }
  Fields grid = f.object("grid");
  g.subcarriers = positive(grid, "subcarriers", g.subcarriers);
  g.symbols = positive(grid, "symbols", g.symbols);
  g.scs_khz = bounded_int(grid, "scs_khz", g.scs_khz, 15, 240);
  Fields ssb = grid.object("ssb");
  g.burst.n_ssb = bounded_int(ssb, "n_ssb", g.burst.n_ssb, 0, 64);
  g.burst.cell_id = bounded_int(ssb, "cell_id", g.burst.cell_id, 0, 1007);
  g.burst.first_subcarrier =
      static_cast<std::size_t>(ssb.unsigned_integer("first_subcarrier", g.burst.first_subcarrier));
  g.burst.period_ms = ssb.number("period_ms", g.burst.period_ms);
  g.burst.window_ms = ssb.number("window_ms", g.burst.window_ms);
  g.burst.scs_khz = g.scs_khz;
  ssb.finish();
  Fields dmrs = grid.object("dmrs");
  g.dmrs = dmrs.flag("enabled", g.dmrs);
  auto to_ints = [](const std::vector<std::int64_t>& v) { return std::vector<int>(v.begin(), v.end()); };
  auto to_i64 = [](const std::vector<int>& v) { return std::vector<std::int64_t>(v.begin(), v.end()); };
  g.dmrs_cfg.positions = to_ints(dmrs.integers("positions", to_i64(g.dmrs_cfg.positions)));
  g.dmrs_cfg.additional = to_ints(dmrs.integers("additional", to_i64(g.dmrs_cfg.additional)));
  g.dmrs_cfg.scrambling_id = bounded_int(dmrs, "scrambling_id", g.dmrs_cfg.scrambling_id, 0, 65535);
  dmrs.finish();
  Fields csirs = grid.object("csirs");
  g.csirs = csirs.flag("enabled", g.csirs);
  g.csirs_cfg.density = csirs.number("density", g.csirs_cfg.density);
  g.csirs_cfg.period_slots = bounded_int(csirs, "period_slots", g.csirs_cfg.period_slots, 1, 1 << 20);
  g.csirs_cfg.symbol = bounded_int(csirs, "symbol", g.csirs_cfg.symbol, 0, kSymbolsPerSlot - 1);
  g.csirs_cfg.subcarrier_offset = bounded_int(csirs, "subcarrier_offset", g.csirs_cfg.subcarrier_offset, 0, 11);
  g.csirs_cfg.scrambling_id = bounded_int(csirs, "scrambling_id", g.csirs_cfg.scrambling_id, 0, 1023);
  csirs.finish();
  Fields srs = grid.object("srs");
  g.srs = srs.flag("enabled", g.srs);
  g.srs_cfg.comb = bounded_int(srs, "comb", g.srs_cfg.comb, 1, 8);
  g.srs_cfg.period_slots = bounded_int(srs, "period_slots", g.srs_cfg.period_slots, 1, 1 << 20);
  g.srs_cfg.symbol = bounded_int(srs, "symbol", g.srs_cfg.symbol, 0, kSymbolsPerSlot - 1);
  g.srs_cfg.comb_offset = bounded_int(srs, "comb_offset", g.srs_cfg.comb_offset, 0, 7);
  g.srs_cfg.root = static_cast<std::uint32_t>(srs.unsigned_integer("root", g.srs_cfg.root));
  srs.finish();
  grid.finish();
  guarded(f, "grid", [&] { build_grid(g); });
  p.grid = g;

  Fields payload = f.object("payload");
  p.payload = payload.flag("enabled", true);
  p.payload_constellation = parse_constellation(payload.object("constellation"), "qam", 16);
  payload.finish();
  p.export_grid = f.flag("export_grid", true);
  return p;
}

RadarGridParams parse_radar_grid(Fields f) {
  RadarGridParams p;
  p.source = f.choice("source", p.source, {"lattice", "typical-nr-slot", "fr2-64ssb-burst"});
  p.subcarriers = positive(f, "subcarriers", p.subcarriers);
  p.symbols = positive(f, "symbols", p.symbols);
  p.scs_khz = bounded_int(f, "scs_khz", p.scs_khz, 15, 240);
  p.pilot_step = bounded_int(f, "pilot_step", p.pilot_step, 1, 1 << 16);
  p.pilot_stagger = bounded_int(f, "pilot_stagger", p.pilot_stagger, 0, 1 << 16);
  p.pilot_cinit = static_cast<std::uint32_t>(bounded_int(f, "pilot_cinit", p.pilot_cinit, 0, (1LL << 31) - 1));
  p.payload = parse_constellation(f.object("payload"), "psk", 4);
  p.payload_seed = f.unsigned_integer("payload_seed", p.payload_seed);
  f.finish();
  guarded(f, "source", [&] { p.build(); });
  return p;
}

TargetSpec parse_target(Fields f) {
  TargetSpec t;
  t.delay_bins = f.number("delay_bins", t.delay_bins);
  t.doppler_bins = f.number("doppler_bins", t.doppler_bins);
  t.amplitude_db = f.number("amplitude_db", t.amplitude_db);
  t.phase_rad = f.number("phase_rad", t.phase_rad);
  f.finish();
  return t;
}

void check_targets(const Fields& f, const char* key, const RadarGridParams& grid, const std::vector<TargetSpec>& ts) {
  guarded(f, key, [&] {
    TargetScene scene;
    scene.carrier = carrier_for(grid.build());
    for (const auto& t : ts) scene.targets.push_back(t.to_target(scene.carrier));
    scene.validate();
  });
}

std::vector<std::string> parse_masks(Fields& f) {
  const auto masks = f.texts("masks", {"full", "pilots"});
  f.require(!masks.empty(), "masks", "needs at least one mask");
  for (const auto& m : masks) guarded(f, "masks", [&] { mask_from_name(m); });
  return masks;
}

PeriodogramConfig parse_padding(Fields f, int def) {
  PeriodogramConfig c;
  c.delay_padding = bounded_int(f, "delay", def, 1, 64);
  c.doppler_padding = bounded_int(f, "doppler", def, 1, 64);
  f.finish();
  return c;
}

RVec snr_range(double lo, double hi, double step) {
  RVec v;
  for (double s = lo; s <= hi + 1e-9; s += step) v.push_back(s);
  return v;
}

EstimateParams parse_estimate(Fields& f) {
  EstimateParams p;
  p.grid = parse_radar_grid(f.object("grid"));
  const json def = json::array({{{"delay_bins", 17.0}, {"doppler_bins", 5.0}}});
  p.targets.clear();
  for (Fields& t : f.objects("targets", def)) p.targets.push_back(parse_target(t));
  f.require(!p.targets.empty(), "targets", "needs at least one target");
  check_targets(f, "targets", p.grid, p.targets);
  p.masks = parse_masks(f);
  p.snr_db = f.numbers("snr_db", snr_range(-25.0, 10.0, 5.0));
  f.require(!p.snr_db.empty(), "snr_db", "needs at least one value");
  p.trials = positive(f, "trials", p.trials);
  p.periodogram = parse_padding(f.object("padding"), 4);
  p.min_rel_power = f.number("min_rel_power", 0.0);
  f.require(p.min_rel_power >= 0.0 && p.min_rel_power < 1.0, "min_rel_power", "must lie in [0, 1)");
  return p;
}

DetectParams parse_detect(Fields& f) {
  DetectParams p;
  p.grid = parse_radar_grid(f.object("grid"));
  p.target = parse_target(f.object("target"));
  check_targets(f, "target", p.grid, {p.target});
  p.masks = parse_masks(f);
  p.snr_db = f.numbers("snr_db", snr_range(-36.0, -4.0, 1.0));
  f.require(!p.snr_db.empty(), "snr_db", "needs at least one value");
  f.require(std::is_sorted(p.snr_db.begin(), p.snr_db.end()), "snr_db", "must be ascending");
  p.detection.threshold_factor = f.number("threshold_factor", p.detection.threshold_factor);
  f.require(p.detection.threshold_factor > 0.0, "threshold_factor", "must be > 0");
  p.detection.trials = positive(f, "trials", 100);
  f.require(p.detection.trials >= 100, "trials", "must be >= 100 for a usable Pd estimate");
  p.detection.periodogram = parse_padding(f.object("padding"), 2);
  p.pd_target = f.number("pd_target", p.pd_target);
  f.require(p.pd_target > 0.0 && p.pd_target < 1.0, "pd_target", "must lie in (0, 1)");
  return p;
}

Eigen::Vector2d parse_point(Fields& f, const char* key, const Eigen::Vector2d& def) {
  const RVec v = f.numbers(key, {def.x(), def.y()});
  f.require(v.size() == 2, key, "expected [x, y]");
  return {v[0], v[1]};
}

void parse_vehicle(Fields f, VehicleConfig& v) {
  v.maneuver = maneuver_from_string(f.choice("maneuver", to_string(v.maneuver), {"straight", "turn", "weave"}));
  v.position = parse_point(f, "position", v.position);
  v.velocity = parse_point(f, "velocity", v.velocity);
  v.turn_rate = f.number("turn_rate", v.turn_rate);
  v.turn_start_s = f.number("turn_start_s", v.turn_start_s);
  v.turn_angle_rad = f.number("turn_angle_rad", v.turn_angle_rad);
  v.weave_amplitude_m = f.number("weave_amplitude_m", v.weave_amplitude_m);
  v.weave_period_s = f.number("weave_period_s", v.weave_period_s);
  guarded(f, "maneuver", [&] { v.validate(); });
  f.finish();
}

V2iParams parse_v2i(Fields& f) {
  V2iParams p;
  f.choice("preset", "paper-fr2-120khz", {"paper-fr2-120khz"});
  V2iScenario& s = p.scenario;
  p.stages.clear();
  for (const auto& name : f.texts("stages", {"initial_access", "connected", "beam_failure", "handover"})) {
    bool found = false;
    for (Stage st : {Stage::InitialAccess, Stage::Connected, Stage::BeamFailure, Stage::Handover}) {
      if (to_string(st) == name) {
        p.stages.push_back(st);
        found = true;
      }
    }
    f.require(found, "stages", "unknown stage '" + name + "'");
  }
  f.require(!p.stages.empty(), "stages", "needs at least one stage");
  p.trials = positive(f, "trials", p.trials);

  parse_vehicle(f.object("vehicle"), s.vehicle);

  Fields gnb = f.object("gnb");
  s.gnb.position = parse_point(gnb, "position", s.gnb.position);
  Fields cb = gnb.object("codebook");
  s.gnb.codebook.n_beams = bounded_int(cb, "n_beams", s.gnb.codebook.n_beams, 1, 1024);
  s.gnb.codebook.n_antennas = bounded_int(cb, "n_antennas", s.gnb.codebook.n_antennas, 1, 4096);
  s.gnb.codebook.sector_rad = cb.number("sector_rad", s.gnb.codebook.sector_rad);
  s.gnb.codebook.boresight_rad = cb.number("boresight_rad", s.gnb.codebook.boresight_rad);
  cb.finish();
  gnb.finish();

  Fields timing = f.object("timing");
  s.timing.scs_khz = bounded_int(timing, "scs_khz", s.timing.scs_khz, 15, 240);
  s.timing.ssb_period_ms = timing.number("ssb_period_ms", s.timing.ssb_period_ms);
  s.timing.burst_window_ms = timing.number("burst_window_ms", s.timing.burst_window_ms);
  s.timing.n_ssb = bounded_int(timing, "n_ssb", s.timing.n_ssb, 1, 64);
  timing.finish();

  Fields link = f.object("link");
  s.link.snr_ref_db = link.number("snr_ref_db", s.link.snr_ref_db);
  s.link.ref_distance_m = link.number("ref_distance_m", s.link.ref_distance_m);
  s.link.pathloss_exponent = link.number("pathloss_exponent", s.link.pathloss_exponent);
  s.link.se_cap = link.number("se_cap", s.link.se_cap);
  link.finish();

  Fields sensing = f.object("sensing");
  TrackerConfig& tc = s.sensing.tracker;
  tc.sigma_range = sensing.number("sigma_range", tc.sigma_range);
  tc.sigma_angle = sensing.number("sigma_angle", tc.sigma_angle);
  tc.sigma_velocity = sensing.number("sigma_velocity", tc.sigma_velocity);
  tc.accel_noise = sensing.number("accel_noise", tc.accel_noise);
  tc.maneuver_gate = sensing.number("maneuver_gate", tc.maneuver_gate);
  tc.maneuver_confirm = bounded_int(sensing, "maneuver_confirm", tc.maneuver_confirm, 1, 1000);
  tc.maneuver_inflation = sensing.number("maneuver_inflation", tc.maneuver_inflation);
  tc.bias_window = bounded_int(sensing, "bias_window", tc.bias_window, 1, 1000);
  tc.bias_gate = sensing.number("bias_gate", tc.bias_gate);
  s.sensing.noiseless = sensing.flag("noiseless", s.sensing.noiseless);
  guarded(sensing, "sigma_range", [&] { static_cast<void>(VehicleTracker(tc)); });
  sensing.finish();

  Fields ia = f.object("initial_access");
  s.initial_access.fixed_ms = ia.number("fixed_ms", s.initial_access.fixed_ms);
  s.initial_access.per_beam_ms = ia.number("per_beam_ms", s.initial_access.per_beam_ms);
  s.initial_access.angle_sigma_rad = ia.number("angle_sigma_rad", s.initial_access.angle_sigma_rad);
  s.initial_access.uncertainty_sigmas = ia.number("uncertainty_sigmas", s.initial_access.uncertainty_sigmas);
  ia.require(s.initial_access.angle_sigma_rad >= 0.0, "angle_sigma_rad", "must be >= 0");
  ia.finish();

  Fields con = f.object("connected");
  s.connected.base_pilot_fraction = con.number("base_pilot_fraction", s.connected.base_pilot_fraction);
  s.connected.csirs_fraction = con.number("csirs_fraction", s.connected.csirs_fraction);
  s.connected.feedback_fraction = con.number("feedback_fraction", s.connected.feedback_fraction);
  s.connected.csi_period_slots = bounded_int(con, "csi_period_slots", s.connected.csi_period_slots, 1, 1 << 20);
  s.connected.duration_ms = con.number("duration_ms", s.connected.duration_ms);
  con.require(s.connected.duration_ms > 0.0, "duration_ms", "must be > 0");
  con.finish();

  Fields bf = f.object("beam_failure");
  BeamFailureConfig& b = s.beam_failure;
  const bool blockage = bf.flag("blockage", true);
  const double blockage_ms = bf.number("blockage_ms", BlockageEvent{}.start_ms);
  bf.require(blockage_ms >= 0.0, "blockage_ms", "must be >= 0");
  p.blockage = blockage ? std::optional<BlockageEvent>(BlockageEvent{blockage_ms}) : std::nullopt;
  b.bfd_period_ms = bf.number("bfd_period_ms", b.bfd_period_ms);
  b.max_count = bounded_int(bf, "max_count", b.max_count, 1, 1000);
  b.sensing_confirm_slots = bounded_int(bf, "sensing_confirm_slots", b.sensing_confirm_slots, 1, 100000);
  b.nominal_rsrp_db = bf.number("nominal_rsrp_db", b.nominal_rsrp_db);
  b.threshold_db = bf.number("threshold_db", b.threshold_db);
  b.measurement_sigma_db = bf.number("measurement_sigma_db", b.measurement_sigma_db);
  b.blockage_loss_db = bf.number("blockage_loss_db", b.blockage_loss_db);
  b.baseline_recovery_ms = bf.number("baseline_recovery_ms", b.baseline_recovery_ms);
  b.window_ms = bf.number("window_ms", b.window_ms);
  bf.require(b.bfd_period_ms > 0.0, "bfd_period_ms", "must be > 0");
  bf.require(b.window_ms > 0.0, "window_ms", "must be > 0");
  bf.finish();

  Fields ho = f.object("handover");
  HandoverConfig& h = s.handover;
  p.handover_maneuver = maneuver_from_string(ho.choice("maneuver", "turn", {"straight", "turn", "weave"}));
  h.vehicle = intersection_path(p.handover_maneuver);
  json cells = json::array();
  for (const auto& c : h.cells) cells.push_back({{"x", c.x()}, {"y", c.y()}});
  h.cells.clear();
  for (Fields& c : ho.objects("cells", cells)) {
    h.cells.emplace_back(c.number("x", 0.0), c.number("y", 0.0));
    c.finish();
  }
  h.measurement_period_ms = ho.number("measurement_period_ms", h.measurement_period_ms);
  h.rsrp_sigma_db = ho.number("rsrp_sigma_db", h.rsrp_sigma_db);
  h.hysteresis_db = ho.number("hysteresis_db", h.hysteresis_db);
  h.time_to_trigger_ms = ho.number("time_to_trigger_ms", h.time_to_trigger_ms);
  h.lookahead_s = ho.number("lookahead_s", h.lookahead_s);
  h.preparation_ms = ho.number("preparation_ms", h.preparation_ms);
  h.execution_ms = ho.number("execution_ms", h.execution_ms);
  h.duration_s = ho.number("duration_s", h.duration_s);
  h.pathloss_exponent = ho.number("pathloss_exponent", h.pathloss_exponent);
  ho.require(h.duration_s > 0.0, "duration_s", "must be > 0");
  ho.finish();

  guarded(f, "timing", [&] { s.validate(); });
  return p;
}

bool has_trials(Experiment e) {
  return e != Experiment::Kurtosis && e != Experiment::NrGrid;
}

std::pair<int, int> position_of(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  const std::size_t end = std::min(text.size(), byte > 0 ? byte - 1 : 0);
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

RunConfig parse_config(std::string_view text, const Overrides& overrides, std::filesystem::path source) {
  json raw;
  try {
    raw = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = position_of(text, e.byte);
    std::string msg = e.what();
    if (const auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError(ConfigError::Kind::Parse, "", msg, line, column);
  }
  if (!raw.is_object()) throw ConfigError(ConfigError::Kind::Type, "", "top level must be a JSON object", 1, 1);
  if (overrides.seed) raw["seed"] = *overrides.seed;
  if (overrides.output_dir) raw["output_dir"] = *overrides.output_dir;

  RunConfig cfg;
  cfg.source = std::move(source);
  cfg.resolved = json::object();
  Fields top(&raw, "", &cfg.resolved);
  const std::string name = top.required_text("experiment");
  const auto exp = experiment_from_string(name);
  if (!exp) {
    std::string list;
    for (const auto& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
    top.fail("experiment", "'" + name + "' is not one of: " + list);
  }
  cfg.experiment = *exp;
  cfg.description = top.text("description", "");
  cfg.seed = top.unsigned_integer("seed", 1);
  cfg.output_dir = top.text("output_dir", "out");

  const std::string block = block_name(cfg.experiment);
  if (overrides.trials) {
    if (!has_trials(cfg.experiment))
      throw ConfigError(ConfigError::Kind::Constraint, "trials",
                        "experiment '" + name + "' has no trials parameter");
    json& b = raw[block];
    if (b.is_null()) b = json::object();
    if (!b.is_object()) throw ConfigError(ConfigError::Kind::Type, block, "expected an object");
    b["trials"] = *overrides.trials;
  }

  Fields f = top.object(block.c_str());
  switch (cfg.experiment) {
    case Experiment::Acf: cfg.params = parse_acf(f); break;
    case Experiment::Ambiguity: cfg.params = parse_ambiguity(f); break;
    case Experiment::Kurtosis: cfg.params = parse_kurtosis(f); break;
    case Experiment::RankBases: cfg.params = parse_rank(f); break;
    case Experiment::NrGrid: cfg.params = parse_nr_grid(f); break;
    case Experiment::Estimate: cfg.params = parse_estimate(f); break;
    case Experiment::Detect: cfg.params = parse_detect(f); break;
    case Experiment::V2i: cfg.params = parse_v2i(f); break;
  }
  f.finish();
  top.finish();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in || std::filesystem::is_directory(path))
    throw ConfigError(ConfigError::Kind::Io, "", "cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides, path);
}

}  // namespace isac::cli
