#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "isac/cli/params.hpp"
#include "isac/common.hpp"
#include "json.hpp"

namespace isac::cli {

/// Invalid configuration. `field` is the dotted path of the offending key.
class ConfigError : public Error {
 public:
  enum class Kind { Io, Parse, UnknownKey, Type, Constraint };

  ConfigError(Kind kind, std::string field, const std::string& message, int line = 0, int column = 0);

  Kind kind() const { return kind_; }
  const std::string& field() const { return field_; }
  int line() const { return line_; }
  int column() const { return column_; }
  nlohmann::json to_json() const;

 private:
  Kind kind_;
  std::string field_;
  int line_;
  int column_;
};

std::string to_string(ConfigError::Kind kind);

/// Reads one JSON object strictly: every key must be consumed, every value
/// must have the expected type. Each read records the effective value
/// (default or given) into the resolved tree.
class Fields {
 public:
  Fields(const nlohmann::json* src, std::string path, nlohmann::json* out);

  double number(const char* key, double def);
  std::int64_t integer(const char* key, std::int64_t def);
  std::uint64_t unsigned_integer(const char* key, std::uint64_t def);
  bool flag(const char* key, bool def);
  std::string text(const char* key, const std::string& def);
  std::string required_text(const char* key);
  std::string choice(const char* key, const std::string& def, std::initializer_list<std::string_view> allowed);
  RVec numbers(const char* key, const RVec& def);
  std::vector<std::int64_t> integers(const char* key, const std::vector<std::int64_t>& def);
  std::vector<std::string> texts(const char* key, const std::vector<std::string>& def);

  Fields object(const char* key);
  /// Array of objects; `def` is used when the key is absent.
  std::vector<Fields> objects(const char* key, const nlohmann::json& def);

  bool has(const char* key) const;
  /// Replaces the recorded value of an already-read key.
  void record(const char* key, nlohmann::json value);

  /// Throws UnknownKey for the first key that was never read.
  void finish() const;

  std::string field(std::string_view key) const;
  [[noreturn]] void fail(std::string_view key, const std::string& message) const;
  void require(bool ok, std::string_view key, const std::string& message) const {
    if (!ok) fail(key, message);
  }

 private:
  const nlohmann::json* lookup(const char* key);
  [[noreturn]] void type_error(std::string_view key, const char* expected) const;

  const nlohmann::json* src_;
  std::shared_ptr<const nlohmann::json> owned_;
  std::string path_;
  nlohmann::json* out_;
  std::set<std::string> seen_;
};

enum class Experiment { Acf, Ambiguity, Kurtosis, RankBases, NrGrid, Estimate, Detect, V2i };

std::string to_string(Experiment e);
std::optional<Experiment> experiment_from_string(std::string_view s);
/// Key of the experiment's parameter block ("rank-bases" -> "rank_bases").
std::string block_name(Experiment e);
std::vector<std::string> experiment_names();

/// Command-line overrides applied on top of the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> output_dir;
};

struct RunConfig {
  Experiment experiment = Experiment::Acf;
  std::string description;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  std::filesystem::path source;
  Params params;
  nlohmann::json resolved;  // every key with its effective value
};

RunConfig parse_config(std::string_view text, const Overrides& overrides = {}, std::filesystem::path source = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

}  // namespace isac::cli
