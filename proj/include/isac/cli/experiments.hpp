#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "isac/cli/config.hpp"
#include "json.hpp"

namespace isac::cli {

inline constexpr const char* kMetadataFile = "metadata.json";

/// Failure inside an experiment, tagged with the experiment and error class.
class RunError : public Error {
 public:
  RunError(std::string experiment, std::string type, const std::string& message);

  const std::string& experiment() const { return experiment_; }
  const std::string& type() const { return type_; }
  nlohmann::json to_json() const;

 private:
  std::string experiment_;
  std::string type_;
};

struct RunOptions {
  bool plot = false;
};

struct RunSummary {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // relative to output_dir, in write order
  std::vector<std::string> warnings;
  nlohmann::json results = nlohmann::json::object();
};

/// Version string baked in at build time (git describe).
std::string version_string();

/// Runs the configured experiment, writes its CSV (and SVG with `plot`)
/// files plus one metadata JSON into cfg.output_dir.
RunSummary run_experiment(const RunConfig& cfg, const RunOptions& options = {});

/// Metadata document: version, resolved config, conventions, outputs.
nlohmann::json run_metadata(const RunConfig& cfg, const RunSummary& summary);

}  // namespace isac::cli
