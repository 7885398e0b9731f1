// isac-lab: runs experiment configs and lists the shipped presets.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isac/cli/config.hpp"
#include "isac/cli/experiments.hpp"
#include "json.hpp"

#ifndef ISAC_LAB_PRESETS
#define ISAC_LAB_PRESETS "presets"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

fs::path presets_dir() {
  if (const char* env = std::getenv("ISAC_LAB_PRESETS"); env != nullptr && *env != '\0') return env;
  return ISAC_LAB_PRESETS;
}

// A path that does not exist is looked up by name among the presets.
fs::path resolve_config(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  for (const fs::path& p : {presets_dir() / arg, presets_dir() / (arg + ".json")})
    if (fs::is_regular_file(p)) return p;
  return arg;
}

int report(const json& error, int code) {
  std::cerr << json{{"error", error}, {"exit_code", code}}.dump() << "\n";
  return code;
}

int list_presets() {
  const fs::path dir = presets_dir();
  if (!fs::is_directory(dir))
    return report({{"kind", "config"}, {"type", "io_error"}, {"message", "no preset directory at " + dir.string()}},
                  kExitConfig);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::string experiment = "?";
    std::string description;
    std::ifstream in(f);
    const json j = json::parse(in, nullptr, false);
    if (j.is_object()) {
      experiment = j.value("experiment", "?");
      description = j.value("description", "");
    }
    std::cout << f.stem().string() << "\t" << experiment << "\t" << description << "\n";
  }
  return 0;
}

int run(const std::string& config, bool plot, const isac::cli::Overrides& overrides) {
  isac::cli::RunConfig cfg;
  try {
    cfg = isac::cli::load_config(resolve_config(config), overrides);
  } catch (const isac::cli::ConfigError& e) {
    json j = e.to_json();
    j["config_file"] = config;
    return report(j, kExitConfig);
  }
  try {
    const auto summary = isac::cli::run_experiment(cfg, {plot});
    for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : summary.files) std::cout << (summary.output_dir / f).string() << "\n";
  } catch (const isac::cli::RunError& e) {
    return report(e.to_json(), kExitRuntime);
  } catch (const std::exception& e) {
    return report({{"kind", "runtime"}, {"type", "runtime_error"}, {"message", e.what()}}, kExitRuntime);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isac-lab: ISAC waveform, sensing and V2I experiments"};
  app.set_version_flag("--version", isac::cli::version_string());
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config (a file path or a preset name)");
  std::string config;
  bool plot = false;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  run_cmd->add_option("config", config, "Config JSON file or preset name")->required();
  run_cmd->add_flag("--plot", plot, "Also write SVG plots");
  run_cmd->add_option("--out", out, "Output directory (overrides output_dir)");
  run_cmd->add_option("--seed", seed, "Master seed (overrides seed)");
  run_cmd->add_option("--trials", trials, "Monte-Carlo trials (overrides the experiment's trials)");

  auto* presets_cmd = app.add_subcommand("presets", "Shipped presets");
  presets_cmd->require_subcommand(1);
  auto* list_cmd = presets_cmd->add_subcommand("list", "List preset names, experiments and descriptions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report({{"kind", "config"}, {"type", "usage_error"}, {"message", e.what()}}, kExitConfig);
  }

  if (*run_cmd) return run(config, plot, {seed, trials, out});
  if (*list_cmd) return list_presets();
  return kExitConfig;
}
