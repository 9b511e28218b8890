#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptrack/gog.hpp"
#include "ptrack/pipeline.hpp"
#include "ptrack/simulate.hpp"
#include "ptrack/validators.hpp"

namespace ptrack {

enum class ValidatorKind { Auto, None, Score, Feature };

/// Everything the CLI reads from the flat `key = value` config file.
struct ToolkitConfig {
  TrackerConfig tracker;
  GogConfig gog;
  double idsw_gate_px = 10.0;
  ValidatorKind validator = ValidatorKind::Auto;
  FeatureEnergyConfig energy;

  void validate() const;
};

/// `key = value` lines; '#' starts a comment. Throws ParseError on malformed
/// or duplicate keys.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

/// Unknown keys are rejected with Errc::Config.
ToolkitConfig parse_toolkit_config(std::string_view text);
ToolkitConfig load_toolkit_config(const std::filesystem::path& path);
std::string toolkit_config_to_text(const ToolkitConfig& config);

/// Occlusions are written as `agent:start:end` items separated by ';'.
ScenarioConfig parse_scenario_config(std::string_view text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
std::string scenario_to_text(const ScenarioConfig& config);

}  // namespace ptrack
