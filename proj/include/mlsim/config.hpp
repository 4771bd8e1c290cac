#pragma once

#include <string>
#include <string_view>

#include "mlsim/scenario.hpp"

namespace mlsim {

/// Parses a YAML scenario document. Keys may be given flat or grouped under the
/// `fd`, `geometry`, `demand` and `toll` sections; omitted keys keep their defaults.
/// Unknown keys, malformed values and invariant violations raise ConfigError.
ScenarioConfig load_config(std::string_view text);

ScenarioConfig load_config_file(const std::string& path);

/// Renders a config back to YAML (all keys, grouped by section).
std::string dump_config(const ScenarioConfig& config);

}  // namespace mlsim
