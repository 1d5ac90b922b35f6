#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace locstat::cli {

/// A YAML document converted to JSON, with the 1-based source line of every node keyed by
/// its JSON pointer ("" is the root).
struct LoadedConfig {
  nlohmann::json json;
  std::map<std::string, int> lines;
};

/// Plain scalars become integers, doubles, booleans or null when they parse as such;
/// quoted scalars stay strings. Throws std::runtime_error carrying the line on YAML errors.
LoadedConfig load_yaml(const std::string& text);

/// Line of the deepest node on the pointer's path, or 0 when nothing matches.
int line_for(const LoadedConfig& cfg, std::string pointer);

}  // namespace locstat::cli
