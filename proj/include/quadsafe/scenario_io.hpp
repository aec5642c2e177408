#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "quadsafe/simulation.hpp"

namespace quadsafe {

// YAML scenario files. Every physical quantity carries its unit in the key
// (duration_s, p_z_m, v_x_mps, ...). Unknown keys are rejected; errors are
// InvalidArgument with the key path, e.g. "barriers[1].p_z_m: must be > 0".
Scenario parse_scenario(const std::string& yaml_text);
Scenario load_scenario_file(const std::filesystem::path& path);

// Emits a document that parse_scenario maps back onto the same Scenario.
// With `commented`, each section carries a short explanatory comment.
std::string emit_scenario(const Scenario& scenario, bool commented = false);

// Built-in scenarios addressed as "presets:NAME" on the command line.
const std::vector<std::string>& preset_names();
// Throws InvalidArgument for an unknown name.
Scenario preset(std::string_view name);

// "presets:NAME" or a path to a YAML file.
Scenario resolve_scenario(const std::string& ref);

}  // namespace quadsafe
