#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "overlay_phase/core.hpp"

namespace overlay_phase {

/// Names of the profiles compiled into the library ("limewire", "bearshare").
std::vector<std::string> builtin_profile_names();

SoftwareProfile builtin_profile(const std::string& name);

/// Parses a profile from JSON or TOML text (format picked by `toml`).
SoftwareProfile parse_profile(const std::string& text, bool toml = false);
SoftwareProfile load_profile_file(const std::filesystem::path& path);

/// Resolves `name_or_path`: an existing file path, then
/// $OVERLAY_PHASE_PROFILE_DIR/<name>.{json,toml}, then a built-in name.
SoftwareProfile resolve_profile(const std::string& name_or_path);

}  // namespace overlay_phase
