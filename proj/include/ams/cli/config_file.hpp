#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ams/harness/config.hpp"

namespace ams::cli {

/// Reads a flat `key = value` file and applies `overrides` ("key=value") last.
/// Throws ConfigError for a missing file, unknown key, bad value or missing
/// required key.
harness::ExperimentConfig load_config(const std::filesystem::path& path,
                                      const std::vector<std::string>& overrides = {});

/// Same, from text; `path` may be empty when there is no file at all.
harness::ExperimentConfig load_config_text(const std::string& text,
                                           const std::vector<std::string>& overrides = {});

}  // namespace ams::cli
