#include "ams/cli/config_file.hpp"

#include <fstream>
#include <sstream>

#include "ams/error.hpp"

namespace ams::cli {

harness::ExperimentConfig load_config_text(const std::string& text,
                                           const std::vector<std::string>& overrides) {
  auto entries = harness::parse_key_values(text);
  for (const auto& o : overrides) entries.push_back(harness::parse_override(o));
  return harness::config_from_entries(entries);
}

harness::ExperimentConfig load_config(const std::filesystem::path& path,
                                      const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_config_text(ss.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace ams::cli
