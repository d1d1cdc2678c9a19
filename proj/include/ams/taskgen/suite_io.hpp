#pragma once

#include <filesystem>
#include <string>

#include "ams/taskgen/suite.hpp"

namespace ams::taskgen {

/// JSON with every domain parameter and pool seed; pools are regenerated on load.
std::string suite_to_json(const DomainSuite& suite);
DomainSuite suite_from_json(const std::string& text);

void save_suite(const DomainSuite& suite, const std::filesystem::path& path);
DomainSuite load_suite(const std::filesystem::path& path);

}  // namespace ams::taskgen
