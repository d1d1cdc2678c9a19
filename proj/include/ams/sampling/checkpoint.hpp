#pragma once

#include <filesystem>
#include <string>

#include "ams/sampling/sampler.hpp"

namespace ams::sampling {

/// Versioned JSON: config, every parameter, recurrent state and Adam moments.
std::string policy_to_json(const AmsSampler& sampler);
/// Restores into a sampler constructed with a matching K and config.
void policy_from_json(AmsSampler& sampler, const std::string& text);

void save_policy(const AmsSampler& sampler, const std::filesystem::path& path);
void load_policy(AmsSampler& sampler, const std::filesystem::path& path);

}  // namespace ams::sampling
