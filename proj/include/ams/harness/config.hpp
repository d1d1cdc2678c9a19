#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ams/metalearn/meta.hpp"
#include "ams/sampling/sampler.hpp"
#include "ams/taskgen/suite.hpp"

namespace ams::harness {

struct SuiteConfig {
  std::string preset = "mixed";
  std::size_t K = 8;
  std::size_t w = 48;
  /// Master seed of the suite; negative means "use the run seed".
  std::int64_t seed = -1;
  taskgen::SuiteOptions options;

  friend bool operator==(const SuiteConfig&, const SuiteConfig&) = default;
};

struct EvalConfig {
  int every = 50;
  std::size_t n_tasks = 50;
  std::size_t shots = 24;
  int steps = 10;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct ExperimentConfig {
  SuiteConfig suite;
  std::vector<std::size_t> hidden{40, 40};
  sampling::SamplerSpec sampler;
  meta::MetaConfig meta;
  int iterations = 2000;
  EvalConfig eval;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir = "runs";
  bool record_wall_ms = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Keys that must appear in a config file (after overrides).
const std::vector<std::string>& required_keys();
/// Every recognised dotted key, in serialisation order.
std::vector<std::string> known_keys();

/// Sets one key from its text value. Throws ConfigError on an unknown key or
/// a value of the wrong type.
void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_value(const ExperimentConfig& cfg, const std::string& key);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses flat `key = value` lines (`#` starts a comment). Throws ConfigError
/// with the line number for malformed lines.
KeyValues parse_key_values(const std::string& text);

/// Applies `entries` on top of defaults and checks required keys and invariants.
ExperimentConfig config_from_entries(const KeyValues& entries);

/// Every key with its resolved value; parsing the result yields an equal config.
std::string config_to_text(const ExperimentConfig& cfg);

/// Parses a "key=value" override.
std::pair<std::string, std::string> parse_override(const std::string& text);

taskgen::DomainSuite build_suite(const ExperimentConfig& cfg, std::uint64_t run_seed);

}  // namespace ams::harness
