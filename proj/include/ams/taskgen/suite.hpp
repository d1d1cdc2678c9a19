#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ams/rng.hpp"
#include "ams/taskgen/domain.hpp"

namespace ams::taskgen {

enum class Preset { balanced, quantity_imbalance, difficulty_imbalance, mixed };

std::string to_string(Preset preset);
/// Throws ConfigError for unknown names.
Preset preset_from_string(const std::string& name);
std::vector<std::string> preset_names();

/// Knobs behind the presets. Difficulty level d in [0, 1] interpolates every
/// difficulty parameter between its easy and hard value.
struct SuiteOptions {
  Family family = Family::sinusoid;
  std::size_t v_min = 0;  // 0 means "w"
  double quantity_ratio = 8.0;
  double amplitude = 1.0;
  double omega_easy = 0.5;
  double omega_hard = 2.0;
  double noise_easy = 0.05;
  double noise_hard = 0.15;
  double overlap_easy = 0.3;
  double overlap_hard = 1.2;
  int class_count = 3;
  /// Phase of domain k is phase_base + phase_spread * k / K (radians).
  double phase_base = 0.0;
  double phase_spread = 0.0;
  int n_targets = 2;
  double x_min = -5.0;
  double x_max = 5.0;

  friend bool operator==(const SuiteOptions&, const SuiteOptions&) = default;
};

/// Fixed example pool of one domain. Inputs are row-major [pool_size x input_dim].
struct DomainPool {
  std::size_t input_dim = 1;
  std::vector<double> inputs;
  std::vector<int> labels;  // cluster domains only
  std::size_t size() const { return input_dim ? inputs.size() / input_dim : 0; }
};

struct DomainSuite {
  std::string preset;
  Family family = Family::sinusoid;
  std::size_t w = 48;
  std::uint64_t master_seed = 0;
  std::vector<DomainSpec> sources;
  std::vector<DomainSpec> targets;
  std::vector<DomainPool> source_pools;
  std::vector<DomainPool> target_pools;

  std::size_t K() const { return sources.size(); }
  std::vector<std::size_t> pool_sizes() const;
  int class_count() const;
};

/// Builds the K source domains and held-out targets for a preset.
///   balanced             equal pools and difficulty
///   quantity_imbalance   pools geometric from ratio*v_min down to v_min, equal difficulty
///   difficulty_imbalance equal pools, difficulty increasing with k
///   mixed                difficulty increasing with k while pools shrink
/// Targets sit between adjacent source difficulty levels.
DomainSuite build_suite(Preset preset, std::size_t K, std::size_t w, std::uint64_t master_seed,
                        const SuiteOptions& options = {});

/// Regenerates the example pools from each spec's rng_stream.
DomainPool make_pool(const DomainSpec& spec);
void materialize_pools(DomainSuite& suite);

/// Draws w distinct pool indices uniformly without replacement; the first w/2
/// form the support set. Sinusoid labels get fresh N(0, noise_std^2) noise
/// from `rng`. Throws InsufficientPoolError when the pool is smaller than w.
TaskInstance sample_task(const DomainSpec& spec, const DomainPool& pool, std::size_t w, Rng& rng);
TaskInstance sample_task(const DomainSuite& suite, int domain_id, Rng& rng);
TaskInstance sample_target_task(const DomainSuite& suite, int target_index, Rng& rng);

/// DomainSpec::difficulty() of every source, in domain order.
std::vector<double> difficulty_scores(const DomainSuite& suite);

}  // namespace ams::taskgen
