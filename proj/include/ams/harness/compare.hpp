#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ams/harness/experiment.hpp"

namespace ams::harness {

struct SamplerRow {
  std::string sampler;
  std::vector<double> target_mean;  // per target, across seeds
  std::vector<double> target_std;
  double overall_mean = 0.0;  // mean over targets, then across seeds
  double overall_std = 0.0;
  std::vector<double> per_seed;  // mean over targets, per seed
  std::vector<double> mean_sample_counts;
  std::vector<double> spearman_per_seed;
  int failed_runs = 0;
};

struct ComparisonTable {
  std::vector<std::string> targets;
  std::vector<std::uint64_t> seeds;
  std::vector<SamplerRow> rows;
  /// wins[a][b]: seeds where sampler a's final loss is strictly below b's.
  std::vector<std::vector<int>> wins;
  std::vector<RunSummary> runs;
};

struct CompareOptions {
  std::optional<std::filesystem::path> out_dir;
  int jobs = 1;
};

/// Runs every (sampler, seed) pair. Run directories are
/// <out>/<sampler>/seed_<n>/; comparison.json and plot CSVs go to <out>.
ComparisonTable compare_samplers(const ExperimentConfig& base,
                                 const std::vector<sampling::SamplerSpec>& samplers,
                                 const std::vector<std::uint64_t>& seeds,
                                 const CompareOptions& options = {});

/// Rebuilds the table from per-run summaries (also used to cross-check files).
ComparisonTable tabulate(const std::vector<std::string>& sampler_names,
                         const std::vector<std::uint64_t>& seeds,
                         const std::vector<RunSummary>& runs);

std::string comparison_to_json(const ComparisonTable& table);
std::string comparison_to_text(const ComparisonTable& table);

}  // namespace ams::harness
