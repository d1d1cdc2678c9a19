#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ams/error.hpp"
#include "ams/harness/config.hpp"
#include "ams/metalearn/task_model.hpp"

namespace ams::harness {

/// One row of the metrics stream.
struct MetricsRecord {
  int iter = 0;
  std::vector<int> domain_ids;
  std::vector<double> probs;        // P_T used for the selection
  std::vector<double> buffer;       // Q_T after the update
  std::vector<double> task_losses;  // in domain_ids order
  std::vector<std::optional<double>> metatest;  // per target, eval iterations only
  double wall_ms = 0.0;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::string sampler;
  std::string status = "ok";  // "ok" or "numeric-abort"
  std::string error;
  int iterations_completed = 0;
  std::vector<std::string> targets;
  std::vector<double> final_metatest;  // per target
  double final_metatest_mean = 0.0;
  std::vector<long long> sample_counts;
  std::vector<double> difficulty;
  double spearman_difficulty_count = 0.0;
  /// Time-averaged P_T over the last 20% of iterations.
  std::vector<double> tail_mean_probs;
  std::vector<double> final_buffer;
};

struct RunResult {
  std::vector<MetricsRecord> records;
  RunSummary summary;
  std::vector<double> theta;
};

/// Raised by run_experiment on a numeric failure; carries the partial summary.
class RunAborted : public NumericError {
 public:
  RunAborted(const std::string& what, RunSummary summary)
      : NumericError(what), summary_(std::move(summary)) {}
  const RunSummary& summary() const { return summary_; }

 private:
  RunSummary summary_;
};

struct RunOptions {
  /// When set, metrics.csv, summary.json, resolved.cfg and checkpoints go here.
  std::optional<std::filesystem::path> out_dir;
  /// Parallel task evaluation inside the run (results are identical either way).
  bool parallel_tasks = false;
};

/// Full sampling/meta-training loop for one seed. Numeric failures write
/// checkpoint_last_good.json (when an output directory is set) and throw
/// RunAborted naming the iteration.
RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed,
                         const RunOptions& options = {});

/// Task model matching the suite family and the configured hidden sizes.
meta::TaskModel make_task_model(const ExperimentConfig& cfg, const taskgen::DomainSuite& suite);

/// Meta-test tasks for one seed, shared by every sampler.
std::vector<std::vector<taskgen::TaskInstance>> evaluation_tasks(const ExperimentConfig& cfg,
                                                                 const taskgen::DomainSuite& suite,
                                                                 std::uint64_t seed);

}  // namespace ams::harness
