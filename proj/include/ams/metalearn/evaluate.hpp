#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ams/metalearn/meta.hpp"
#include "ams/rng.hpp"
#include "ams/taskgen/suite.hpp"

namespace ams::meta {

struct AdaptationStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single task
  std::vector<double> losses;
};

AdaptationStats summarize(std::span<const double> losses);

/// Adapts theta on the first `shots` support examples of every task for
/// `steps` steps of size alpha and reports the query loss.
AdaptationStats evaluate_adaptation(const DifferentiableModel& model, std::span<const double> theta,
                                    std::span<const taskgen::TaskInstance> tasks, std::size_t shots,
                                    int steps, double alpha, Execution exec = Execution::parallel);

/// Draws n_tasks target tasks from `rng`, then evaluates as above.
AdaptationStats evaluate_adaptation(const DifferentiableModel& model, std::span<const double> theta,
                                    const taskgen::DomainSuite& suite, int target_index,
                                    std::size_t shots, int steps, std::size_t n_tasks,
                                    double alpha, Rng& rng, Execution exec = Execution::parallel);

}  // namespace ams::meta
