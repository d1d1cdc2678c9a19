#include "ams/metalearn/evaluate.hpp"

#include <cmath>
#include <exception>

#include "ams/error.hpp"

namespace ams::meta {

AdaptationStats summarize(std::span<const double> losses) {
  AdaptationStats s;
  s.losses.assign(losses.begin(), losses.end());
  if (losses.empty()) return s;
  double sum = 0.0;
  for (double l : losses) sum += l;
  s.mean = sum / static_cast<double>(losses.size());
  if (losses.size() > 1) {
    double sq = 0.0;
    for (double l : losses) sq += (l - s.mean) * (l - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(losses.size() - 1));
  }
  return s;
}

AdaptationStats evaluate_adaptation(const DifferentiableModel& model, std::span<const double> theta,
                                    std::span<const taskgen::TaskInstance> tasks, std::size_t shots,
                                    int steps, double alpha, Execution exec) {
  if (tasks.empty()) throw ConfigError("evaluate_adaptation needs at least one task");
  if (steps < 0) throw ConfigError("evaluate_adaptation: steps must be >= 0");
  for (const auto& t : tasks) {
    if (shots > t.support.size()) {
      throw ConfigError("evaluate_adaptation: " + std::to_string(shots) + " shots but the support set has " +
                        std::to_string(t.support.size()) + " examples");
    }
  }
  std::vector<double> losses(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());

  auto one = [&](std::size_t i) {
    const taskgen::TaskInstance& task = tasks[i];
    const Batch query = taskgen::make_batch(task.query);
    if (shots == 0 || steps == 0) {
      losses[i] = query_loss(model, theta, query);
      return;
    }
    const Batch support = taskgen::make_batch(std::span(task.support).first(shots));
    losses[i] = query_loss(model, inner_adapt(model, theta, support, alpha, steps), query);
  };

  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < tasks.size(); ++i) one(i);
  } else {
    const auto count = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        one(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return summarize(losses);
}

AdaptationStats evaluate_adaptation(const DifferentiableModel& model, std::span<const double> theta,
                                    const taskgen::DomainSuite& suite, int target_index,
                                    std::size_t shots, int steps, std::size_t n_tasks,
                                    double alpha, Rng& rng, Execution exec) {
  if (n_tasks == 0) throw ConfigError("evaluate_adaptation needs n_tasks >= 1");
  std::vector<taskgen::TaskInstance> tasks;
  tasks.reserve(n_tasks);
  for (std::size_t i = 0; i < n_tasks; ++i) tasks.push_back(taskgen::sample_target_task(suite, target_index, rng));
  return evaluate_adaptation(model, theta, tasks, shots, steps, alpha, exec);
}

}  // namespace ams::meta
