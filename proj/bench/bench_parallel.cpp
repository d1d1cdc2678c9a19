// Serial reference vs OpenMP paths of the per-task kernels.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <memory>

#include "ams/harness/config.hpp"
#include "ams/harness/experiment.hpp"
#include "ams/metalearn/evaluate.hpp"
#include "ams/metalearn/meta.hpp"
#include "ams/taskgen/suite.hpp"

using namespace ams;

namespace {

struct Fixture {
  harness::ExperimentConfig cfg;
  taskgen::DomainSuite suite;
  std::shared_ptr<meta::TaskModel> model;
  std::vector<double> theta;
  std::vector<taskgen::TaskInstance> batch;

  explicit Fixture(int tasks) {
    cfg.meta.meta_batch = tasks;
    cfg.suite.K = static_cast<std::size_t>(std::max(tasks, 8));
    suite = harness::build_suite(cfg, 0);
    model = std::make_shared<meta::TaskModel>(harness::make_task_model(cfg, suite));
    Rng rng(1);
    theta = model->initial_parameters(rng);
    for (int k = 0; k < tasks; ++k) batch.push_back(taskgen::sample_task(suite, k, rng));
  }
};

void meta_step(benchmark::State& state, meta::Execution exec) {
  Fixture f(static_cast<int>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  meta::MetaLearner learner(f.model, f.theta, f.cfg.meta);
  for (auto _ : state) {
    learner.set_theta(f.theta);
    benchmark::DoNotOptimize(learner.meta_step(f.batch, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void evaluation(benchmark::State& state, meta::Execution exec) {
  Fixture f(8);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  Rng rng(2);
  std::vector<taskgen::TaskInstance> tasks;
  for (int i = 0; i < state.range(0); ++i) tasks.push_back(taskgen::sample_target_task(f.suite, 0, rng));
  for (auto _ : state)
    benchmark::DoNotOptimize(meta::evaluate_adaptation(*f.model, f.theta, tasks, f.cfg.eval.shots, f.cfg.eval.steps,
                                                       f.cfg.meta.alpha, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void args(benchmark::internal::Benchmark* b, std::initializer_list<int> sizes, std::initializer_list<int> threads) {
  for (int n : sizes)
    for (int t : threads) b->Args({n, t});
  b->ArgNames({"tasks", "threads"})->Unit(benchmark::kMicrosecond)->UseRealTime();
}

}  // namespace

BENCHMARK_CAPTURE(meta_step, serial, meta::Execution::serial)->Apply([](auto* b) { args(b, {3, 8}, {1}); });
BENCHMARK_CAPTURE(meta_step, parallel, meta::Execution::parallel)->Apply([](auto* b) { args(b, {3, 8}, {1, 2, 4, 8}); });
BENCHMARK_CAPTURE(evaluation, serial, meta::Execution::serial)->Apply([](auto* b) { args(b, {50}, {1}); });
BENCHMARK_CAPTURE(evaluation, parallel, meta::Execution::parallel)->Apply([](auto* b) { args(b, {50}, {1, 2, 4, 8}); });

BENCHMARK_MAIN();
