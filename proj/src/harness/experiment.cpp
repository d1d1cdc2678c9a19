#include "ams/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include <json.hpp>

#include "ams/harness/metrics_io.hpp"
#include "ams/harness/stats.hpp"
#include "ams/metalearn/evaluate.hpp"
#include "ams/sampling/checkpoint.hpp"

namespace ams::harness {
namespace {

// Eval task streams are offset so they never collide with source-domain streams.
constexpr std::uint64_t kEvalStreamOffset = 1u << 20;

void finish_summary(RunSummary& s, const std::vector<MetricsRecord>& records, std::size_t K) {
  s.iterations_completed = static_cast<int>(records.size());
  s.sample_counts.assign(K, 0);
  for (const auto& r : records)
    for (int id : r.domain_ids) ++s.sample_counts[id];
  std::vector<double> counts(s.sample_counts.begin(), s.sample_counts.end());
  s.spearman_difficulty_count = spearman(s.difficulty, counts);

  s.tail_mean_probs.assign(K, 0.0);
  const std::size_t n = records.size();
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.2 * n)));
  if (n > 0) {
    for (std::size_t i = n - std::min(tail, n); i < n; ++i)
      for (std::size_t k = 0; k < K; ++k) s.tail_mean_probs[k] += records[i].probs[k];
    for (auto& p : s.tail_mean_probs) p /= static_cast<double>(std::min(tail, n));
    s.final_buffer = records.back().buffer;
  }
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (!it->metatest.empty() && it->metatest.front().has_value()) {
      s.final_metatest.clear();
      for (const auto& v : it->metatest) s.final_metatest.push_back(*v);
      s.final_metatest_mean = mean(s.final_metatest);
      break;
    }
  }
}

}  // namespace

meta::TaskModel make_task_model(const ExperimentConfig& cfg, const taskgen::DomainSuite& suite) {
  return meta::TaskModel::for_suite(suite.family, suite.class_count(), cfg.hidden);
}

std::vector<std::vector<taskgen::TaskInstance>> evaluation_tasks(const ExperimentConfig& cfg,
                                                                 const taskgen::DomainSuite& suite,
                                                                 std::uint64_t seed) {
  std::vector<std::vector<taskgen::TaskInstance>> out(suite.targets.size());
  for (std::size_t t = 0; t < suite.targets.size(); ++t) {
    Rng rng(derive_seed(seed, kEvalStreamOffset + t, stream::kEvalTasks));
    for (std::size_t i = 0; i < cfg.eval.n_tasks; ++i)
      out[t].push_back(taskgen::sample_target_task(suite, static_cast<int>(t), rng));
  }
  return out;
}

RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& options) {
  cfg.validate();
  const auto suite = build_suite(cfg, seed);
  const std::size_t K = suite.K();
  const auto exec = options.parallel_tasks ? meta::Execution::parallel : meta::Execution::serial;

  auto model = std::make_shared<meta::TaskModel>(make_task_model(cfg, suite));
  Rng init_rng(derive_seed(seed, 0, stream::kModelInit));
  meta::MetaLearner learner(model, model->initial_parameters(init_rng), cfg.meta);

  const auto pool_sizes = suite.pool_sizes();
  auto sampler = sampling::make_sampler(cfg.sampler, pool_sizes, suite.w,
                                        derive_seed(seed, 0, stream::kPolicyInit));
  Rng select_rng(derive_seed(seed, 0, stream::kSelection));
  std::vector<Rng> task_rngs;
  for (std::size_t k = 0; k < K; ++k) task_rngs.emplace_back(derive_seed(seed, k, stream::kTaskDraw));
  const auto eval_tasks = evaluation_tasks(cfg, suite, seed);

  sampling::QueryLossBuffer buffer(K);
  RunResult result;
  RunSummary& summary = result.summary;
  summary.seed = seed;
  summary.sampler = sampler->name();
  for (const auto& t : suite.targets) summary.targets.push_back(t.name);
  summary.difficulty = taskgen::difficulty_scores(suite);

  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    ExperimentConfig resolved = cfg;
    resolved.seed = seed;
    write_text(*options.out_dir / "resolved.cfg", config_to_text(resolved));
  }

  auto write_outputs = [&]() {
    if (!options.out_dir) return;
    write_metrics_csv(*options.out_dir / "metrics.csv", K, summary.targets, result.records);
    write_text(*options.out_dir / "summary.json", summary_to_json(summary));
    ThetaCheckpoint ck{taskgen::to_string(suite.family), suite.class_count(), cfg.hidden,
                       {learner.theta().begin(), learner.theta().end()}};
    write_text(*options.out_dir / "theta.json", theta_to_json(ck));
    if (auto* ams = dynamic_cast<sampling::AmsSampler*>(sampler.get()))
      sampling::save_policy(*ams, *options.out_dir / "policy.json");
  };

  std::vector<double> last_good(learner.theta().begin(), learner.theta().end());
  for (int s = 1; s <= cfg.iterations; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    MetricsRecord rec;
    rec.iter = s;
    try {
      rec.probs = sampler->propose(buffer);
      rec.domain_ids = sampling::select_domains(rec.probs, static_cast<std::size_t>(cfg.meta.meta_batch),
                                                sampler->selection(), select_rng);
      std::vector<taskgen::TaskInstance> tasks;
      for (int id : rec.domain_ids) tasks.push_back(taskgen::sample_task(suite, id, task_rngs[id]));
      const auto step = learner.meta_step(tasks, exec);
      rec.task_losses = step.losses;
      buffer.update(rec.domain_ids, rec.task_losses);
      sampler->observe(rec.domain_ids, rec.task_losses);
      rec.buffer.assign(buffer.values().begin(), buffer.values().end());
      if (s % cfg.eval.every == 0 || s == cfg.iterations) {
        for (const auto& tasks_t : eval_tasks) {
          const auto st = meta::evaluate_adaptation(*model, learner.theta(), tasks_t, cfg.eval.shots,
                                                    cfg.eval.steps, cfg.meta.alpha, exec);
          if (!std::isfinite(st.mean)) throw NumericError("non-finite meta-test loss");
          rec.metatest.emplace_back(st.mean);
        }
      } else {
        rec.metatest.assign(eval_tasks.size(), std::nullopt);
      }
    } catch (const NumericError& e) {
      summary.status = "numeric-abort";
      summary.error = "iteration " + std::to_string(s) + ": " + e.what();
      finish_summary(summary, result.records, K);
      if (options.out_dir) {
        // Optimizer steps validate before applying, so the policy is still the last good one.
        nlohmann::json ck;
        ck["format"] = "ams-last-good";
        ck["version"] = 1;
        ck["iteration"] = s - 1;
        ck["theta"] = nlohmann::json::parse(theta_to_json(
            {taskgen::to_string(suite.family), suite.class_count(), cfg.hidden, last_good}));
        if (auto* ams = dynamic_cast<sampling::AmsSampler*>(sampler.get()))
          ck["policy"] = nlohmann::json::parse(sampling::policy_to_json(*ams));
        write_text(*options.out_dir / "checkpoint_last_good.json", ck.dump(2) + "\n");
        write_metrics_csv(*options.out_dir / "metrics.csv", K, summary.targets, result.records);
        write_text(*options.out_dir / "summary.json", summary_to_json(summary));
      }
      throw RunAborted(summary.error, summary);
    }
    if (cfg.record_wall_ms)
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.records.push_back(std::move(rec));
    last_good.assign(learner.theta().begin(), learner.theta().end());
  }

  finish_summary(summary, result.records, K);
  result.theta.assign(learner.theta().begin(), learner.theta().end());
  write_outputs();
  return result;
}

}  // namespace ams::harness
