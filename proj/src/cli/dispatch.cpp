#include "ams/cli/dispatch.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "ams/cli/config_file.hpp"
#include "ams/cli/gradcheck_suite.hpp"
#include "ams/error.hpp"
#include "ams/harness/compare.hpp"
#include "ams/harness/experiment.hpp"
#include "ams/harness/metrics_io.hpp"
#include "ams/harness/stats.hpp"
#include "ams/metalearn/evaluate.hpp"
#include "ams/taskgen/suite_io.hpp"

namespace ams::cli {
namespace {

namespace fs = std::filesystem;
using harness::ExperimentConfig;

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string out;
  std::optional<int> jobs;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "Flat key = value config file");
  app->add_option("--set", f.sets, "Override, key=value (repeatable)")->allow_extra_args(false);
  app->add_option("--seed", f.seed, "Run seed");
  app->add_option("--seeds", f.seeds, "Seed range N..M (inclusive)");
  app->add_option("--out", f.out, "Output directory (default: $AMS_OUT_DIR, then output.dir)");
  app->add_option("--jobs", f.jobs, "Parallel jobs")->check(CLI::PositiveNumber);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(s);
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("--seeds expects N..M, got '" + text + "'");
    }
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) return {num(text)};
  const auto lo = num(text.substr(0, dots)), hi = num(text.substr(dots + 2));
  if (hi < lo) throw ConfigError("--seeds range is empty: '" + text + "'");
  std::vector<std::uint64_t> out;
  for (auto s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

ExperimentConfig resolve_config(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? load_config_text("", f.sets) : load_config(f.config, f.sets);
  if (f.seed) cfg.seed = *f.seed;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (!f.out.empty()) {
    cfg.out_dir = f.out;
  } else if (const char* env = std::getenv("AMS_OUT_DIR"); env && *env) {
    cfg.out_dir = env;
  }
  cfg.validate();
  return cfg;
}

std::vector<std::uint64_t> seed_list(const CommonFlags& f, const ExperimentConfig& cfg) {
  return f.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : parse_seeds(f.seeds);
}

void print_summary(std::ostream& out, const harness::RunSummary& s) {
  out << "seed " << s.seed << " sampler " << s.sampler << " status " << s.status << "\n";
  for (std::size_t t = 0; t < s.final_metatest.size(); ++t)
    out << "  metatest " << s.targets[t] << " = " << harness::format_double(s.final_metatest[t]) << "\n";
  out << "  sample counts:";
  for (auto c : s.sample_counts) out << " " << c;
  out << "\n  spearman(difficulty, count) = " << harness::format_double(s.spearman_difficulty_count) << "\n";
}

int cmd_train(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(f);
  const auto seeds = seed_list(f, cfg);
  omp_set_num_threads(cfg.jobs);
  int status = kExitOk;
  std::vector<harness::RunSummary> summaries;
  for (auto seed : seeds) {
    harness::RunOptions ro;
    ro.parallel_tasks = cfg.jobs > 1;
    ro.out_dir = seeds.size() == 1 ? fs::path(cfg.out_dir) : fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed));
    try {
      const auto res = harness::run_experiment(cfg, seed, ro);
      print_summary(out, res.summary);
      summaries.push_back(res.summary);
    } catch (const harness::RunAborted& e) {
      err << "numeric abort (seed " << seed << "): " << e.what() << "\n";
      summaries.push_back(e.summary());
      status = kExitNumeric;
    }
  }
  if (seeds.size() > 1) {
    nlohmann::json j;
    j["format"] = "ams-sweep";
    j["version"] = 1;
    std::vector<double> finals;
    for (const auto& s : summaries) {
      j["runs"].push_back(nlohmann::json::parse(harness::summary_to_json(s)));
      if (s.status == "ok") finals.push_back(s.final_metatest_mean);
    }
    j["final_metatest_mean"] = harness::mean(finals);
    j["final_metatest_std"] = harness::stddev(finals);
    harness::write_text(fs::path(cfg.out_dir) / "sweep.json", j.dump(2) + "\n");
    out << "mean final meta-test loss over " << finals.size() << " runs: " << harness::format_double(harness::mean(finals))
        << " +- " << harness::format_double(harness::stddev(finals)) << "\n";
  }
  return status;
}

int cmd_compare(const CommonFlags& f, const std::string& samplers, std::ostream& out) {
  const auto cfg = resolve_config(f);
  std::vector<sampling::SamplerSpec> specs;
  std::stringstream ss(samplers);
  std::string name;
  while (std::getline(ss, name, ',')) {
    auto spec = cfg.sampler;
    spec.kind = sampling::sampler_kind_from_string(name);
    specs.push_back(spec);
  }
  harness::CompareOptions co;
  co.out_dir = fs::path(cfg.out_dir);
  co.jobs = cfg.jobs;
  const auto table = harness::compare_samplers(cfg, specs, seed_list(f, cfg), co);
  out << harness::comparison_to_text(table);
  for (const auto& r : table.rows)
    if (r.failed_runs > 0) return kExitNumeric;
  return kExitOk;
}

int cmd_eval(CommonFlags f, const std::string& checkpoint, std::ostream& out) {
  const fs::path ck_path(checkpoint);
  if (f.config.empty()) {
    const auto resolved = ck_path.parent_path() / "resolved.cfg";
    if (!fs::exists(resolved)) throw ConfigError("eval needs --config (no resolved.cfg next to " + checkpoint + ")");
    f.config = resolved.string();
  }
  const auto cfg = resolve_config(f);
  const auto ck = harness::theta_from_json(harness::read_text(ck_path));
  const auto suite = harness::build_suite(cfg, cfg.seed);
  if (ck.family != taskgen::to_string(suite.family)) throw ConfigError("checkpoint family does not match the suite");
  const auto model = meta::TaskModel::for_suite(suite.family, suite.class_count(), ck.hidden);
  if (model.parameter_count() != ck.theta.size())
    throw ConfigError("checkpoint has " + std::to_string(ck.theta.size()) + " parameters, model expects " +
                      std::to_string(model.parameter_count()));
  omp_set_num_threads(cfg.jobs);
  const auto tasks = harness::evaluation_tasks(cfg, suite, cfg.seed);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto st = meta::evaluate_adaptation(model, ck.theta, tasks[t], cfg.eval.shots, cfg.eval.steps,
                                              cfg.meta.alpha, meta::Execution::parallel);
    out << suite.targets[t].name << " mean " << harness::format_double(st.mean) << " std "
        << harness::format_double(st.std) << " tasks " << st.losses.size() << "\n";
  }
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, int count, std::ostream& out) {
  GradcheckSuiteOptions o;
  o.seed = seed;
  o.seeds = count;
  const auto checks = run_gradcheck_suite(o);
  out << format_gradcheck_report(checks);
  for (const auto& c : checks)
    if (!c.passed()) return kExitNumeric;
  return kExitOk;
}

// Suite commands only need suite.* keys, so required keys are not enforced.
int cmd_suite(const CommonFlags& f, const std::string& preset, bool json, std::ostream& out) {
  if (preset.empty() && f.config.empty()) {
    for (const auto& p : taskgen::preset_names()) out << p << "\n";
    return kExitOk;
  }
  ExperimentConfig cfg;
  harness::KeyValues entries;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("config file not found: " + f.config);
    std::stringstream text;
    text << in.rdbuf();
    entries = harness::parse_key_values(text.str());
  }
  for (const auto& s : f.sets) entries.push_back(harness::parse_override(s));
  for (const auto& [k, v] : entries) harness::set_value(cfg, k, v);
  if (!preset.empty()) harness::set_value(cfg, "suite.preset", preset);
  if (f.seed) cfg.seed = *f.seed;
  cfg.validate();
  const auto suite = harness::build_suite(cfg, cfg.seed);
  if (!f.out.empty()) taskgen::save_suite(suite, f.out);
  if (json) {
    out << taskgen::suite_to_json(suite) << "\n";
    return kExitOk;
  }
  char buf[256];
  out << "preset " << suite.preset << " family " << taskgen::to_string(suite.family) << " K " << suite.K()
      << " w " << suite.w << " seed " << suite.master_seed << "\n";
  std::snprintf(buf, sizeof buf, "%-10s %6s %8s %8s %8s %8s %10s\n", "domain", "pool", "amp", "omega", "noise",
                "phase", "difficulty");
  out << buf;
  auto row = [&](const taskgen::DomainSpec& d) {
    std::snprintf(buf, sizeof buf, "%-10s %6zu %8.3f %8.3f %8.3f %8.3f %10.4f\n", d.name.c_str(), d.pool_size,
                  d.amplitude, d.omega, d.noise_std, d.phase, d.difficulty());
    out << buf;
  };
  for (const auto& d : suite.sources) row(d);
  for (const auto& d : suite.targets) row(d);
  return kExitOk;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial meta sampling experiments", "ams"};
  app.require_subcommand(1);
  app.fallthrough(false);

  CommonFlags train_f, compare_f, eval_f, suite_f;
  auto* train = app.add_subcommand("train", "Run one experiment (or a seed sweep)");
  add_common(train, train_f);

  auto* compare = app.add_subcommand("compare", "Run every sampler over the seed list");
  add_common(compare, compare_f);
  std::string samplers = "uniform,ppq,ppql,ppaql,ppeaql,ams";
  compare->add_option("--samplers", samplers, "Comma-separated sampler kinds")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate a saved theta checkpoint on the target domains");
  add_common(eval, eval_f);
  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "theta.json from a run directory")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  std::uint64_t gc_seed = 0;
  int gc_count = 100;
  gradcheck->add_option("--seed", gc_seed, "Base seed")->capture_default_str();
  gradcheck->add_option("--count", gc_count, "Seeds per component")->check(CLI::PositiveNumber)->capture_default_str();

  auto* suite = app.add_subcommand("suite", "List presets, or describe/serialise one");
  add_common(suite, suite_f);
  std::string preset;
  bool json = false;
  suite->add_option("--preset", preset, "Preset name");
  suite->add_flag("--json", json, "Print the suite as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_f, out, err);
    if (*compare) return cmd_compare(compare_f, samplers, out);
    if (*eval) return cmd_eval(eval_f, checkpoint, out);
    if (*gradcheck) return cmd_gradcheck(gc_seed, gc_count, out);
    if (*suite) return cmd_suite(suite_f, preset, json, out);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("ams");
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ams::cli
