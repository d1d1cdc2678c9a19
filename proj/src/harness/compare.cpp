#include "ams/harness/compare.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>

#include <json.hpp>
#include <omp.h>

#include "ams/harness/metrics_io.hpp"
#include "ams/harness/stats.hpp"

namespace ams::harness {
namespace {

// Directory names for the sampler list; repeated kinds get a numeric suffix.
std::vector<std::string> sampler_names(const std::vector<sampling::SamplerSpec>& samplers) {
  std::vector<std::string> names;
  std::map<std::string, int> uses;
  for (const auto& s : samplers) {
    const std::string base = to_string(s.kind);
    const int n = ++uses[base];
    names.push_back(n == 1 ? base : base + "_" + std::to_string(n));
  }
  return names;
}

using Curve = std::vector<std::pair<int, double>>;

void write_plots(const std::filesystem::path& out, const ComparisonTable& table,
                 const std::vector<Curve>& curves) {
  const std::size_t S = table.rows.size(), N = table.seeds.size();
  std::map<int, std::vector<std::pair<double, int>>> by_iter;  // iter -> per sampler (sum, count)
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t i = 0; i < N; ++i)
      for (const auto& [iter, v] : curves[a * N + i]) {
        auto& row = by_iter[iter];
        row.resize(S);
        row[a].first += v;
        ++row[a].second;
      }
  std::string text = "iter";
  for (const auto& r : table.rows) text += "," + r.sampler;
  text += "\n";
  for (const auto& [iter, row] : by_iter) {
    text += std::to_string(iter);
    for (const auto& [sum, n] : row) text += "," + (n ? format_double(sum / n) : std::string());
    text += "\n";
  }
  write_text(out / "plot_metatest_vs_iter.csv", text);

  text = "domain";
  for (const auto& r : table.rows) text += "," + r.sampler;
  text += "\n";
  const std::size_t K = table.rows.empty() ? 0 : table.rows.front().mean_sample_counts.size();
  for (std::size_t k = 0; k < K; ++k) {
    text += std::to_string(k);
    for (const auto& r : table.rows) text += "," + format_double(r.mean_sample_counts[k]);
    text += "\n";
  }
  write_text(out / "plot_sample_counts.csv", text);
}

}  // namespace

ComparisonTable tabulate(const std::vector<std::string>& names, const std::vector<std::uint64_t>& seeds,
                         const std::vector<RunSummary>& runs) {
  const std::size_t N = seeds.size();
  if (runs.size() != names.size() * N) throw std::invalid_argument("tabulate: run count mismatch");
  ComparisonTable t;
  t.seeds = seeds;
  t.runs = runs;
  for (const auto& r : runs)
    if (r.status == "ok" && t.targets.empty()) t.targets = r.targets;

  for (std::size_t a = 0; a < names.size(); ++a) {
    SamplerRow row;
    row.sampler = names[a];
    std::vector<std::vector<double>> per_target(t.targets.size());
    std::size_t ok = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const auto& r = runs[a * N + i];
      if (r.status != "ok") {
        ++row.failed_runs;
        row.per_seed.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      ++ok;
      row.per_seed.push_back(r.final_metatest_mean);
      row.spearman_per_seed.push_back(r.spearman_difficulty_count);
      for (std::size_t k = 0; k < t.targets.size(); ++k) per_target[k].push_back(r.final_metatest[k]);
      if (row.mean_sample_counts.empty()) row.mean_sample_counts.assign(r.sample_counts.size(), 0.0);
      for (std::size_t k = 0; k < r.sample_counts.size(); ++k)
        row.mean_sample_counts[k] += static_cast<double>(r.sample_counts[k]);
    }
    for (auto& c : row.mean_sample_counts) c /= static_cast<double>(ok);
    for (const auto& v : per_target) {
      row.target_mean.push_back(mean(v));
      row.target_std.push_back(stddev(v));
    }
    std::vector<double> finite;
    for (double v : row.per_seed)
      if (!std::isnan(v)) finite.push_back(v);
    row.overall_mean = mean(finite);
    row.overall_std = stddev(finite);
    t.rows.push_back(std::move(row));
  }

  t.wins.assign(names.size(), std::vector<int>(names.size(), 0));
  for (std::size_t a = 0; a < names.size(); ++a)
    for (std::size_t b = 0; b < names.size(); ++b)
      for (std::size_t i = 0; i < N; ++i)
        if (t.rows[a].per_seed[i] < t.rows[b].per_seed[i]) ++t.wins[a][b];
  return t;
}

ComparisonTable compare_samplers(const ExperimentConfig& base,
                                 const std::vector<sampling::SamplerSpec>& samplers,
                                 const std::vector<std::uint64_t>& seeds, const CompareOptions& options) {
  if (samplers.size() < 2) throw ConfigError("compare needs at least two samplers");
  if (seeds.empty()) throw ConfigError("compare needs at least one seed");
  base.validate();
  const auto names = sampler_names(samplers);
  const std::size_t N = seeds.size();
  const std::size_t total = samplers.size() * N;

  std::vector<RunSummary> runs(total);
  std::vector<Curve> curves(total);
  std::vector<std::exception_ptr> errors(total);

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, options.jobs))
  for (std::size_t j = 0; j < total; ++j) {
    const std::size_t a = j / N, i = j % N;
    ExperimentConfig cfg = base;
    cfg.sampler = samplers[a];
    cfg.seed = seeds[i];
    RunOptions ro;
    if (options.out_dir) ro.out_dir = *options.out_dir / names[a] / ("seed_" + std::to_string(seeds[i]));
    try {
      auto res = run_experiment(cfg, seeds[i], ro);
      runs[j] = std::move(res.summary);
      for (const auto& r : res.records)
        if (!r.metatest.empty() && r.metatest.front()) {
          double s = 0.0;
          for (const auto& m : r.metatest) s += *m;
          curves[j].emplace_back(r.iter, s / static_cast<double>(r.metatest.size()));
        }
    } catch (const RunAborted& e) {
      runs[j] = e.summary();
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  auto table = tabulate(names, seeds, runs);
  if (options.out_dir) {
    write_text(*options.out_dir / "comparison.json", comparison_to_json(table));
    write_plots(*options.out_dir, table, curves);
  }
  return table;
}

std::string comparison_to_json(const ComparisonTable& t) {
  nlohmann::json j;
  j["format"] = "ams-comparison";
  j["version"] = 1;
  j["targets"] = t.targets;
  j["seeds"] = t.seeds;
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  for (const auto& r : t.rows) {
    nlohmann::json row;
    row["sampler"] = r.sampler;
    row["target_mean"] = r.target_mean;
    row["target_std"] = r.target_std;
    row["overall_mean"] = r.overall_mean;
    row["overall_std"] = r.overall_std;
    row["per_seed"] = nlohmann::json::array();
    for (double v : r.per_seed) row["per_seed"].push_back(num(v));
    row["mean_sample_counts"] = r.mean_sample_counts;
    row["spearman_per_seed"] = r.spearman_per_seed;
    row["failed_runs"] = r.failed_runs;
    j["rows"].push_back(row);
  }
  j["wins"] = t.wins;
  for (const auto& s : t.runs) j["runs"].push_back(nlohmann::json::parse(summary_to_json(s)));
  return j.dump(2) + "\n";
}

std::string comparison_to_text(const ComparisonTable& t) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s", "sampler");
  out += buf;
  for (const auto& name : t.targets) {
    std::snprintf(buf, sizeof buf, " %24s", name.c_str());
    out += buf;
  }
  out += "                      mean  failed\n";
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%-10s", r.sampler.c_str());
    out += buf;
    for (std::size_t k = 0; k < r.target_mean.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %11.5f +- %9.5f", r.target_mean[k], r.target_std[k]);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " %11.5f +- %9.5f  %6d\n", r.overall_mean, r.overall_std, r.failed_runs);
    out += buf;
  }
  out += "wins (row beats column):\n";
  for (std::size_t a = 0; a < t.rows.size(); ++a) {
    std::snprintf(buf, sizeof buf, "%-10s", t.rows[a].sampler.c_str());
    out += buf;
    for (int w : t.wins[a]) {
      std::snprintf(buf, sizeof buf, " %4d", w);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace ams::harness
