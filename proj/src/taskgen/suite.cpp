#include "ams/taskgen/suite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ams/error.hpp"

namespace ams::taskgen {

double DomainSpec::difficulty() const {
  if (family == Family::sinusoid) return omega * (1.0 + noise_std);
  return overlap * static_cast<double>(class_count);
}

double DomainSpec::clean_label(double x) const { return amplitude * std::sin(omega * x + phase); }

std::size_t input_dim(Family family) { return family == Family::sinusoid ? 1 : 2; }

std::size_t output_dim(Family family, int class_count) {
  return family == Family::sinusoid ? 1 : static_cast<std::size_t>(class_count);
}

std::string to_string(Family family) {
  return family == Family::sinusoid ? "sinusoid" : "clusters";
}

Family family_from_string(const std::string& s) {
  if (s == "sinusoid") return Family::sinusoid;
  if (s == "clusters") return Family::clusters;
  throw ConfigError("unknown task family '" + s + "'");
}

Batch make_batch(std::span<const Example> examples) {
  Batch b;
  if (examples.empty()) return b;
  const std::size_t n = examples.size();
  const std::size_t in = examples.front().input.size();
  const std::size_t out = examples.front().target.size();
  std::vector<double> xs;
  xs.reserve(n * in);
  std::vector<double> ys;
  ys.reserve(n * out);
  for (const Example& e : examples) {
    if (e.input.size() != in || e.target.size() != out) {
      throw DimensionError("make_batch: ragged examples");
    }
    xs.insert(xs.end(), e.input.begin(), e.input.end());
    ys.insert(ys.end(), e.target.begin(), e.target.end());
    if (e.label >= 0) b.labels.push_back(e.label);
  }
  b.inputs = nd::Tensor({n, in}, std::move(xs));
  if (out > 0) b.targets = nd::Tensor({n, out}, std::move(ys));
  return b;
}

Batch concat_batches(const Batch& a, const Batch& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  Batch c;
  std::vector<double> xs(a.inputs.values().begin(), a.inputs.values().end());
  xs.insert(xs.end(), b.inputs.values().begin(), b.inputs.values().end());
  c.inputs = nd::Tensor({a.rows() + b.rows(), a.inputs.dim(1)}, std::move(xs));
  if (!a.targets.empty()) {
    std::vector<double> ys(a.targets.values().begin(), a.targets.values().end());
    ys.insert(ys.end(), b.targets.values().begin(), b.targets.values().end());
    c.targets = nd::Tensor({a.rows() + b.rows(), a.targets.dim(1)}, std::move(ys));
  }
  c.labels = a.labels;
  c.labels.insert(c.labels.end(), b.labels.begin(), b.labels.end());
  return c;
}

std::string to_string(Preset preset) {
  switch (preset) {
    case Preset::balanced:
      return "balanced";
    case Preset::quantity_imbalance:
      return "quantity-imbalance";
    case Preset::difficulty_imbalance:
      return "difficulty-imbalance";
    case Preset::mixed:
      return "mixed";
  }
  return "?";
}

Preset preset_from_string(const std::string& name) {
  if (name == "balanced") return Preset::balanced;
  if (name == "quantity-imbalance") return Preset::quantity_imbalance;
  if (name == "difficulty-imbalance") return Preset::difficulty_imbalance;
  if (name == "mixed") return Preset::mixed;
  throw ConfigError("unknown suite preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"balanced", "quantity-imbalance", "difficulty-imbalance", "mixed"};
}

std::vector<std::size_t> DomainSuite::pool_sizes() const {
  std::vector<std::size_t> v;
  v.reserve(sources.size());
  for (const DomainSpec& s : sources) v.push_back(s.pool_size);
  return v;
}

int DomainSuite::class_count() const { return sources.empty() ? 0 : sources.front().class_count; }

namespace {

DomainSpec make_spec(const SuiteOptions& o, double level, std::size_t pool_size, double phase) {
  DomainSpec s;
  s.family = o.family;
  s.amplitude = o.amplitude;
  s.omega = o.omega_easy + level * (o.omega_hard - o.omega_easy);
  s.noise_std = o.noise_easy + level * (o.noise_hard - o.noise_easy);
  s.overlap = o.overlap_easy + level * (o.overlap_hard - o.overlap_easy);
  s.class_count = o.class_count;
  s.phase = phase;
  s.pool_size = pool_size;
  s.x_min = o.x_min;
  s.x_max = o.x_max;
  return s;
}

// Pools from ratio * v_min (k = 0) down to v_min (k = K - 1), geometric.
std::vector<std::size_t> geometric_pools(std::size_t K, std::size_t v_min, double ratio) {
  std::vector<std::size_t> v(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double expo = static_cast<double>(K - 1 - k) / static_cast<double>(K - 1);
    v[k] = static_cast<std::size_t>(std::llround(static_cast<double>(v_min) * std::pow(ratio, expo)));
  }
  return v;
}

}  // namespace

DomainSuite build_suite(Preset preset, std::size_t K, std::size_t w, std::uint64_t master_seed,
                        const SuiteOptions& options) {
  if (K < 2) throw ConfigError("suite needs K >= 2 source domains, got " + std::to_string(K));
  if (w < 4 || w % 2 != 0) throw ConfigError("task size w must be even and >= 4, got " + std::to_string(w));
  if (options.quantity_ratio < 1.0) throw ConfigError("quantity_ratio must be >= 1");
  if (options.n_targets < 1) throw ConfigError("suite needs at least one target domain");
  const std::size_t v_min = options.v_min == 0 ? w : options.v_min;
  if (v_min < w) throw ConfigError("v_min must be >= w");
  const std::size_t v_equal = static_cast<std::size_t>(
      std::llround(static_cast<double>(v_min) * std::sqrt(options.quantity_ratio)));

  const bool vary_quantity = preset == Preset::quantity_imbalance || preset == Preset::mixed;
  const bool vary_difficulty = preset == Preset::difficulty_imbalance || preset == Preset::mixed;

  std::vector<std::size_t> pools =
      vary_quantity ? geometric_pools(K, v_min, options.quantity_ratio) : std::vector<std::size_t>(K, v_equal);

  DomainSuite suite;
  suite.preset = to_string(preset);
  suite.family = options.family;
  suite.w = w;
  suite.master_seed = master_seed;

  const double kd = static_cast<double>(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double level = vary_difficulty ? static_cast<double>(k) / (kd - 1.0) : 0.5;
    const double phase = options.phase_base + options.phase_spread * static_cast<double>(k) / kd;
    DomainSpec s = make_spec(options, level, pools[k], phase);
    s.id = static_cast<int>(k);
    s.name = "source" + std::to_string(k);
    s.rng_stream = derive_seed(master_seed, k, stream::kPool);
    suite.sources.push_back(std::move(s));
  }

  // Targets sit halfway between two adjacent source levels, spread across the
  // hull; with constant difficulty they are told apart by a half-step phase.
  const int nt = options.n_targets;
  for (int t = 0; t < nt; ++t) {
    const std::size_t j =
        std::min<std::size_t>(K - 2, static_cast<std::size_t>((kd - 1.0) * (t + 1) / (nt + 1)));
    const double level = vary_difficulty ? (static_cast<double>(j) + 0.5) / (kd - 1.0) : 0.5;
    const double phase =
        options.phase_base + options.phase_spread * (static_cast<double>(j) + 0.5) / kd +
        (vary_difficulty || options.phase_spread != 0.0 ? 0.0 : std::numbers::pi / 8.0 * (t + 1));
    DomainSpec s = make_spec(options, level, v_equal, phase);
    s.id = t;
    s.name = "target" + std::to_string(t);
    s.rng_stream = derive_seed(master_seed, 1000 + static_cast<std::uint64_t>(t), stream::kPool);
    suite.targets.push_back(std::move(s));
  }

  materialize_pools(suite);
  return suite;
}

DomainPool make_pool(const DomainSpec& spec) {
  DomainPool pool;
  pool.input_dim = input_dim(spec.family);
  Rng rng(spec.rng_stream);
  if (spec.family == Family::sinusoid) {
    std::uniform_real_distribution<double> ux(spec.x_min, spec.x_max);
    pool.inputs.resize(spec.pool_size);
    for (double& x : pool.inputs) x = ux(rng);
    return pool;
  }
  std::normal_distribution<double> nz(0.0, 1.0);
  const double radius = 2.0;
  pool.inputs.resize(spec.pool_size * 2);
  pool.labels.resize(spec.pool_size);
  for (std::size_t i = 0; i < spec.pool_size; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(spec.class_count));
    const double angle = 2.0 * std::numbers::pi * c / spec.class_count + spec.phase;
    pool.labels[i] = c;
    pool.inputs[2 * i] = radius * std::cos(angle) + spec.overlap * nz(rng);
    pool.inputs[2 * i + 1] = radius * std::sin(angle) + spec.overlap * nz(rng);
  }
  return pool;
}

void materialize_pools(DomainSuite& suite) {
  suite.source_pools.clear();
  suite.target_pools.clear();
  for (const DomainSpec& s : suite.sources) suite.source_pools.push_back(make_pool(s));
  for (const DomainSpec& s : suite.targets) suite.target_pools.push_back(make_pool(s));
}

TaskInstance sample_task(const DomainSpec& spec, const DomainPool& pool, std::size_t w, Rng& rng) {
  const std::size_t v = pool.size();
  if (v < w) {
    throw InsufficientPoolError("domain " + spec.name + " has " + std::to_string(v) +
                                " examples, task needs " + std::to_string(w));
  }
  // Partial Fisher-Yates: the first w slots become a uniform ordered draw.
  std::vector<std::size_t> idx(v);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < w; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, v - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(w);

  TaskInstance task;
  task.domain_id = spec.id;
  task.indices = idx;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t p = idx[i];
    Example e;
    if (spec.family == Family::sinusoid) {
      const double x = pool.inputs[p];
      e.input = {x};
      double y = spec.clean_label(x);
      if (spec.noise_std > 0.0) y += spec.noise_std * noise(rng);
      e.target = {y};
    } else {
      e.input = {pool.inputs[2 * p], pool.inputs[2 * p + 1]};
      e.label = pool.labels[p];
    }
    (i < w / 2 ? task.support : task.query).push_back(std::move(e));
  }
  return task;
}

TaskInstance sample_task(const DomainSuite& suite, int domain_id, Rng& rng) {
  if (domain_id < 0 || static_cast<std::size_t>(domain_id) >= suite.sources.size()) {
    throw IndexError("source domain " + std::to_string(domain_id) + " does not exist");
  }
  const auto k = static_cast<std::size_t>(domain_id);
  return sample_task(suite.sources[k], suite.source_pools.at(k), suite.w, rng);
}

TaskInstance sample_target_task(const DomainSuite& suite, int target_index, Rng& rng) {
  if (target_index < 0 || static_cast<std::size_t>(target_index) >= suite.targets.size()) {
    throw IndexError("target domain " + std::to_string(target_index) + " does not exist");
  }
  const auto t = static_cast<std::size_t>(target_index);
  return sample_task(suite.targets[t], suite.target_pools.at(t), suite.w, rng);
}

std::vector<double> difficulty_scores(const DomainSuite& suite) {
  std::vector<double> d;
  d.reserve(suite.sources.size());
  for (const DomainSpec& s : suite.sources) d.push_back(s.difficulty());
  return d;
}

}  // namespace ams::taskgen
