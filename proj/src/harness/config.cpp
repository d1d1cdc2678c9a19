#include "ams/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "ams/error.hpp"

namespace ams::harness {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T out{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  return out;
}

int as_int(const std::string& k, const std::string& v) { return parse_number<int>(k, v); }
std::size_t as_size(const std::string& k, const std::string& v) {
  if (!v.empty() && v[0] == '-') throw ConfigError("key '" + k + "': expected a nonnegative integer, got '" + v + "'");
  return parse_number<std::size_t>(k, v);
}
double as_double(const std::string& k, const std::string& v) { return parse_number<double>(k, v); }
bool as_bool(const std::string& k, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + k + "': expected true or false, got '" + v + "'");
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join_sizes(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

std::vector<std::size_t> split_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  if (v.empty() || v == "none") return out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const std::size_t n = as_size(key, trim(part));
    if (n == 0) throw ConfigError("key '" + key + "': layer sizes must be positive");
    out.push_back(n);
  }
  return out;
}

// Rethrows enum parse failures with the key attached.
template <class F>
auto keyed(const std::string& key, const std::string& value, F f) {
  try {
    return f(value);
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

std::string ppq_mode_name(sampling::PpqMode m) {
  return m == sampling::PpqMode::pool_size ? "pool" : "log-combination";
}
sampling::PpqMode ppq_mode_from(const std::string& s) {
  if (s == "pool") return sampling::PpqMode::pool_size;
  if (s == "log-combination") return sampling::PpqMode::log_combination;
  throw ConfigError("unknown ppq mode '" + s + "' (pool, log-combination)");
}

struct Entry {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

#define AMS_NUM(KEY, FIELD, CONV)                                                      \
  {KEY, {[](const ExperimentConfig& c) { return std::to_string(c.FIELD); },           \
         [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.FIELD = CONV(k, v); }}}
#define AMS_DBL(KEY, FIELD)                                                            \
  {KEY, {[](const ExperimentConfig& c) { return fmt(c.FIELD); },                       \
         [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.FIELD = as_double(k, v); }}}
#define AMS_ENUM(KEY, FIELD, TO, FROM)                                                 \
  {KEY, {[](const ExperimentConfig& c) { return TO(c.FIELD); },                        \
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {         \
           c.FIELD = keyed(k, v, [](const std::string& s) { return FROM(s); });        \
         }}}

const std::vector<std::pair<std::string, Entry>>& registry() {
  using namespace sampling;
  static const std::vector<std::pair<std::string, Entry>> r = {
      {"suite.preset",
       {[](const ExperimentConfig& c) { return c.suite.preset; },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          keyed(k, v, [](const std::string& s) { return taskgen::preset_from_string(s); });
          c.suite.preset = v;
        }}},
      AMS_ENUM("suite.family", suite.options.family, taskgen::to_string, taskgen::family_from_string),
      AMS_NUM("suite.K", suite.K, as_size),
      AMS_NUM("suite.w", suite.w, as_size),
      {"suite.seed",
       {[](const ExperimentConfig& c) { return std::to_string(c.suite.seed); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.suite.seed = parse_number<std::int64_t>(k, v);
        }}},
      AMS_NUM("suite.v_min", suite.options.v_min, as_size),
      AMS_DBL("suite.quantity_ratio", suite.options.quantity_ratio),
      AMS_DBL("suite.amplitude", suite.options.amplitude),
      AMS_DBL("suite.omega_easy", suite.options.omega_easy),
      AMS_DBL("suite.omega_hard", suite.options.omega_hard),
      AMS_DBL("suite.noise_easy", suite.options.noise_easy),
      AMS_DBL("suite.noise_hard", suite.options.noise_hard),
      AMS_DBL("suite.overlap_easy", suite.options.overlap_easy),
      AMS_DBL("suite.overlap_hard", suite.options.overlap_hard),
      AMS_NUM("suite.class_count", suite.options.class_count, as_int),
      AMS_DBL("suite.phase_base", suite.options.phase_base),
      AMS_DBL("suite.phase_spread", suite.options.phase_spread),
      AMS_NUM("suite.n_targets", suite.options.n_targets, as_int),
      AMS_DBL("suite.x_min", suite.options.x_min),
      AMS_DBL("suite.x_max", suite.options.x_max),
      {"model.hidden",
       {[](const ExperimentConfig& c) { return c.hidden.empty() ? std::string("none") : join_sizes(c.hidden); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.hidden = split_sizes(k, v); }}},
      AMS_ENUM("sampler.kind", sampler.kind, to_string, sampler_kind_from_string),
      AMS_ENUM("sampler.selection", sampler.selection, to_string, selection_from_string),
      AMS_NUM("sampler.window", sampler.window, as_size),
      AMS_DBL("sampler.decay", sampler.decay),
      AMS_ENUM("sampler.ppq_mode", sampler.ppq_mode, ppq_mode_name, ppq_mode_from),
      AMS_ENUM("sampler.unseen", sampler.unseen, to_string, unseen_from_string),
      AMS_DBL("policy.gamma", sampler.policy.gamma),
      AMS_DBL("policy.entropy_weight", sampler.policy.entropy_weight),
      AMS_ENUM("policy.entropy_mode", sampler.policy.entropy_mode, to_string, entropy_mode_from_string),
      AMS_ENUM("policy.selection", sampler.policy.selection, to_string, selection_from_string),
      AMS_ENUM("policy.input_norm", sampler.policy.input_norm, to_string, input_norm_from_string),
      AMS_ENUM("policy.surrogate", sampler.policy.surrogate, to_string, surrogate_from_string),
      AMS_ENUM("policy.baseline", sampler.policy.baseline, to_string, baseline_from_string),
      AMS_NUM("policy.attention_size", sampler.policy.attention_size, as_size),
      AMS_NUM("policy.input_size", sampler.policy.input_size, as_size),
      AMS_NUM("policy.hidden_size", sampler.policy.hidden_size, as_size),
      AMS_ENUM("meta.variant", meta.variant, meta::to_string, meta::variant_from_string),
      AMS_DBL("meta.alpha", meta.alpha),
      AMS_NUM("meta.inner_steps", meta.inner_steps, as_int),
      AMS_DBL("meta.beta", meta.beta),
      AMS_NUM("meta.M", meta.meta_batch, as_int),
      AMS_ENUM("meta.optimizer", meta.optimizer, meta::to_string, meta::optimizer_from_string),
      AMS_DBL("meta.hvp_eps", meta.hvp_eps),
      AMS_NUM("train.iterations", iterations, as_int),
      AMS_NUM("eval.every", eval.every, as_int),
      AMS_NUM("eval.n_tasks", eval.n_tasks, as_size),
      AMS_NUM("eval.shots", eval.shots, as_size),
      AMS_NUM("eval.steps", eval.steps, as_int),
      {"run.seed",
       {[](const ExperimentConfig& c) { return std::to_string(c.seed); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.seed = parse_number<std::uint64_t>(k, v);
        }}},
      AMS_NUM("run.jobs", jobs, as_int),
      {"output.dir",
       {[](const ExperimentConfig& c) { return c.out_dir; },
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }}},
      {"output.wall_ms",
       {[](const ExperimentConfig& c) { return std::string(c.record_wall_ms ? "true" : "false"); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.record_wall_ms = as_bool(k, v); }}},
  };
  return r;
}

#undef AMS_NUM
#undef AMS_DBL
#undef AMS_ENUM

const Entry& find_entry(const std::string& key) {
  for (const auto& [k, e] : registry())
    if (k == key) return e;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& required_keys() {
  static const std::vector<std::string> keys = {"suite.preset", "sampler.kind", "meta.variant"};
  return keys;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [k, e] : registry()) out.push_back(k);
  return out;
}

void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  find_entry(key).set(cfg, key, value);
}

std::string get_value(const ExperimentConfig& cfg, const std::string& key) {
  return find_entry(key).get(cfg);
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig config_from_entries(const KeyValues& entries) {
  ExperimentConfig cfg;
  std::map<std::string, bool> seen;
  for (const auto& [k, v] : entries) {
    set_value(cfg, k, v);
    seen[k] = true;
  }
  for (const auto& k : required_keys())
    if (!seen.count(k)) throw ConfigError("missing required key '" + k + "'");
  cfg.validate();
  return cfg;
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, e] : registry()) out += k + " = " + e.get(cfg) + "\n";
  return out;
}

std::pair<std::string, std::string> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || trim(text.substr(0, eq)).empty())
    throw ConfigError("override '" + text + "' must look like key=value");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("key '" + key + "': " + why);
  };
  taskgen::preset_from_string(suite.preset);
  if (suite.K < 2) fail("suite.K", "need at least 2 source domains");
  if (suite.w < 4 || suite.w % 2) fail("suite.w", "must be even and >= 4");
  if (suite.options.v_min != 0 && suite.options.v_min < suite.w) fail("suite.v_min", "must be >= suite.w");
  if (!(suite.options.quantity_ratio >= 1.0)) fail("suite.quantity_ratio", "must be >= 1");
  if (suite.options.n_targets < 1) fail("suite.n_targets", "must be >= 1");
  if (suite.options.class_count < 2) fail("suite.class_count", "must be >= 2");
  if (!(suite.options.x_max > suite.options.x_min)) fail("suite.x_max", "must exceed suite.x_min");
  if (meta.meta_batch > static_cast<int>(suite.K)) fail("meta.M", "must not exceed suite.K");
  if (iterations < 1) fail("train.iterations", "must be >= 1");
  if (eval.every < 1) fail("eval.every", "must be >= 1");
  if (eval.n_tasks < 1) fail("eval.n_tasks", "must be >= 1");
  if (eval.shots < 1 || eval.shots > suite.w / 2) fail("eval.shots", "must lie in [1, suite.w / 2]");
  if (eval.steps < 0) fail("eval.steps", "must be >= 0");
  if (jobs < 1) fail("run.jobs", "must be >= 1");
  meta.validate();
  sampler.validate();
}

taskgen::DomainSuite build_suite(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  const std::uint64_t master = cfg.suite.seed < 0 ? run_seed : static_cast<std::uint64_t>(cfg.suite.seed);
  return taskgen::build_suite(taskgen::preset_from_string(cfg.suite.preset), cfg.suite.K, cfg.suite.w,
                              master, cfg.suite.options);
}

}  // namespace ams::harness
