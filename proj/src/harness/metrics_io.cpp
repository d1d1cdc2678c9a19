#include "ams/harness/metrics_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ams/error.hpp"

namespace ams::harness {
namespace {

template <class T, class F>
std::string join(const std::vector<T>& xs, char sep, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += f(xs[i]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metrics_header(std::size_t K, std::span<const std::string> targets) {
  std::string h = "iter,domain_ids";
  for (std::size_t k = 1; k <= K; ++k) h += ",P_" + std::to_string(k);
  for (std::size_t k = 1; k <= K; ++k) h += ",Q_" + std::to_string(k);
  h += ",task_losses";
  for (const auto& t : targets) h += ",metatest_" + t;
  return h + ",wall_ms";
}

std::string metrics_row(const MetricsRecord& r) {
  std::string row = std::to_string(r.iter) + ",";
  row += join(r.domain_ids, ';', [](int id) { return std::to_string(id); });
  for (double p : r.probs) row += "," + format_double(p);
  for (double q : r.buffer) row += "," + format_double(q);
  row += "," + join(r.task_losses, ';', format_double);
  for (const auto& m : r.metatest) row += "," + (m ? format_double(*m) : std::string());
  return row + "," + format_double(r.wall_ms);
}

void write_metrics_csv(const std::filesystem::path& path, std::size_t K,
                       std::span<const std::string> targets, std::span<const MetricsRecord> records) {
  std::string text = metrics_header(K, targets) + "\n";
  for (const auto& r : records) text += metrics_row(r) + "\n";
  write_text(path, text);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["format"] = "ams-run-summary";
  j["version"] = 1;
  j["seed"] = s.seed;
  j["sampler"] = s.sampler;
  j["status"] = s.status;
  j["error"] = s.error;
  j["iterations_completed"] = s.iterations_completed;
  j["targets"] = s.targets;
  j["final_metatest"] = s.final_metatest;
  j["final_metatest_mean"] = s.final_metatest_mean;
  j["sample_counts"] = s.sample_counts;
  j["difficulty"] = s.difficulty;
  j["spearman_difficulty_count"] = s.spearman_difficulty_count;
  j["tail_mean_probs"] = s.tail_mean_probs;
  j["final_buffer"] = s.final_buffer;
  return j.dump(2) + "\n";
}

RunSummary summary_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "ams-run-summary") throw ConfigError("not a run summary");
    RunSummary s;
    j.at("seed").get_to(s.seed);
    j.at("sampler").get_to(s.sampler);
    j.at("status").get_to(s.status);
    j.at("error").get_to(s.error);
    j.at("iterations_completed").get_to(s.iterations_completed);
    j.at("targets").get_to(s.targets);
    j.at("final_metatest").get_to(s.final_metatest);
    j.at("final_metatest_mean").get_to(s.final_metatest_mean);
    j.at("sample_counts").get_to(s.sample_counts);
    j.at("difficulty").get_to(s.difficulty);
    j.at("spearman_difficulty_count").get_to(s.spearman_difficulty_count);
    j.at("tail_mean_probs").get_to(s.tail_mean_probs);
    j.at("final_buffer").get_to(s.final_buffer);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad run summary: ") + e.what());
  }
}

std::string theta_to_json(const ThetaCheckpoint& c) {
  nlohmann::json j;
  j["format"] = "ams-theta";
  j["version"] = 1;
  j["family"] = c.family;
  j["class_count"] = c.class_count;
  j["hidden"] = c.hidden;
  j["theta"] = c.theta;
  return j.dump();
}

ThetaCheckpoint theta_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "ams-theta") throw ConfigError("not a theta checkpoint");
    if (j.at("version") != 1) throw ConfigError("unsupported theta checkpoint version");
    ThetaCheckpoint c;
    j.at("family").get_to(c.family);
    j.at("class_count").get_to(c.class_count);
    j.at("hidden").get_to(c.hidden);
    j.at("theta").get_to(c.theta);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad theta checkpoint: ") + e.what());
  }
}

}  // namespace ams::harness
