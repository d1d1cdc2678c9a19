#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ams/harness/experiment.hpp"

namespace ams::harness {

/// `iter,domain_ids,P_1..P_K,Q_1..Q_K,task_losses,metatest_<target>..,wall_ms`
std::string metrics_header(std::size_t K, std::span<const std::string> targets);
std::string metrics_row(const MetricsRecord& r);
void write_metrics_csv(const std::filesystem::path& path, std::size_t K,
                       std::span<const std::string> targets, std::span<const MetricsRecord> records);

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double v);

std::string summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const std::string& text);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

struct ThetaCheckpoint {
  std::string family;
  int class_count = 0;
  std::vector<std::size_t> hidden;
  std::vector<double> theta;
};
std::string theta_to_json(const ThetaCheckpoint& c);
ThetaCheckpoint theta_from_json(const std::string& text);

}  // namespace ams::harness
