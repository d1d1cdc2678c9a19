#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace ams::sampling {

inline constexpr double kLossFloor = 1e-12;

std::vector<double> uniform_probs(std::size_t K);

enum class PpqMode { pool_size, log_combination };

/// Proportional to pool size V_k, or softmax over ln C(V_k, w).
std::vector<double> ppq_probs(std::span<const std::size_t> pool_sizes, std::size_t w,
                              PpqMode mode = PpqMode::pool_size);

/// max(Q_k, eps) / sum_i max(Q_i, eps); uniform when every entry is <= 0.
std::vector<double> ppql_probs(std::span<const double> losses);

/// Per-domain mean of the last W recorded losses.
class WindowAverage {
 public:
  WindowAverage(std::size_t K, std::size_t window);
  void record(int domain, double loss);
  /// Zero for domains with no recorded loss.
  std::vector<double> averages() const;
  bool seen(int domain) const;
  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  std::vector<std::deque<double>> history_;
};

/// a_k <- d a_k + (1 - d) Q_k, touched only when domain k is sampled. The
/// first observation initialises a_k directly.
class ExpAverage {
 public:
  ExpAverage(std::size_t K, double decay);
  void record(int domain, double loss);
  std::span<const double> averages() const { return avg_; }
  bool seen(int domain) const;
  double decay() const { return decay_; }

 private:
  double decay_;
  std::vector<double> avg_;
  std::vector<bool> seen_;
};

std::vector<double> ppaql_probs(const WindowAverage& history);
std::vector<double> ppeaql_probs(const ExpAverage& average);

}  // namespace ams::sampling
