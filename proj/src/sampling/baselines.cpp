#include "ams/sampling/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ams/error.hpp"
#include "ams/sampling/buffer.hpp"
#include "ams/taskgen/combinatorics.hpp"

namespace ams::sampling {

void QueryLossBuffer::update(std::span<const int> ids, std::span<const double> losses) {
  if (ids.size() != losses.size()) {
    throw DimensionError("buffer update: " + std::to_string(ids.size()) + " ids but " +
                         std::to_string(losses.size()) + " losses");
  }
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= q_.size()) {
      throw IndexError("buffer update: domain id " + std::to_string(id) + " out of range");
    }
  }
  for (std::size_t j = 0; j < ids.size(); ++j) q_[static_cast<std::size_t>(ids[j])] = losses[j];
}

double compensated_sum(std::span<const double> v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

bool is_simplex(std::span<const double> p, double tol) {
  if (p.empty()) return false;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
  }
  return std::abs(compensated_sum(p) - 1.0) <= tol;
}

std::vector<double> uniform_probs(std::size_t K) {
  if (K == 0) throw DimensionError("uniform_probs needs K >= 1");
  return std::vector<double>(K, 1.0 / static_cast<double>(K));
}

namespace {

std::vector<double> normalized(std::vector<double> v) {
  const double total = compensated_sum(v);
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

std::vector<double> ppq_probs(std::span<const std::size_t> pool_sizes, std::size_t w, PpqMode mode) {
  if (pool_sizes.empty()) throw DimensionError("ppq_probs needs at least one domain");
  std::vector<double> v(pool_sizes.size());
  if (mode == PpqMode::pool_size) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(pool_sizes[k]);
    return normalized(std::move(v));
  }
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = taskgen::task_quantity(pool_sizes[k], w);
  const double mx = *std::max_element(v.begin(), v.end());
  for (double& x : v) x = std::exp(x - mx);
  return normalized(std::move(v));
}

std::vector<double> ppql_probs(std::span<const double> losses) {
  if (losses.empty()) throw DimensionError("ppql_probs needs at least one domain");
  const bool any_positive = std::any_of(losses.begin(), losses.end(), [](double q) { return q > 0.0; });
  if (!any_positive) return uniform_probs(losses.size());
  std::vector<double> v(losses.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::max(losses[k], kLossFloor);
  return normalized(std::move(v));
}

WindowAverage::WindowAverage(std::size_t K, std::size_t window) : window_(window), history_(K) {
  if (window == 0) throw ConfigError("window must be >= 1");
}

void WindowAverage::record(int domain, double loss) {
  auto& h = history_.at(static_cast<std::size_t>(domain));
  h.push_back(loss);
  if (h.size() > window_) h.pop_front();
}

std::vector<double> WindowAverage::averages() const {
  std::vector<double> a(history_.size(), 0.0);
  for (std::size_t k = 0; k < history_.size(); ++k) {
    const auto& h = history_[k];
    if (h.empty()) continue;
    double s = 0.0;
    for (double x : h) s += x;
    a[k] = s / static_cast<double>(h.size());
  }
  return a;
}

bool WindowAverage::seen(int domain) const {
  return !history_.at(static_cast<std::size_t>(domain)).empty();
}

ExpAverage::ExpAverage(std::size_t K, double decay) : decay_(decay), avg_(K, 0.0), seen_(K, false) {
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("decay must lie in (0, 1)");
}

void ExpAverage::record(int domain, double loss) {
  const auto k = static_cast<std::size_t>(domain);
  if (k >= avg_.size()) throw IndexError("ExpAverage: domain out of range");
  avg_[k] = seen_[k] ? decay_ * avg_[k] + (1.0 - decay_) * loss : loss;
  seen_[k] = true;
}

bool ExpAverage::seen(int domain) const { return seen_.at(static_cast<std::size_t>(domain)); }

std::vector<double> ppaql_probs(const WindowAverage& history) { return ppql_probs(history.averages()); }

std::vector<double> ppeaql_probs(const ExpAverage& average) { return ppql_probs(average.averages()); }

}  // namespace ams::sampling
