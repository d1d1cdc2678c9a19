#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ams::sampling {

/// Last-known loss per domain, all zero until a domain is first sampled.
/// Entries of domains that were not sampled keep their value bit-for-bit.
class QueryLossBuffer {
 public:
  explicit QueryLossBuffer(std::size_t K) : q_(K, 0.0) {}

  /// Overwrites the sampled entries. Throws IndexError for ids outside [0, K)
  /// and DimensionError when ids and losses differ in length.
  void update(std::span<const int> ids, std::span<const double> losses);

  std::span<const double> values() const { return q_; }
  double operator[](std::size_t k) const { return q_[k]; }
  std::size_t size() const { return q_.size(); }

 private:
  std::vector<double> q_;
};

/// True when p is nonnegative and sums to 1 within tol.
bool is_simplex(std::span<const double> p, double tol = 1e-12);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> v);

}  // namespace ams::sampling
