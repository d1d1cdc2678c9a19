#include "ams/taskgen/combinatorics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ams/error.hpp"

namespace ams::taskgen {

double task_quantity(std::uint64_t pool_size, std::uint64_t task_size) {
  if (task_size > pool_size) {
    throw DomainError("task size " + std::to_string(task_size) + " exceeds pool size " +
                      std::to_string(pool_size));
  }
  const double v = static_cast<double>(pool_size);
  const double w = static_cast<double>(task_size);
  return std::lgamma(v + 1.0) - std::lgamma(w + 1.0) - std::lgamma(v - w + 1.0);
}

std::optional<std::uint64_t> task_quantity_exact(std::uint64_t pool_size, std::uint64_t task_size) {
  if (task_size > pool_size) {
    throw DomainError("task size " + std::to_string(task_size) + " exceeds pool size " +
                      std::to_string(pool_size));
  }
  const std::uint64_t k = std::min(task_size, pool_size - task_size);
  constexpr auto kLimit = static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max());
  unsigned __int128 c = 1;
  // c stays integral: after step i it equals C(V - k + i, i).
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (pool_size - k + i) / i;
    if (c > kLimit) return std::nullopt;
  }
  return static_cast<std::uint64_t>(c);
}

}  // namespace ams::taskgen
