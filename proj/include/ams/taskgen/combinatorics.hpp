#pragma once

#include <cstdint>
#include <optional>

namespace ams::taskgen {

/// ln C(V, w) via log-gamma. Throws DomainError when w > V.
double task_quantity(std::uint64_t pool_size, std::uint64_t task_size);

/// Exact C(V, w) when it is below 2^63, nullopt otherwise.
std::optional<std::uint64_t> task_quantity_exact(std::uint64_t pool_size, std::uint64_t task_size);

}  // namespace ams::taskgen
