#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ams/rng.hpp"

namespace ams::sampling {

enum class SelectionMode { top_m, stochastic };

std::string to_string(SelectionMode mode);
SelectionMode selection_from_string(const std::string& s);

/// M distinct domain ids. top_m: the M largest probabilities, ties to the
/// lower index, returned in rank order. stochastic: sequential draws without
/// replacement proportional to P (uniform over the rest once the remaining
/// mass is zero). Throws ConfigError when M > K.
std::vector<int> select_domains(std::span<const double> probs, std::size_t M, SelectionMode mode,
                                Rng& rng);

}  // namespace ams::sampling
