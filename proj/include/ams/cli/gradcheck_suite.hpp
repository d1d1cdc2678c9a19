#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ams::cli {

struct ComponentCheck {
  std::string name;
  double tolerance = 1e-4;
  double max_error = 0.0;
  std::size_t coords = 0;
  int seeds = 0;
  std::string worst;  // parameter and index of the largest error
  bool passed() const { return max_error <= tolerance; }
};

struct GradcheckSuiteOptions {
  std::uint64_t seed = 0;
  /// Seeds per component for the small, fully-enumerated checks.
  int seeds = 100;
  /// Seeds for the full-size policy network, checked on a coordinate subsample.
  int full_policy_seeds = 100;
  std::size_t full_policy_coords = 16;
};

/// Finite-difference checks of every ndcore layer, the composed policy network
/// under both surrogates, and the MAML outer gradient. Deterministic in options.
std::vector<ComponentCheck> run_gradcheck_suite(const GradcheckSuiteOptions& options = {});

std::string format_gradcheck_report(const std::vector<ComponentCheck>& checks);

}  // namespace ams::cli
