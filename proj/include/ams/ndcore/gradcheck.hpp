#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ams/ndcore/parameter.hpp"

namespace ams::nd {

inline constexpr double kFiniteDifferenceEps = 1e-5;

/// Central-difference estimate (f(p+eps) - f(p-eps)) / (2 eps) for every
/// coordinate of every parameter. `f` must read the parameters' current
/// values; they are restored bit-exactly afterwards.
std::vector<Tensor> finite_difference_grad(const std::function<double()>& f,
                                           const ParameterList& params,
                                           double eps = kFiniteDifferenceEps);

/// Relative error with an absolute floor: |a - n| / max(|a|, |n|, abs_floor / rel_tol).
/// A value <= rel_tol means "within rel_tol relative, or within abs_floor absolute".
double gradient_error(double analytic, double numeric, double rel_tol = 1e-4,
                      double abs_floor = 1e-6);

struct GradCheckOptions {
  double eps = kFiniteDifferenceEps;
  double rel_tol = 1e-4;
  double abs_floor = 1e-6;
  /// 0 checks every coordinate; otherwise a seeded random subset per parameter.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed(double rel_tol = 1e-4) const { return max_error <= rel_tol; }
  void merge(const GradCheckReport& other);
};

/// Zeroes grads, runs `backward` (which must accumulate dL/dparams for the
/// same scalar `loss` computes), then compares against central differences.
GradCheckReport check_gradients(const std::function<double()>& loss,
                                const std::function<void()>& backward,
                                const ParameterList& params,
                                const GradCheckOptions& options = {});

}  // namespace ams::nd
