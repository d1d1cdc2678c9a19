#pragma once

#include <cstdint>
#include <vector>

#include "ams/ndcore/parameter.hpp"

namespace ams::nd {

/// value -= lr * grad for every parameter, then grads are reset.
void sgd_step(const ParameterList& params, double lr);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// Bias-corrected Adam descent step; moments are allocated lazily on the
/// first call. Grads are reset afterwards.
void adam_step(AdamState& state, const ParameterList& params, double lr);

/// Throws NumericError if any gradient is non-finite. Called by both steps
/// before any value is touched.
void require_finite_grads(const ParameterList& params);

}  // namespace ams::nd
